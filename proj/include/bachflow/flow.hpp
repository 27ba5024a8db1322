#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bachflow/bracket.hpp"
#include "bachflow/closed_forms.hpp"
#include "bachflow/curvature.hpp"
#include "bachflow/rk45.hpp"

namespace bachflow {

enum class FlowKind { reduced, normalized, full_gauged, full_ungauged, metric };

inline const char* flow_kind_name(FlowKind k) {
    switch (k) {
        case FlowKind::reduced: return "reduced";
        case FlowKind::normalized: return "normalized";
        case FlowKind::full_gauged: return "full-gauged";
        case FlowKind::full_ungauged: return "full-ungauged";
        case FlowKind::metric: return "metric";
    }
    return "?";
}

/// Per-sample monitor channels written to trajectory CSV.
struct Monitors {
    double norm2 = 0.0;            // |mu|^2, unordered-pair convention
    double scalar = 0.0;           // scalar curvature at canonical normalization
    double log_ac = 0.0;           // log(a/c)
    double b2_over_a2 = 0.0;       // b^2 / a^2
    double r = 0.0;                // normalization scalar (0 on un-normalized flows)
    double lambda_scale = 1.0;     // lambda(t); identity reparametrization when r == 0
    double tau = 0.0;              // tau(t)
    double off_structure_max = 0.0;
};

struct FlowSample {
    double t = 0.0;
    StateVec state;
    StateVec deriv;
    Monitors mon;
};

struct FlowMeta {
    std::string termination = "t_end";
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    IntegratorOptions integrator;
};

struct FlowTrajectory {
    FlowKind kind = FlowKind::reduced;
    std::vector<FlowSample> samples;
    FlowMeta meta;
    std::optional<BracketTensor> initial_bracket;  // fixed bracket of a metric-flow run

    const FlowSample& back() const { return samples.back(); }

    /// C1 dense evaluation of the raw state at time t (cubic Hermite between
    /// the recorded integrator nodes).
    StateVec state_at(double t) const {
        if (samples.empty()) throw FlowError(FlowError::Kind::extend_base_trajectory, "empty trajectory");
        if (t < samples.front().t - 1e-12 || t > samples.back().t * (1 + 1e-12) + 1e-12)
            throw FlowError(FlowError::Kind::extend_base_trajectory,
                            "extend base trajectory: time outside recorded horizon");
        if (t <= samples.front().t) return samples.front().state;
        if (t >= samples.back().t) return samples.back().state;
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const FlowSample& s, double tv) { return s.t < tv; });
        const FlowSample& hi = *it;
        const FlowSample& lo = *(it - 1);
        if (hi.t == t) return hi.state;
        OdeNode n0{lo.t, lo.state, lo.deriv};
        OdeNode n1{hi.t, hi.state, hi.deriv};
        return hermite(n0, n1, t);
    }
};

struct FlowOptions {
    IntegratorOptions integrator;
    std::size_t grid_samples = 0;   // extra uniform sample times in (t0, t_end]
    double conv_tol = 1e-8;         // normalized-flow convergence detection
    bool stop_on_convergence = true;
    std::size_t conv_window = 10;
};

namespace detail {

struct EarlyStop {};  // internal control flow for convergence detection

inline std::vector<double> uniform_grid(double t0, double t_end, std::size_t count) {
    std::vector<double> ts;
    for (std::size_t i = 1; i <= count; ++i)
        ts.push_back(t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(count));
    return ts;
}

inline Monitors reduced_monitors(const TriBracket& p, double r, double lambda_scale, double tau) {
    Monitors m;
    m.norm2 = p.norm_sq();
    m.scalar = scalar_curvature(p);
    m.log_ac = (p.a > 0.0 && p.c > 0.0) ? std::log(p.a / p.c)
                                        : std::numeric_limits<double>::quiet_NaN();
    m.b2_over_a2 = p.a != 0.0 ? (p.b * p.b) / (p.a * p.a) : std::numeric_limits<double>::quiet_NaN();
    m.r = r;
    m.lambda_scale = lambda_scale;
    m.tau = tau;
    return m;
}

}  // namespace detail

/// Reduced gauged flow on the (a, b, c) slice.  Accepts the closed boundary
/// rays b = 0 and c = 0 (invariant under the flow); rejects a <= 0 or c < 0.
inline FlowTrajectory integrate_reduced(const TriBracket& p0, double t_end,
                                        const FlowOptions& opt = {}) {
    if (!(p0.a > 0.0) || p0.c < 0.0)
        throw std::invalid_argument("reduced flow requires a > 0 and c >= 0");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    FlowTrajectory traj;
    traj.kind = FlowKind::reduced;
    traj.meta.integrator = opt.integrator;

    OdeRhs rhs = [](double, const StateVec& y, StateVec& dydt) {
        TriRates r = ode_rhs({y[0], y[1], y[2]});
        dydt[0] = r.da;
        dydt[1] = r.db;
        dydt[2] = r.dc;
    };
    auto record = [&](const OdeNode& n) {
        TriBracket p{n.y[0], n.y[1], n.y[2]};
        if (!(p.a > 0.0) || p.c < -1e-12)
            throw FlowError(FlowError::Kind::constraint_violation,
                            "constraint violation: trajectory left the reduced slice");
        FlowSample s;
        s.t = n.t;
        s.state = n.y;
        s.deriv = n.f;
        s.mon = detail::reduced_monitors(p, 0.0, 1.0, n.t);
        traj.samples.push_back(std::move(s));
    };
    DormandPrince54::integrate(rhs, 0.0, {p0.a, p0.b, p0.c}, t_end, opt.integrator,
                               detail::uniform_grid(0.0, t_end, opt.grid_samples), record,
                               &traj.meta.accepted_steps, &traj.meta.rejected_steps);
    return traj;
}

/// r-normalized reduced flow with the norm-fixing choice of r.  State carries
/// (a, b, c, log lambda, tau); tau integration saturates once lambda^4 would
/// overflow (the monitors then report tau = +inf).
inline FlowTrajectory integrate_normalized(TriBracket p0, double t_end, const FlowOptions& opt = {},
                                           bool rescale_input = false) {
    if (!p0.in_open_set()) throw std::invalid_argument("normalized flow requires a, c > 0");
    double n0 = std::sqrt(p0.norm_sq());
    if (std::abs(n0 - 2.0) > 1e-9) {
        if (!rescale_input)
            throw std::invalid_argument("normalized flow requires |mu_0| = 2 (pass rescale to adjust)");
        double f = 2.0 / n0;
        p0 = {f * p0.a, f * p0.b, f * p0.c};
    }
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    FlowTrajectory traj;
    traj.kind = FlowKind::normalized;
    traj.meta.integrator = opt.integrator;

    constexpr double kLogLambdaSat = 172.0;  // 4*loglam < 688: tau' representable

    // On the |mu|^2 = 4 slice this equals the norm-fixing -<pi(B)mu,mu>/4, but
    // dividing by the current norm makes d/dt |mu|^2 vanish identically, so the
    // slice is not an unstable invariant manifold for the discretized flow.
    auto adaptive_r = [](const TriBracket& p) {
        return 4.0 * normalization_r(p) / p.norm_sq();
    };

    OdeRhs rhs = [&](double, const StateVec& y, StateVec& dydt) {
        TriBracket p{y[0], y[1], y[2]};
        TriRates rr = ode_rhs(p);
        double r = adaptive_r(p);
        dydt[0] = rr.da + 0.5 * r * p.a;
        dydt[1] = rr.db + 0.5 * r * p.b;
        dydt[2] = rr.dc + 0.5 * r * p.c;
        dydt[3] = 0.5 * r;
        dydt[4] = y[3] < kLogLambdaSat ? std::exp(4.0 * y[3]) : 0.0;
    };

    std::deque<double> window;  // trailing max(|a-c|, |b|, |a'|) values
    auto record = [&](const OdeNode& n) {
        TriBracket p{n.y[0], n.y[1], n.y[2]};
        if (!(p.a > 0.0) || !(p.c > 0.0))
            throw FlowError(FlowError::Kind::constraint_violation,
                            "constraint violation: normalized trajectory left the open slice");
        FlowSample s;
        s.t = n.t;
        s.state = n.y;
        s.deriv = n.f;
        double lam = n.y[3] < 700.0 ? std::exp(n.y[3]) : std::numeric_limits<double>::infinity();
        double tau = n.y[3] < kLogLambdaSat ? n.y[4] : std::numeric_limits<double>::infinity();
        s.mon = detail::reduced_monitors(p, adaptive_r(p), lam, tau);
        traj.samples.push_back(std::move(s));
        window.push_back(std::max({std::abs(p.a - p.c), std::abs(p.b), std::abs(n.f[0])}));
        while (window.size() > opt.conv_window) window.pop_front();
        if (opt.stop_on_convergence && window.size() == opt.conv_window) {
            bool conv = true;
            for (double m : window) conv = conv && m < opt.conv_tol;
            if (conv) throw detail::EarlyStop{};
        }
    };

    try {
        DormandPrince54::integrate(rhs, 0.0, {p0.a, p0.b, p0.c, 0.0, 0.0}, t_end, opt.integrator,
                                   detail::uniform_grid(0.0, t_end, opt.grid_samples), record,
                                   &traj.meta.accepted_steps, &traj.meta.rejected_steps);
        traj.meta.termination = "t_end";
    } catch (const detail::EarlyStop&) {
        traj.meta.termination = "converged";
    }
    return traj;
}

namespace detail {

inline Mat4 gauge_from_bach(const Mat4& bach_endo) {
    // skew term cancelling the strictly upper part, so B - R is lower triangular
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            r(i, j) = bach_endo(i, j);
            r(j, i) = -bach_endo(i, j);
        }
    return r;
}

}  // namespace detail

/// Full 24-component bracket flow, generator (1/2) pi(B - R) mu (gauged) or
/// (1/2) pi(B) mu (ungauged), with B supplied by the curvature oracle at the
/// fixed standard inner product.
inline FlowTrajectory integrate_full(const BracketTensor& mu0, double t_end,
                                     const FlowOptions& opt = {}, bool gauged = true) {
    if (!is_validated_nilpotent(mu0, 1e-9))
        throw std::invalid_argument("initial bracket is not a validated nilpotent Lie bracket");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    FlowTrajectory traj;
    traj.kind = gauged ? FlowKind::full_gauged : FlowKind::full_ungauged;
    traj.meta.integrator = opt.integrator;

    const MetricSpec id = MetricSpec::identity();
    OdeRhs rhs = [&, gauged](double, const StateVec& y, StateVec& dydt) {
        BracketTensor mu;
        std::copy(y.begin(), y.end(), mu.raw().begin());
        Mat4 b = bach_oracle(mu, id).endo;
        Mat4 l = gauged ? b - detail::gauge_from_bach(b) : b;
        BracketTensor rate = 0.5 * pi_rep(l, mu);
        std::copy(rate.raw().begin(), rate.raw().end(), dydt.begin());
    };
    auto record = [&](const OdeNode& n) {
        BracketTensor mu;
        std::copy(n.y.begin(), n.y.end(), mu.raw().begin());
        TriBracket p = mu.tri_components();
        FlowSample s;
        s.t = n.t;
        s.state = n.y;
        s.deriv = n.f;
        s.mon.norm2 = bracket_norm_sq(mu);
        s.mon.scalar = -s.mon.norm2 / 4.0;
        s.mon.log_ac = (p.a > 0.0 && p.c > 0.0) ? std::log(p.a / p.c)
                                                : std::numeric_limits<double>::quiet_NaN();
        s.mon.b2_over_a2 = p.a != 0.0 ? p.b * p.b / (p.a * p.a)
                                      : std::numeric_limits<double>::quiet_NaN();
        s.mon.lambda_scale = 1.0;
        s.mon.tau = n.t;
        s.mon.off_structure_max = mu.off_structure_max();
        traj.samples.push_back(std::move(s));
    };
    StateVec y0(BracketTensor::kSize);
    std::copy(mu0.raw().begin(), mu0.raw().end(), y0.begin());
    DormandPrince54::integrate(rhs, 0.0, y0, t_end, opt.integrator,
                               detail::uniform_grid(0.0, t_end, opt.grid_samples), record,
                               &traj.meta.accepted_steps, &traj.meta.rejected_steps);
    return traj;
}

namespace detail {

inline StateVec pack_sym(const Mat4& g) {
    StateVec y(10);
    int q = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) y[static_cast<std::size_t>(q++)] = g(i, j);
    return y;
}

inline Mat4 unpack_sym(const StateVec& y) {
    Mat4 g;
    int q = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            g(i, j) = y[static_cast<std::size_t>(q)];
            g(j, i) = y[static_cast<std::size_t>(q)];
            ++q;
        }
    return g;
}

}  // namespace detail

/// Fixed-bracket, evolving-inner-product formulation: dG/dt = Bach bilinear
/// form of (mu0, G).  Scalar invariant histories match the bracket flow.
inline FlowTrajectory integrate_metric(const BracketTensor& mu0, const MetricSpec& g0, double t_end,
                                       const FlowOptions& opt = {}) {
    if (!is_validated_nilpotent(mu0, 1e-9))
        throw std::invalid_argument("initial bracket is not a validated nilpotent Lie bracket");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    FlowTrajectory traj;
    traj.kind = FlowKind::metric;
    traj.meta.integrator = opt.integrator;
    traj.initial_bracket = mu0;

    OdeRhs rhs = [&](double, const StateVec& y, StateVec& dydt) {
        Mat4 g = detail::unpack_sym(y);
        Mat4 l;
        if (!cholesky(g, l))
            throw FlowError(FlowError::Kind::metric_degenerated,
                            "metric degenerated: gram matrix lost positive-definiteness");
        Mat4 bbil = bach_oracle(mu0, MetricSpec(g)).bilinear;
        StateVec packed = detail::pack_sym(bbil);
        std::copy(packed.begin(), packed.end(), dydt.begin());
    };
    auto record = [&](const OdeNode& n) {
        Mat4 g = detail::unpack_sym(n.y);
        Mat4 l;
        if (!cholesky(g, l))
            throw FlowError(FlowError::Kind::metric_degenerated,
                            "metric degenerated: gram matrix lost positive-definiteness");
        MetricSpec ms(g);
        // equivalent identity-metric bracket via the flag-preserving factor
        BracketTensor hmu = gl_action(ms.lower_factor(), mu0);
        TriBracket p = hmu.tri_components();
        FlowSample s;
        s.t = n.t;
        s.state = n.y;
        s.deriv = n.f;
        s.mon.norm2 = bracket_norm_sq(hmu);
        s.mon.scalar = -s.mon.norm2 / 4.0;
        s.mon.log_ac = (p.a > 0.0 && p.c > 0.0) ? std::log(p.a / p.c)
                                                : std::numeric_limits<double>::quiet_NaN();
        s.mon.b2_over_a2 = p.a != 0.0 ? p.b * p.b / (p.a * p.a)
                                      : std::numeric_limits<double>::quiet_NaN();
        s.mon.lambda_scale = 1.0;
        s.mon.tau = n.t;
        s.mon.off_structure_max = hmu.off_structure_max();
        traj.samples.push_back(std::move(s));
    };
    DormandPrince54::integrate(rhs, 0.0, detail::pack_sym(g0.gram), t_end, opt.integrator,
                               detail::uniform_grid(0.0, t_end, opt.grid_samples), record,
                               &traj.meta.accepted_steps, &traj.meta.rejected_steps);
    return traj;
}

/// lambda / tau bookkeeping for a normalization history.
struct NormalizationState {
    double t = 0.0;
    double lambda = 1.0;
    double tau = 0.0;
    double r = 0.0;
};

struct ReparamResult {
    std::vector<NormalizationState> history;
    double max_mismatch = 0.0;  // max |mu^r(t) - lambda(t) mu(tau(t))| over checked samples
};

/// Integrate lambda' = r lambda / 2, tau' = lambda^4 for a sampled r(t)
/// (piecewise-cubic interpolation of the samples), recording at the sample times.
inline std::vector<NormalizationState> integrate_normalization(
    const std::vector<std::pair<double, double>>& r_samples, const IntegratorOptions& opt = {}) {
    if (r_samples.size() < 2) throw std::invalid_argument("normalization history needs >= 2 samples");
    auto r_of_t = [&](double t) {
        auto it = std::lower_bound(r_samples.begin(), r_samples.end(), t,
                                   [](const std::pair<double, double>& s, double tv) { return s.first < tv; });
        if (it == r_samples.begin()) return it->second;
        if (it == r_samples.end()) return (it - 1)->second;
        auto [t1, r1] = *it;
        auto [t0, r0] = *(it - 1);
        // Catmull-Rom slopes from neighbours
        double m0, m1;
        if (it - 1 == r_samples.begin()) m0 = (r1 - r0) / (t1 - t0);
        else {
            auto [tm, rm] = *(it - 2);
            m0 = (r1 - rm) / (t1 - tm);
        }
        if (it + 1 == r_samples.end()) m1 = (r1 - r0) / (t1 - t0);
        else {
            auto [tp, rp] = *(it + 1);
            m1 = (rp - r0) / (tp - t0);
        }
        OdeNode n0{t0, {r0}, {m0}};
        OdeNode n1{t1, {r1}, {m1}};
        return hermite(n0, n1, t)[0];
    };
    OdeRhs rhs = [&](double t, const StateVec& y, StateVec& dydt) {
        double lam = y[0];
        dydt[0] = 0.5 * r_of_t(t) * lam;
        dydt[1] = lam * lam * lam * lam;
    };
    std::vector<double> times;
    for (const auto& [t, r] : r_samples) times.push_back(t);
    std::vector<NormalizationState> hist;
    auto record = [&](const OdeNode& n) {
        hist.push_back({n.t, n.y[0], n.y[1], r_of_t(n.t)});
    };
    DormandPrince54::integrate(rhs, times.front(), {1.0, 0.0}, times.back(), opt, times, record);
    return hist;
}

/// Verify the reparametrization identity mu^r(t) = lambda(t) mu(tau(t)) between
/// a normalized trajectory and an un-normalized base trajectory of the same
/// initial bracket.  Throws extend_base_trajectory if tau leaves the base horizon.
inline ReparamResult reparametrize(const FlowTrajectory& base, const FlowTrajectory& normalized) {
    std::vector<std::pair<double, double>> r_samples;
    for (const FlowSample& s : normalized.samples) r_samples.emplace_back(s.t, s.mon.r);
    ReparamResult out;
    out.history = integrate_normalization(r_samples, normalized.meta.integrator);

    std::size_t hi = 0;
    for (const FlowSample& s : normalized.samples) {
        while (hi < out.history.size() && out.history[hi].t < s.t) ++hi;
        if (hi >= out.history.size()) break;
        const NormalizationState& ns = out.history[hi];
        if (std::abs(ns.t - s.t) > 1e-9 * std::max(1.0, std::abs(s.t))) continue;
        StateVec b = base.state_at(ns.tau);
        double dx0 = s.state[0] - ns.lambda * b[0];
        double dx1 = s.state[1] - ns.lambda * b[1];
        double dx2 = s.state[2] - ns.lambda * b[2];
        out.max_mismatch =
            std::max(out.max_mismatch, std::sqrt(dx0 * dx0 + dx1 * dx1 + dx2 * dx2));
    }
    return out;
}

}  // namespace bachflow
