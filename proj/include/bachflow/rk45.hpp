#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bachflow {

/// Numerical failure raised by the integrators.
struct FlowError : std::runtime_error {
    enum class Kind { stiff_segment, constraint_violation, metric_degenerated, extend_base_trajectory };
    Kind kind;
    FlowError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0.0;              // 0 = choose automatically
    double max_step = std::numeric_limits<double>::infinity();
    double max_step_rel = 0.0;              // if > 0, cap h <= max_step_rel * max(|t|, 1e-6)
    double max_growth = 10.0;               // step growth cap per accepted step
    std::size_t max_steps = 50'000'000;
};

using StateVec = std::vector<double>;
using OdeRhs = std::function<void(double t, const StateVec& y, StateVec& dydt)>;

/// One accepted integrator node with its derivative (enough for C1 dense output).
struct OdeNode {
    double t;
    StateVec y;
    StateVec f;
};

/// Cubic Hermite interpolation between two nodes.
inline StateVec hermite(const OdeNode& n0, const OdeNode& n1, double t) {
    const double h = n1.t - n0.t;
    const double s = (t - n0.t) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    StateVec out(n0.y.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * n0.y[i] + h * h10 * n0.f[i] + h01 * n1.y[i] + h * h11 * n1.f[i];
    return out;
}

/// Dormand-Prince 5(4) embedded pair with standard error-based step control
/// and first-same-as-last reuse.  Steps are clipped to land on every requested
/// sample time exactly, so recorded trajectories never rely on interpolation
/// at those points.
class DormandPrince54 {
  public:
    /// Integrate from (t0, y0) to t_end, invoking `on_accept` for every
    /// accepted node in order (including the initial one).
    static void integrate(const OdeRhs& rhs, double t0, const StateVec& y0, double t_end,
                          const IntegratorOptions& opt, std::vector<double> sample_times,
                          const std::function<void(const OdeNode&)>& on_accept,
                          std::size_t* accepted_out = nullptr, std::size_t* rejected_out = nullptr) {
        const std::size_t n = y0.size();
        std::sort(sample_times.begin(), sample_times.end());
        std::size_t next_sample = 0;
        while (next_sample < sample_times.size() && sample_times[next_sample] <= t0)
            ++next_sample;

        OdeNode cur{t0, y0, StateVec(n)};
        rhs(cur.t, cur.y, cur.f);
        on_accept(cur);

        double h = opt.initial_step > 0.0 ? opt.initial_step : initial_step_guess(cur, t_end);
        std::size_t accepted = 0, rejected = 0;

        StateVec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);

        while (cur.t < t_end) {
            if (accepted + rejected > opt.max_steps)
                throw FlowError(FlowError::Kind::stiff_segment, "step budget exhausted");
            double hmax = opt.max_step;
            if (opt.max_step_rel > 0.0)
                hmax = std::min(hmax, opt.max_step_rel * std::max(std::abs(cur.t), 1e-6));
            h = std::min(h, hmax);

            double target = t_end;
            if (next_sample < sample_times.size() && sample_times[next_sample] < t_end)
                target = sample_times[next_sample];
            double h_unclipped = h;
            bool clipped = false;
            if (cur.t + h >= target) {
                h = target - cur.t;
                clipped = true;
            }
            if (h < hmin(cur.t))
                throw FlowError(FlowError::Kind::stiff_segment, "stiff segment: step size underflow");

            // stages (k1 = cur.f by FSAL)
            wsum(ytmp, cur.y, h, {{a21, cur.f}});
            rhs(cur.t + c2 * h, ytmp, k2);
            wsum(ytmp, cur.y, h, {{a31, cur.f}, {a32, k2}});
            rhs(cur.t + c3 * h, ytmp, k3);
            wsum(ytmp, cur.y, h, {{a41, cur.f}, {a42, k2}, {a43, k3}});
            rhs(cur.t + c4 * h, ytmp, k4);
            wsum(ytmp, cur.y, h, {{a51, cur.f}, {a52, k2}, {a53, k3}, {a54, k4}});
            rhs(cur.t + c5 * h, ytmp, k5);
            wsum(ytmp, cur.y, h, {{a61, cur.f}, {a62, k2}, {a63, k3}, {a64, k4}, {a65, k5}});
            rhs(cur.t + h, ytmp, k6);
            wsum(y5, cur.y, h, {{b1, cur.f}, {b3, k3}, {b4, k4}, {b5, k5}, {b6, k6}});
            rhs(cur.t + h, y5, k7);

            double errnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double e = h * (e1 * cur.f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                e7 * k7[i]);
                double sc = opt.atol + opt.rtol * std::max(std::abs(cur.y[i]), std::abs(y5[i]));
                errnorm += (e / sc) * (e / sc);
            }
            errnorm = std::sqrt(errnorm / static_cast<double>(n));

            if (errnorm <= 1.0) {
                double t_new = clipped ? target : cur.t + h;
                cur = OdeNode{t_new, y5, k7};
                ++accepted;
                if (next_sample < sample_times.size() && t_new >= sample_times[next_sample])
                    ++next_sample;
                on_accept(cur);
                double fac = std::min(opt.max_growth,
                                      std::max(0.2, 0.9 * std::pow(std::max(errnorm, 1e-12), -0.2)));
                // do not let grid clipping shrink the working step permanently
                h = std::max(h * fac, clipped ? h_unclipped : 0.0);
            } else {
                ++rejected;
                h = h * std::max(0.1, 0.9 * std::pow(errnorm, -0.2));
            }
        }
        if (accepted_out) *accepted_out = accepted;
        if (rejected_out) *rejected_out = rejected;
    }

  private:
    static double hmin(double t) { return 2.5e-15 * std::max(std::abs(t), 1.0); }

    static double initial_step_guess(const OdeNode& start, double t_end) {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < start.y.size(); ++i) {
            ynorm = std::max(ynorm, std::abs(start.y[i]));
            fnorm = std::max(fnorm, std::abs(start.f[i]));
        }
        double span = t_end - start.t;
        double h = fnorm > 1e-12 ? 0.01 * std::max(1e-6, ynorm + 1.0) / fnorm : 0.01 * span;
        return std::min(h, 0.1 * span);
    }

    struct WTerm {
        double w;
        const StateVec& v;
    };
    static void wsum(StateVec& out, const StateVec& y, double h, std::initializer_list<WTerm> terms) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            double s = 0.0;
            for (const WTerm& t : terms) s += t.w * t.v[i];
            out[i] = y[i] + h * s;
        }
    }

    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

}  // namespace bachflow
