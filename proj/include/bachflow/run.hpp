#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bachflow/serialize.hpp"
#include "bachflow/soliton.hpp"
#include "bachflow/verify.hpp"

namespace bachflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// exit codes: 0 success, 1 config error, 2 invariant violation, 3 numerical failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInvariant = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
    std::string subcommand = "flow";  // flow | normalized | soliton | verify | sweep

    // initial data
    double a = 1.0, b = 1.0, c = 1.0;
    std::optional<BracketTensor> bracket;  // full-variety initial bracket
    std::optional<Mat4> metric_gram;       // evolving-metric start

    std::string formulation = "reduced";   // reduced | full-gauged | full-ungauged | metric

    double t_end = 10.0;
    double rtol = 1e-10;
    double atol = 1e-10;
    std::size_t grid_samples = 0;
    double conv_tol = 1e-8;
    bool rescale = false;

    // soliton search
    double region_min = 0.1;
    double region_max = 3.0;
    int starts = 400;

    // verify / sweep
    std::size_t grid = 10;   // grid^3 verification points
    std::size_t count = 20;  // sweep initial conditions
    double norm_max = 2.0;

    std::uint64_t seed = 42;

    std::string out_dir;       // empty = $BACHFLOW_OUT_DIR or ./runs
    std::string run_name;      // empty = subcommand name

    void validate() const {
        const bool known = subcommand == "flow" || subcommand == "normalized" ||
                           subcommand == "soliton" || subcommand == "verify" ||
                           subcommand == "sweep";
        if (!known) throw ConfigError("unknown subcommand: " + subcommand);
        if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
        if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("tolerances must be positive");
        if (!(conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
        if (subcommand == "soliton" && (!(region_min > 0.0) || region_max <= region_min))
            throw ConfigError("soliton region must satisfy 0 < min < max");
        if (starts <= 0) throw ConfigError("starts must be positive");
        if (formulation != "reduced" && formulation != "full-gauged" &&
            formulation != "full-ungauged" && formulation != "metric")
            throw ConfigError("unknown formulation: " + formulation);
        if (subcommand == "flow" && formulation == "reduced" && !bracket) {
            if (!(a > 0.0) || c < 0.0) throw ConfigError("reduced flow requires a > 0 and c >= 0");
        }
    }

    std::filesystem::path output_directory() const {
        std::string base = out_dir;
        if (base.empty()) {
            if (const char* env = std::getenv("BACHFLOW_OUT_DIR")) base = env;
            else base = "runs";
        }
        return std::filesystem::path(base) / (run_name.empty() ? subcommand : run_name);
    }
};

inline json to_json(const RunConfig& cfg) {
    json j{{"subcommand", cfg.subcommand},
           {"a", cfg.a},
           {"b", cfg.b},
           {"c", cfg.c},
           {"formulation", cfg.formulation},
           {"t_end", cfg.t_end},
           {"rtol", cfg.rtol},
           {"atol", cfg.atol},
           {"grid_samples", cfg.grid_samples},
           {"conv_tol", cfg.conv_tol},
           {"rescale", cfg.rescale},
           {"region_min", cfg.region_min},
           {"region_max", cfg.region_max},
           {"starts", cfg.starts},
           {"grid", cfg.grid},
           {"count", cfg.count},
           {"norm_max", cfg.norm_max},
           {"seed", cfg.seed},
           {"out_dir", cfg.out_dir},
           {"run_name", cfg.run_name}};
    if (cfg.bracket) j["bracket"] = to_json(*cfg.bracket);
    if (cfg.metric_gram) j["metric_gram"] = to_json(*cfg.metric_gram);
    return j;
}

inline RunConfig runconfig_from_json(const json& j) {
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if (j.contains(key)) field = j.at(key).get<T>();
    };
    get("subcommand", c.subcommand);
    get("a", c.a);
    get("b", c.b);
    get("c", c.c);
    get("formulation", c.formulation);
    get("t_end", c.t_end);
    get("rtol", c.rtol);
    get("atol", c.atol);
    get("grid_samples", c.grid_samples);
    get("conv_tol", c.conv_tol);
    get("rescale", c.rescale);
    get("region_min", c.region_min);
    get("region_max", c.region_max);
    get("starts", c.starts);
    get("grid", c.grid);
    get("count", c.count);
    get("norm_max", c.norm_max);
    get("seed", c.seed);
    get("out_dir", c.out_dir);
    get("run_name", c.run_name);
    if (j.contains("bracket")) c.bracket = bracket_from_json(j.at("bracket"));
    if (j.contains("metric_gram")) c.metric_gram = mat4_from_json(j.at("metric_gram"));
    return c;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path.string());
    os << text;
}

struct TrajectoryChecks {
    bool monotone_norm = true;
    double min_monotone_slack = 0.0;  // most negative sample-to-sample norm2 decrease violation
    bool decay_bound = true;
    double worst_decay_excess = 0.0;  // max of norm2 - sqrt(6)/sqrt(t) over t >= 1
    bool norm_drift_ok = true;        // normalized runs only
    double max_norm_drift = 0.0;
};

inline TrajectoryChecks check_trajectory(const FlowTrajectory& traj) {
    TrajectoryChecks ck;
    double prev = traj.samples.empty() ? 0.0 : traj.samples.front().mon.norm2;
    const bool normalized = traj.kind == FlowKind::normalized;
    const double n0 = traj.samples.empty() ? 0.0 : std::sqrt(traj.samples.front().mon.norm2);
    for (const FlowSample& s : traj.samples) {
        if (!normalized) {
            double slack = prev - s.mon.norm2;  // >= 0 when monotone
            if (slack < ck.min_monotone_slack) ck.min_monotone_slack = slack;
            if (slack < -1e-6) ck.monotone_norm = false;
            prev = s.mon.norm2;
            if (s.t >= 1.0) {
                double excess = s.mon.norm2 - std::sqrt(6.0) / std::sqrt(s.t);
                ck.worst_decay_excess = std::max(ck.worst_decay_excess, excess);
                if (excess > 1e-8) ck.decay_bound = false;
            }
        } else {
            double drift = std::abs(std::sqrt(s.mon.norm2) - n0);
            ck.max_norm_drift = std::max(ck.max_norm_drift, drift);
            if (drift > 1e-6) ck.norm_drift_ok = false;
        }
    }
    return ck;
}

inline json to_json(const TrajectoryChecks& ck, bool normalized) {
    json j{{"monotone_norm", ck.monotone_norm},
           {"min_monotone_slack", ck.min_monotone_slack},
           {"decay_bound", ck.decay_bound},
           {"worst_decay_excess", ck.worst_decay_excess}};
    if (normalized) {
        j["norm_drift_ok"] = ck.norm_drift_ok;
        j["max_norm_drift"] = ck.max_norm_drift;
    }
    return j;
}

inline FlowOptions flow_options(const RunConfig& cfg) {
    FlowOptions opt;
    opt.integrator.rtol = cfg.rtol;
    opt.integrator.atol = cfg.atol;
    opt.grid_samples = cfg.grid_samples;
    opt.conv_tol = cfg.conv_tol;
    return opt;
}

inline int run_flow(const RunConfig& cfg, const std::filesystem::path& dir) {
    FlowOptions opt = flow_options(cfg);
    FlowTrajectory traj;
    if (cfg.formulation == "reduced") {
        TriBracket p0{cfg.a, cfg.b, cfg.c};
        if (cfg.bracket) {
            if (cfg.bracket->off_structure_max() > 1e-12)
                throw ConfigError("reduced formulation needs a bracket inside the reduced slice");
            p0 = cfg.bracket->tri_components();
        }
        traj = integrate_reduced(p0, cfg.t_end, opt);
    } else if (cfg.formulation == "metric") {
        BracketTensor mu0 = cfg.bracket ? *cfg.bracket : BracketTensor::embed({cfg.a, cfg.b, cfg.c});
        MetricSpec g0 = cfg.metric_gram ? MetricSpec(*cfg.metric_gram) : MetricSpec::identity();
        traj = integrate_metric(mu0, g0, cfg.t_end, opt);
    } else {
        BracketTensor mu0 = cfg.bracket ? *cfg.bracket : BracketTensor::embed({cfg.a, cfg.b, cfg.c});
        traj = integrate_full(mu0, cfg.t_end, opt, cfg.formulation == "full-gauged");
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_text(dir / "trajectory.csv", csv.str());

    TrajectoryChecks ck = check_trajectory(traj);
    json report{{"kind", flow_kind_name(traj.kind)},
                {"termination", traj.meta.termination},
                {"accepted_steps", traj.meta.accepted_steps},
                {"rejected_steps", traj.meta.rejected_steps},
                {"final_t", traj.samples.back().t},
                {"final_norm2", traj.samples.back().mon.norm2},
                {"checks", to_json(ck, false)}};
    write_text(dir / "report.json", report.dump(2) + "\n");
    std::cout << "flow: " << traj.samples.size() << " samples to t=" << cfg.t_end
              << ", final |mu|^2 = " << traj.samples.back().mon.norm2 << "\n";
    return (ck.monotone_norm && ck.decay_bound) ? kExitOk : kExitInvariant;
}

inline int run_normalized(const RunConfig& cfg, const std::filesystem::path& dir) {
    FlowOptions opt = flow_options(cfg);
    FlowTrajectory traj =
        integrate_normalized({cfg.a, cfg.b, cfg.c}, cfg.t_end, opt, cfg.rescale);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_text(dir / "trajectory.csv", csv.str());

    TrajectoryChecks ck = check_trajectory(traj);
    const FlowSample& last = traj.back();
    json report{{"kind", flow_kind_name(traj.kind)},
                {"termination", traj.meta.termination},
                {"accepted_steps", traj.meta.accepted_steps},
                {"final_t", last.t},
                {"final_state", {last.state[0], last.state[1], last.state[2]}},
                {"fixed_point_distance",
                 std::abs(last.state[0] - std::sqrt(2.0)) + std::abs(last.state[1]) +
                     std::abs(last.state[2] - std::sqrt(2.0))},
                {"checks", to_json(ck, true)}};
    write_text(dir / "report.json", report.dump(2) + "\n");
    std::cout << "normalized: termination=" << traj.meta.termination << " final (a,b,c)=("
              << last.state[0] << ", " << last.state[1] << ", " << last.state[2] << ")\n";
    return ck.norm_drift_ok ? kExitOk : kExitInvariant;
}

inline int run_soliton(const RunConfig& cfg, const std::filesystem::path& dir) {
    SolitonSearchRegion region{cfg.region_min, cfg.region_max, cfg.region_min, cfg.region_max};
    CertificationReport rep = solve_soliton(region, cfg.starts, cfg.seed);
    json jrep = to_json(rep);
    // dynamic verification of each root
    json dyn = json::array();
    for (const SolitonSolution& s : rep.solutions) {
        DynamicsReport d = verify_soliton_dynamics(s, 50.0, flow_options(cfg));
        dyn.push_back(json{{"a", s.a},
                           {"c", s.c},
                           {"max_ray_deviation", d.max_ray_deviation},
                           {"max_abs_b", d.max_abs_b},
                           {"ray_invariant", d.ray_invariant}});
    }
    jrep["dynamics"] = dyn;
    write_text(dir / "report.json", jrep.dump(2) + "\n");

    std::cout << "soliton certification\n"
              << "  starts " << rep.stats.starts << ", converged " << rep.stats.converged
              << ", distinct roots " << rep.stats.distinct_roots << "\n";
    for (const SolitonSolution& s : rep.solutions)
        std::cout << "  root: a=" << s.a << " c=" << s.c << " alpha=" << s.alpha
                  << " beta=" << s.beta << " lambda=" << s.lambda << " residual=" << s.residual
                  << "\n";
    std::cout << "  classification: " << rep.classification
              << " (derived lambda=" << rep.lambda_derived
              << ", published lambda=" << rep.lambda_published << ", consistent="
              << (rep.lambda_matches_published ? "yes" : "no") << ")\n";
    bool ok = rep.stats.distinct_roots == 1 && !rep.solutions.empty() &&
              rep.solutions.front().residual < 1e-12;
    return ok ? kExitOk : kExitInvariant;
}

inline int run_verify(const RunConfig& cfg, const std::filesystem::path& dir) {
    bool all_ok = false;
    json report = verification_report(cfg.grid, cfg.seed, all_ok);
    write_text(dir / "report.json", report.dump(2) + "\n");
    std::cout << "verify: " << report["grid_points"] << " grid points, max closed-form vs oracle "
              << "deviation " << report["closed_form_vs_oracle_max_dev"] << ", "
              << (all_ok ? "all checks passed" : "CHECKS FAILED") << "\n";
    return all_ok ? kExitOk : kExitInvariant;
}

inline int run_sweep(const RunConfig& cfg, const std::filesystem::path& dir) {
    Rng rng(cfg.seed);
    struct Row {
        TriBracket p0;
        double final_norm2 = 0.0;
        bool decay_ok = false;
        double min_slack = 0.0;
        std::size_t steps = 0;
    };
    std::vector<Row> rows(cfg.count);
    for (Row& r : rows) {
        TriBracket p{rng.uniform(0.05, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.05, 1.0)};
        double f = cfg.norm_max * rng.uniform01() / std::sqrt(p.norm_sq());
        r.p0 = {f * p.a, f * p.b, f * p.c};
    }
    FlowOptions opt = flow_options(cfg);
    auto work = [&](std::size_t i) {
        FlowTrajectory traj = integrate_reduced(rows[i].p0, cfg.t_end, opt);
        TrajectoryChecks ck = check_trajectory(traj);
        rows[i].final_norm2 = traj.back().mon.norm2;
        rows[i].decay_ok = ck.decay_bound;
        rows[i].min_slack = ck.min_monotone_slack;
        rows[i].steps = traj.meta.accepted_steps;
    };
    std::vector<std::future<void>> futs;
    for (std::size_t i = 0; i < rows.size(); ++i)
        futs.push_back(std::async(std::launch::async, work, i));
    for (auto& f : futs) f.get();

    std::ostringstream csv;
    csv << "index,a0,b0,c0,t_end,final_norm2,decay_ok,min_monotone_slack,steps\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        all_ok = all_ok && r.decay_ok && r.min_slack >= -1e-6;
        csv << i << ',' << fmt17(r.p0.a) << ',' << fmt17(r.p0.b) << ',' << fmt17(r.p0.c) << ','
            << fmt17(cfg.t_end) << ',' << fmt17(r.final_norm2) << ',' << (r.decay_ok ? 1 : 0)
            << ',' << fmt17(r.min_slack) << ',' << r.steps << '\n';
    }
    write_text(dir / "summary.csv", csv.str());
    std::cout << "sweep: " << rows.size() << " trajectories, decay bound "
              << (all_ok ? "satisfied" : "VIOLATED") << "\n";
    return all_ok ? kExitOk : kExitInvariant;
}

}  // namespace detail

inline int run(const RunConfig& cfg) {
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::filesystem::path dir = cfg.output_directory();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::cerr << "config error: cannot create output directory " << dir << "\n";
        return kExitConfig;
    }
    try {
        detail::write_text(dir / "config.echo.json", to_json(cfg).dump(2) + "\n");
        if (cfg.subcommand == "flow") return detail::run_flow(cfg, dir);
        if (cfg.subcommand == "normalized") return detail::run_normalized(cfg, dir);
        if (cfg.subcommand == "soliton") return detail::run_soliton(cfg, dir);
        if (cfg.subcommand == "verify") return detail::run_verify(cfg, dir);
        if (cfg.subcommand == "sweep") return detail::run_sweep(cfg, dir);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FlowError& e) {
        if (e.kind == FlowError::Kind::constraint_violation ||
            e.kind == FlowError::Kind::metric_degenerated) {
            std::cerr << "invariant violation: " << e.what() << "\n";
            return kExitInvariant;
        }
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace bachflow
