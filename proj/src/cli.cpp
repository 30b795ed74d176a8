#include "smpstop/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "smpstop/simulate.hpp"

namespace smpstop::cli {
namespace {

using nlohmann::json;

struct WallClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// FNV-1a over the canonical (sorted-key, compact) JSON dump, so formatting
// and key order in the file do not affect the digest.
std::string model_digest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("model file is not valid JSON: " + std::string(e.what()));
    }
    const std::string canonical = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

struct Loaded {
    Model model;
    std::string digest;
};

Loaded load(const std::string& path) {
    Loaded loaded;
    loaded.digest = model_digest(path);
    loaded.model = load_model(path);
    return loaded;
}

const std::string& state_name(const Model& model, Index i) {
    return model.states[static_cast<std::size_t>(i)];
}

std::string set_text(const Model& model, const StateSet& set) {
    std::string out = "{";
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (k > 0) out += ", ";
        out += state_name(model, set[k]);
    }
    return out + "}";
}

json set_names(const Model& model, const StateSet& set) {
    json arr = json::array();
    for (Index i : set) arr.push_back(state_name(model, i));
    return arr;
}

json to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json witness_json(const RegularityWitness& w) {
    return {{"delta", w.delta},
            {"epsilon_reg", w.epsilon_reg},
            {"delta_star", w.delta_star},
            {"gamma", w.gamma}};
}

std::string num(Real x, int precision = 10) {
    std::ostringstream s;
    s << std::setprecision(precision) << x;
    return s.str();
}

void kv(const std::string& label, const std::string& value) {
    std::cout << std::left << std::setw(22) << label << value << "\n";
}

void print_common(const std::string& subcommand, const std::string& model_path,
                  const std::string& digest) {
    kv("subcommand", subcommand);
    kv("model", model_path);
    kv("digest", digest);
}

std::string witness_text(const RegularityWitness& w) {
    return "delta=" + num(w.delta, 6) + " epsilon=" + num(w.epsilon_reg, 6) +
           " gamma=" + num(w.gamma, 8);
}

StoppingRule parse_rule(const Model& model, const std::string& text) {
    const std::string hitting = "hitting:";
    const std::string first = "first:";
    if (text.rfind(hitting, 0) == 0) {
        StateSet states;
        std::stringstream rest(text.substr(hitting.size()));
        std::string name;
        while (std::getline(rest, name, ','))
            if (!name.empty()) states.push_back(model.state_index(name));
        std::sort(states.begin(), states.end());
        states.erase(std::unique(states.begin(), states.end()), states.end());
        return HittingSet{std::move(states)};
    }
    if (text.rfind(first, 0) == 0) {
        const std::string rest = text.substr(first.size());
        long epoch = 0;
        std::size_t consumed = 0;
        try {
            epoch = std::stol(rest, &consumed);
        } catch (const std::exception&) {
            throw ValidationError("rule epoch is not an integer: " + rest);
        }
        if (consumed != rest.size())
            throw ValidationError("rule epoch is not an integer: " + rest);
        if (epoch < 0) throw ValidationError("rule epoch must be nonnegative");
        return FirstEpoch{epoch};
    }
    throw ValidationError("rule must be hitting:<state,...> or first:<epoch>");
}

struct QuadOpts {
    Real tol = 1e-9;
    int max_refine = 20;

    QuadratureConfig config() const {
        QuadratureConfig quad;
        quad.tol = tol;
        quad.max_refine = max_refine;
        return quad;
    }
};

void add_quad_options(CLI::App* cmd, QuadOpts& opts) {
    cmd->add_option("--quad-tol", opts.tol, "moment identity residual target")
        ->capture_default_str();
    cmd->add_option("--quad-max-refine", opts.max_refine,
                    "dyadic refinement ceiling per smooth segment")
        ->capture_default_str();
}

void emit_json(const json& report) { std::cout << report.dump(2) << "\n"; }

struct SolveOpts {
    std::string model_path;
    Real tol = 1e-10;
    long max_iters = 1000000;
    std::string trace_path;
    QuadOpts quad;
    bool as_json = false;
};

int run_solve(const SolveOpts& opt) {
    WallClock clock;
    const Loaded loaded = load(opt.model_path);
    const Model& model = loaded.model;
    const RegularityWitness witness = find_regularity_witness(model);
    const DiscountedMoments moments = compute_moments(model, opt.quad.config());

    std::ofstream trace;
    IterationTrace callback;
    if (!opt.trace_path.empty()) {
        trace.open(opt.trace_path);
        if (!trace) throw ValidationError("cannot open trace file: " + opt.trace_path);
        trace << std::setprecision(17) << "iteration,sup_diff,error_bound\n";
        callback = [&trace](long iteration, Real sup_diff, Real error_bound) {
            trace << iteration << "," << sup_diff << "," << error_bound << "\n";
        };
    }

    IterationControl control;
    control.tol = opt.tol;
    control.max_iters = opt.max_iters;
    const ValueFunction value = value_iterate(model, moments, control, callback);

    json report;
    report["subcommand"] = "solve";
    report["model"] = opt.model_path;
    report["digest"] = loaded.digest;
    report["seed"] = nullptr;
    report["parameters"] = {{"tol", opt.tol},
                            {"max_iters", opt.max_iters},
                            {"quad_tol", opt.quad.tol},
                            {"quad_max_refine", opt.quad.max_refine}};
    report["results"] = {{"states", model.states},
                         {"values", to_json(value.values)},
                         {"iterations", value.iterations},
                         {"sup_diff", value.sup_diff},
                         {"error_bound", value.error_bound},
                         {"converged", value.converged},
                         {"gamma_tight", moments.gamma_tight},
                         {"witness", witness_json(witness)}};
    report["artifacts"] =
        opt.trace_path.empty() ? json::array() : json::array({opt.trace_path});
    report["wall_clock_seconds"] = clock.seconds();

    if (opt.as_json) {
        emit_json(report);
    } else {
        print_common("solve", opt.model_path, loaded.digest);
        kv("witness", witness_text(witness));
        kv("gamma_tight", num(moments.gamma_tight));
        kv("iterations", std::to_string(value.iterations));
        kv("sup_diff", num(value.sup_diff, 3));
        kv("error_bound", num(value.error_bound, 3));
        kv("converged", value.converged ? "yes" : "no");
        if (!opt.trace_path.empty()) kv("trace", opt.trace_path);
        kv("wall_clock", num(clock.seconds(), 3) + " s");
        std::cout << "\n" << std::left << std::setw(22) << "state" << "value\n";
        for (Index i = 0; i < model.num_states(); ++i)
            std::cout << std::left << std::setw(22) << state_name(model, i)
                      << num(value.values(i)) << "\n";
    }
    if (!value.converged) {
        std::cerr << "numerical error: value iteration hit max_iters before reaching tol\n";
        return 2;
    }
    return 0;
}

struct CertifyOpts {
    std::string model_path;
    Real epsilon = 1e-8;
    Real eq_tol = 1e-9;
    Real tol = 1e-10;
    long max_iters = 1000000;
    bool require_optimal = false;
    QuadOpts quad;
    bool as_json = false;
};

int run_certify(const CertifyOpts& opt) {
    WallClock clock;
    const Loaded loaded = load(opt.model_path);
    const Model& model = loaded.model;
    const RegularityWitness witness = find_regularity_witness(model);
    const DiscountedMoments moments = compute_moments(model, opt.quad.config());

    IterationControl control;
    control.tol = opt.tol;
    control.max_iters = opt.max_iters;
    const ValueFunction value = value_iterate(model, moments, control);
    const Vector continuation = continuation_values(model, moments, value.values);
    const StoppingCertificate cert =
        extract_stop_set(model, moments, value, witness, opt.eq_tol, opt.epsilon);

    // The budget evaluates 1-gamma as epsilon_reg*(1-exp(-beta*delta_star)).
    // A shorter closed form floor((log(epsilon*(epsilon_reg -
    // exp(-beta*delta_star))) - log(C))/log(gamma)) is reported alongside it,
    // but only when its inner difference is positive; for fast-jumping
    // kernels it is negative and the expression is undefined.
    const Real budget_term = witness.epsilon_reg - std::exp(-model.beta * witness.delta_star);
    const Real budget_const =
        model.cost_rate.maxCoeff() / model.beta + model.terminal_cost.maxCoeff() + 1;
    json budget_log_form;
    std::string budget_note;
    if (budget_term > 0) {
        const Real ratio = (std::log(opt.epsilon * budget_term) - std::log(budget_const)) /
                           std::log(witness.gamma);
        budget_log_form = static_cast<long>(std::max(0.0, std::floor(ratio)));
        budget_note = "log-form budget defined: epsilon_reg - exp(-beta*delta_star) = " +
                      num(budget_term, 6);
    } else {
        budget_log_form = nullptr;
        budget_note = "log-form budget undefined: epsilon_reg - exp(-beta*delta_star) = " +
                      num(budget_term, 6) +
                      " <= 0; 1-gamma is evaluated as epsilon_reg*(1-exp(-beta*delta_star))"
                      " instead";
    }

    json report;
    report["subcommand"] = "certify";
    report["model"] = opt.model_path;
    report["digest"] = loaded.digest;
    report["seed"] = nullptr;
    report["parameters"] = {{"epsilon", opt.epsilon},
                            {"eq_tol", opt.eq_tol},
                            {"tol", opt.tol},
                            {"max_iters", opt.max_iters},
                            {"require_optimal", opt.require_optimal},
                            {"quad_tol", opt.quad.tol},
                            {"quad_max_refine", opt.quad.max_refine}};
    report["results"] = {{"states", model.states},
                         {"values", to_json(value.values)},
                         {"continuation_values", to_json(continuation)},
                         {"terminal_cost", to_json(model.terminal_cost)},
                         {"iterations", value.iterations},
                         {"converged", value.converged},
                         {"stop_set", set_names(model, cert.stop_set)},
                         {"margin", cert.margin},
                         {"iteration_budget", cert.iteration_budget},
                         {"iteration_budget_log_form", budget_log_form},
                         {"budget_note", budget_note},
                         {"certified_optimal", cert.certified_optimal},
                         {"witness", witness_json(witness)}};
    report["artifacts"] = json::array();
    report["wall_clock_seconds"] = clock.seconds();

    if (opt.as_json) {
        emit_json(report);
    } else {
        print_common("certify", opt.model_path, loaded.digest);
        kv("witness", witness_text(witness));
        kv("iterations", std::to_string(value.iterations));
        kv("converged", value.converged ? "yes" : "no");
        kv("stop_set", set_text(model, cert.stop_set));
        kv("margin", num(cert.margin));
        kv("iteration_budget", std::to_string(cert.iteration_budget));
        if (budget_log_form.is_null())
            kv("budget_note", budget_note);
        else
            kv("budget_log_form", budget_log_form.dump() + " (" + budget_note + ")");
        kv("certified_optimal", cert.certified_optimal ? "yes" : "no");
        kv("wall_clock", num(clock.seconds(), 3) + " s");
        std::cout << "\n"
                  << std::left << std::setw(22) << "state" << std::setw(18) << "value"
                  << std::setw(18) << "stop_cost" << std::setw(18) << "continuation"
                  << "stops\n";
        for (Index i = 0; i < model.num_states(); ++i) {
            const bool stops = std::find(cert.stop_set.begin(), cert.stop_set.end(), i) !=
                               cert.stop_set.end();
            std::cout << std::left << std::setw(22) << state_name(model, i) << std::setw(18)
                      << num(value.values(i)) << std::setw(18)
                      << num(model.terminal_cost(i)) << std::setw(18)
                      << num(continuation(i)) << (stops ? "yes" : "no") << "\n";
        }
    }
    if (!value.converged) {
        std::cerr << "numerical error: value iteration hit max_iters before reaching tol\n";
        return 2;
    }
    if (opt.require_optimal && !cert.certified_optimal) {
        std::cerr << "certification not achieved: margin " << num(cert.margin, 6)
                  << " does not exceed epsilon " << num(opt.epsilon, 6) << "\n";
        return 3;
    }
    return 0;
}

struct OracleOpts {
    std::string model_path;
    Real tol = 1e-12;
    Real match_tol = 1e-8;
    QuadOpts quad;
    bool as_json = false;
};

int run_oracle(const OracleOpts& opt) {
    WallClock clock;
    const Loaded loaded = load(opt.model_path);
    const Model& model = loaded.model;
    const DiscountedMoments moments = compute_moments(model, opt.quad.config());

    IterationControl control;
    control.tol = opt.tol;
    const ValueFunction value = value_iterate(model, moments, control);
    const BruteForceResult oracle = brute_force_optimum(model, moments);
    const Real max_abs_diff = (value.values - oracle.values).cwiseAbs().maxCoeff();
    const bool agrees = max_abs_diff <= opt.match_tol;

    json report;
    report["subcommand"] = "oracle";
    report["model"] = opt.model_path;
    report["digest"] = loaded.digest;
    report["seed"] = nullptr;
    report["parameters"] = {{"tol", opt.tol},
                            {"match_tol", opt.match_tol},
                            {"quad_tol", opt.quad.tol},
                            {"quad_max_refine", opt.quad.max_refine}};
    report["results"] = {{"states", model.states},
                         {"solver_values", to_json(value.values)},
                         {"oracle_values", to_json(oracle.values)},
                         {"best_set", set_names(model, oracle.best_set)},
                         {"max_abs_diff", max_abs_diff},
                         {"agrees", agrees},
                         {"converged", value.converged}};
    report["artifacts"] = json::array();
    report["wall_clock_seconds"] = clock.seconds();

    if (opt.as_json) {
        emit_json(report);
    } else {
        print_common("oracle", opt.model_path, loaded.digest);
        kv("best_set", set_text(model, oracle.best_set));
        kv("max_abs_diff", num(max_abs_diff, 3));
        kv("agrees", agrees ? "yes" : "no");
        kv("wall_clock", num(clock.seconds(), 3) + " s");
        std::cout << "\n"
                  << std::left << std::setw(22) << "state" << std::setw(18) << "solver"
                  << "exhaustive\n";
        for (Index i = 0; i < model.num_states(); ++i)
            std::cout << std::left << std::setw(22) << state_name(model, i) << std::setw(18)
                      << num(value.values(i)) << num(oracle.values(i)) << "\n";
    }
    if (!value.converged) {
        std::cerr << "numerical error: value iteration hit max_iters before reaching tol\n";
        return 2;
    }
    if (!agrees) {
        std::cerr << "numerical error: solver and exhaustive oracle disagree by "
                  << num(max_abs_diff, 6) << " (allowed " << num(opt.match_tol, 6) << ")\n";
        return 2;
    }
    return 0;
}

struct SimulateOpts {
    std::string model_path;
    std::string start;
    std::string rule_text;
    long reps = 10000;
    Real horizon = 0;  // 0 picks the horizon from the bias tolerance
    Real bias_tol = 1e-6;
    std::uint64_t seed = 1;
    std::string csv_path;
    bool as_json = false;
};

int run_simulate(const SimulateOpts& opt) {
    WallClock clock;
    const Loaded loaded = load(opt.model_path);
    const Model& model = loaded.model;
    const Index start = model.state_index(opt.start);
    const StoppingRule rule = parse_rule(model, opt.rule_text);
    const bool auto_horizon = !(opt.horizon > 0);
    const Real horizon = auto_horizon ? default_horizon(model, opt.bias_tol) : opt.horizon;

    const EstimatorReport est =
        estimate_value(model, start, rule, opt.reps, horizon, opt.seed);

    if (!opt.csv_path.empty()) {
        std::ofstream csv(opt.csv_path);
        if (!csv) throw ValidationError("cannot open csv file: " + opt.csv_path);
        csv << std::setprecision(17)
            << "replication,discounted_cost,epochs,stop_epoch,truncated\n";
        for (long r = 0; r < opt.reps; ++r) {
            const Trajectory traj = sample_trajectory(model, start, rule, horizon, opt.seed,
                                                      static_cast<std::uint64_t>(r));
            csv << r << "," << traj.discounted_cost << "," << traj.path.epochs() << ",";
            if (traj.stop_epoch) csv << *traj.stop_epoch;
            csv << "," << (traj.truncated_at ? 1 : 0) << "\n";
        }
    }

    json report;
    report["subcommand"] = "simulate";
    report["model"] = opt.model_path;
    report["digest"] = loaded.digest;
    report["seed"] = opt.seed;
    report["parameters"] = {{"start", opt.start},
                            {"rule", opt.rule_text},
                            {"reps", opt.reps},
                            {"horizon", horizon},
                            {"horizon_auto", auto_horizon},
                            {"bias_tol", opt.bias_tol}};
    report["results"] = {{"mean", est.mean},
                         {"std_error", est.std_error},
                         {"truncation_bias_bound", est.truncation_bias_bound},
                         {"truncated_paths", est.truncated_paths},
                         {"replications", est.replications}};
    report["artifacts"] = opt.csv_path.empty() ? json::array() : json::array({opt.csv_path});
    report["wall_clock_seconds"] = clock.seconds();

    if (opt.as_json) {
        emit_json(report);
    } else {
        print_common("simulate", opt.model_path, loaded.digest);
        kv("start", opt.start);
        kv("rule", opt.rule_text);
        kv("seed", std::to_string(opt.seed));
        kv("replications", std::to_string(est.replications));
        kv("horizon", num(horizon, 6) + (auto_horizon ? " (auto)" : ""));
        kv("mean", num(est.mean));
        kv("std_error", num(est.std_error, 4));
        kv("bias_bound", num(est.truncation_bias_bound, 3));
        kv("truncated_paths", std::to_string(est.truncated_paths));
        if (!opt.csv_path.empty()) kv("csv", opt.csv_path);
        kv("wall_clock", num(clock.seconds(), 3) + " s");
    }
    return 0;
}

struct CheckOpts {
    std::string model_path;
    long paths = 200;
    long len = 12;
    std::uint64_t seed = 1;
    long n_max = 50;
    QuadOpts quad;
    bool as_json = false;
};

int run_check_equivalence(const CheckOpts& opt) {
    WallClock clock;
    const Loaded loaded = load(opt.model_path);
    const Model& model = loaded.model;
    const Index n = model.num_states();
    const RegularityWitness witness = find_regularity_witness(model);
    const DiscountedMoments moments = compute_moments(model, opt.quad.config());
    const Smdp smdp = build_smdp(model);

    // Finite-horizon values of the control model against the stopping
    // operator iterates, entry by entry.
    const std::vector<Vector> u_iterates = smdp_value_iterate(smdp, moments, opt.n_max);
    Vector v = Vector::Zero(n);
    Real max_value_diff = 0;
    Real max_delta_value = 0;
    for (std::size_t k = 0; k < u_iterates.size(); ++k) {
        if (k > 0) v = bellman_apply(model, moments, v);
        max_value_diff =
            std::max(max_value_diff, (u_iterates[k].head(n) - v).cwiseAbs().maxCoeff());
        max_delta_value = std::max(max_delta_value, std::abs(u_iterates[k](n)));
    }
    const Real value_tol = 1e-12 * (1 + model.terminal_cost.maxCoeff());
    const bool values_agree = max_value_diff <= value_tol && max_delta_value == 0;

    // Round trips on sampled prefixes for three rule shapes: the certified
    // stopping region, a fixed epoch, and a history-dependent deadline.
    IterationControl control;
    control.tol = 1e-12;
    const ValueFunction value = value_iterate(model, moments, control);
    const StoppingCertificate cert = extract_stop_set(model, moments, value, witness);

    std::vector<SmpPath> paths;
    paths.reserve(static_cast<std::size_t>(opt.paths));
    for (long p = 0; p < opt.paths; ++p)
        paths.push_back(sample_path_prefix(model, static_cast<Index>(p % n), opt.len, opt.seed,
                                           static_cast<std::uint64_t>(p)));

    struct NamedRule {
        std::string name;
        StoppingRule rule;
    };
    std::vector<NamedRule> rules;
    rules.push_back({"hitting " + set_text(model, cert.stop_set), HittingSet{cert.stop_set}});
    rules.push_back(
        {"first epoch " + std::to_string(opt.len / 2), FirstEpoch{opt.len / 2}});
    rules.push_back({"elapsed time > 1", Predicate{[](const SmpPath& prefix) {
                         Real total = 0;
                         for (Real t : prefix.sojourns) total += t;
                         return total > 1.0;
                     }}});

    bool trips_ok = true;
    json trips = json::array();
    std::vector<std::string> trip_lines;
    for (const NamedRule& named : rules) {
        const RoundTripReport trip = round_trip_check(named.rule, paths);
        trips_ok = trips_ok && trip.ok;
        trips.push_back(
            {{"rule", named.name}, {"ok", trip.ok}, {"paths", trip.paths_checked}});
        trip_lines.push_back(named.name + ": " + (trip.ok ? "ok" : "FAILED") + " (" +
                             std::to_string(trip.paths_checked) + " paths)");
    }

    json report;
    report["subcommand"] = "check-equivalence";
    report["model"] = opt.model_path;
    report["digest"] = loaded.digest;
    report["seed"] = opt.seed;
    report["parameters"] = {{"paths", opt.paths},
                            {"len", opt.len},
                            {"n_max", opt.n_max},
                            {"quad_tol", opt.quad.tol},
                            {"quad_max_refine", opt.quad.max_refine}};
    report["results"] = {{"max_value_diff", max_value_diff},
                         {"value_tol", value_tol},
                         {"max_delta_value", max_delta_value},
                         {"values_agree", values_agree},
                         {"stop_set", set_names(model, cert.stop_set)},
                         {"round_trips", trips},
                         {"round_trips_ok", trips_ok}};
    report["artifacts"] = json::array();
    report["wall_clock_seconds"] = clock.seconds();

    if (opt.as_json) {
        emit_json(report);
    } else {
        print_common("check-equivalence", opt.model_path, loaded.digest);
        kv("seed", std::to_string(opt.seed));
        kv("horizons", "0.." + std::to_string(opt.n_max));
        kv("max_value_diff", num(max_value_diff, 3) + " (allowed " + num(value_tol, 3) + ")");
        kv("max_delta_value", num(max_delta_value, 3));
        kv("values_agree", values_agree ? "yes" : "no");
        for (const std::string& line : trip_lines) kv("round_trip", line);
        kv("wall_clock", num(clock.seconds(), 3) + " s");
    }
    if (!values_agree) {
        std::cerr << "numerical error: control-model values deviate from the stopping "
                     "iterates by "
                  << num(max_value_diff, 6) << " (allowed " << num(value_tol, 6) << ")\n";
        return 2;
    }
    if (!trips_ok) {
        std::cerr << "numerical error: a policy round trip changed a stopping epoch\n";
        return 2;
    }
    return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
    CLI::App app{"discounted optimal stopping on semi-Markov processes"};
    app.require_subcommand(1);

    SolveOpts solve_opts;
    CLI::App* solve = app.add_subcommand("solve", "compute the optimal value function");
    solve->add_option("model", solve_opts.model_path, "model JSON file")->required();
    solve->add_option("--tol", solve_opts.tol, "sup-norm convergence tolerance")
        ->capture_default_str();
    solve->add_option("--max-iters", solve_opts.max_iters, "iteration cap")
        ->capture_default_str();
    solve->add_option("--trace", solve_opts.trace_path,
                      "write a per-iteration CSV (iteration,sup_diff,error_bound)");
    add_quad_options(solve, solve_opts.quad);
    solve->add_flag("--json", solve_opts.as_json, "emit a JSON report");

    CertifyOpts certify_opts;
    CLI::App* certify =
        app.add_subcommand("certify", "extract and certify the optimal stopping set");
    certify->add_option("model", certify_opts.model_path, "model JSON file")->required();
    certify->add_option("--epsilon", certify_opts.epsilon, "optimality slack to certify")
        ->capture_default_str();
    certify->add_option("--eq-tol", certify_opts.eq_tol, "stop-set membership tolerance")
        ->capture_default_str();
    certify->add_option("--tol", certify_opts.tol, "sup-norm convergence tolerance")
        ->capture_default_str();
    certify->add_option("--max-iters", certify_opts.max_iters, "iteration cap")
        ->capture_default_str();
    certify->add_flag("--require-optimal", certify_opts.require_optimal,
                      "exit 3 unless the margin certifies exact optimality");
    add_quad_options(certify, certify_opts.quad);
    certify->add_flag("--json", certify_opts.as_json, "emit a JSON report");

    OracleOpts oracle_opts;
    CLI::App* oracle = app.add_subcommand(
        "oracle", "cross-check the solver against exhaustive hitting-rule enumeration");
    oracle->add_option("model", oracle_opts.model_path, "model JSON file")->required();
    oracle->add_option("--tol", oracle_opts.tol, "sup-norm convergence tolerance")
        ->capture_default_str();
    oracle->add_option("--match-tol", oracle_opts.match_tol,
                       "allowed deviation between solver and oracle")
        ->capture_default_str();
    add_quad_options(oracle, oracle_opts.quad);
    oracle->add_flag("--json", oracle_opts.as_json, "emit a JSON report");

    SimulateOpts simulate_opts;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo value of a stopping rule");
    simulate->add_option("model", simulate_opts.model_path, "model JSON file")->required();
    simulate->add_option("--start", simulate_opts.start, "start state name")->required();
    simulate
        ->add_option("--rule", simulate_opts.rule_text,
                     "stopping rule: hitting:<state,...> or first:<epoch>")
        ->required();
    simulate->add_option("--reps", simulate_opts.reps, "number of replications")
        ->capture_default_str();
    simulate
        ->add_option("--horizon", simulate_opts.horizon,
                     "truncation horizon (0 picks one from --bias-tol)")
        ->capture_default_str();
    simulate->add_option("--bias-tol", simulate_opts.bias_tol,
                         "truncation bias target for the automatic horizon")
        ->capture_default_str();
    simulate->add_option("--seed", simulate_opts.seed, "master seed")->capture_default_str();
    simulate->add_option("--csv", simulate_opts.csv_path, "write per-replication CSV");
    simulate->add_flag("--json", simulate_opts.as_json, "emit a JSON report");

    CheckOpts check_opts;
    CLI::App* check = app.add_subcommand(
        "check-equivalence",
        "compare the control reformulation against the stopping problem");
    check->add_option("model", check_opts.model_path, "model JSON file")->required();
    check->add_option("--paths", check_opts.paths, "sampled prefixes per round trip")
        ->capture_default_str();
    check->add_option("--len", check_opts.len, "epochs per sampled prefix")
        ->capture_default_str();
    check->add_option("--seed", check_opts.seed, "master seed")->capture_default_str();
    check->add_option("--n-max", check_opts.n_max, "finite horizons to compare")
        ->capture_default_str();
    add_quad_options(check, check_opts.quad);
    check->add_flag("--json", check_opts.as_json, "emit a JSON report");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return run_solve(solve_opts);
        if (certify->parsed()) return run_certify(certify_opts);
        if (oracle->parsed()) return run_oracle(oracle_opts);
        if (simulate->parsed()) return run_simulate(simulate_opts);
        if (check->parsed()) return run_check_equivalence(check_opts);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace smpstop::cli
