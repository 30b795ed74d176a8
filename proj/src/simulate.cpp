#include "smpstop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smpstop/rng.hpp"

namespace smpstop {

namespace {

Index draw_next_state(const Matrix& transition, Index from, Real u) {
    const Index n = transition.cols();
    Real cum = 0;
    Index last_positive = -1;
    for (Index j = 0; j < n; ++j) {
        const Real p = transition(from, j);
        if (p <= 0) continue;
        cum += p;
        last_positive = j;
        if (u < cum) return j;
    }
    // Row sums are validated to 1 up to rounding; land any residual mass on
    // the last reachable state.
    return last_positive;
}

struct Step {
    Index next;
    Real sojourn;
};

Step draw_epoch(const Model& model, Index from, RandomStream& stream) {
    const Real u_state = stream.next_uniform();
    const Real u_time = stream.next_uniform();
    const Index next = draw_next_state(model.kernel.transition, from, u_state);
    const SojournDistribution& dist = model.kernel.mode == SojournMode::per_state
                                          ? model.kernel.sojourn(from)
                                          : model.kernel.sojourn(from, next);
    return Step{next, sojourn_quantile(dist, u_time)};
}

Real discount_increment(Real beta, Real from_time, Real to_time) {
    return (std::exp(-beta * from_time) - std::exp(-beta * to_time)) / beta;
}

}  // namespace

Real default_horizon(const Model& model, Real bias_tol) {
    if (bias_tol <= 0) throw ValidationError("bias tolerance must be positive");
    const Real c_max = model.cost_rate.size() > 0 ? model.cost_rate.maxCoeff() : 0.0;
    if (c_max <= 0) return 1.0 / model.beta;
    return std::log(c_max / (model.beta * bias_tol)) / model.beta + 1.0;
}

Trajectory sample_trajectory(const Model& model, Index start, const StoppingRule& rule,
                             Real horizon, std::uint64_t seed, std::uint64_t replication) {
    validate_model(model);
    if (start < 0 || start >= model.num_states())
        throw ValidationError("start state out of range");
    if (!(horizon > 0)) throw ValidationError("horizon must be positive");

    RandomStream stream(seed, replication);
    const Real beta = model.beta;

    Trajectory traj;
    traj.path.states.push_back(start);
    Real clock = 0;
    Real cost = 0;
    long epoch = 0;
    while (true) {
        if (rule_fires_now(rule, traj.path)) {
            cost += model.terminal_cost(traj.path.states.back()) * std::exp(-beta * clock);
            traj.stop_epoch = epoch;
            break;
        }
        const Step step = draw_epoch(model, traj.path.states.back(), stream);
        const Real next_clock = clock + step.sojourn;
        if (next_clock > horizon) {
            cost += model.cost_rate(traj.path.states.back()) *
                    discount_increment(beta, clock, horizon);
            traj.truncated_at = horizon;
            traj.horizon_warning = epoch == 0;
            break;
        }
        cost += model.cost_rate(traj.path.states.back()) *
                discount_increment(beta, clock, next_clock);
        traj.path.sojourns.push_back(step.sojourn);
        traj.path.states.push_back(step.next);
        clock = next_clock;
        ++epoch;
    }
    traj.discounted_cost = cost;
    return traj;
}

SmpPath sample_path_prefix(const Model& model, Index start, long epochs, std::uint64_t seed,
                           std::uint64_t replication) {
    validate_model(model);
    if (start < 0 || start >= model.num_states())
        throw ValidationError("start state out of range");
    if (epochs < 0) throw ValidationError("epoch count must be nonnegative");

    RandomStream stream(seed, replication);
    SmpPath path;
    path.states.push_back(start);
    for (long k = 0; k < epochs; ++k) {
        const Step step = draw_epoch(model, path.states.back(), stream);
        path.sojourns.push_back(step.sojourn);
        path.states.push_back(step.next);
    }
    return path;
}

EstimatorReport estimate_value(const Model& model, Index start, const StoppingRule& rule,
                               long replications, Real horizon, std::uint64_t seed) {
    if (replications < 2)
        throw ValidationError("at least two replications are needed for a standard error");

    EstimatorReport report;
    report.replications = replications;
    const Real c_max = model.cost_rate.size() > 0 ? model.cost_rate.maxCoeff() : 0.0;
    report.truncation_bias_bound = std::exp(-model.beta * horizon) * c_max / model.beta;

    Real mean = 0;
    Real m2 = 0;
    for (long r = 0; r < replications; ++r) {
        const Trajectory traj =
            sample_trajectory(model, start, rule, horizon, seed, static_cast<std::uint64_t>(r));
        if (traj.truncated_at) ++report.truncated_paths;
        const Real x = traj.discounted_cost;
        const Real delta = x - mean;
        mean += delta / static_cast<Real>(r + 1);
        m2 += delta * (x - mean);
    }
    report.mean = mean;
    report.std_error = std::sqrt(m2 / static_cast<Real>(replications - 1) /
                                 static_cast<Real>(replications));
    return report;
}

EstimatorReport simulate_smdp_policy(const Smdp& smdp, Index start, const Policy& policy,
                                     long replications, Real horizon, std::uint64_t seed) {
    if (replications < 2)
        throw ValidationError("at least two replications are needed for a standard error");
    if (!policy.decide) throw ValidationError("policy has no decision function");
    const Index n = smdp.base.num_states();
    if (start < 0 || start >= n) throw ValidationError("start state out of range");
    if (!(horizon > 0)) throw ValidationError("horizon must be positive");

    const Real beta = smdp.base.beta;
    const Real survival = smdp.unit_survival();

    EstimatorReport report;
    report.replications = replications;
    const Real c_max = smdp.base.cost_rate.size() > 0 ? smdp.base.cost_rate.maxCoeff() : 0.0;
    const Real rate_max = std::max(c_max, smdp.stop_cost.head(n).maxCoeff());
    report.truncation_bias_bound = std::exp(-beta * horizon) * rate_max / beta;

    Real mean = 0;
    Real m2 = 0;
    for (long r = 0; r < replications; ++r) {
        RandomStream stream(seed, static_cast<std::uint64_t>(r));
        SmdpHistory history;
        history.states.push_back(start);
        Real clock = 0;
        Real cost = 0;
        bool truncated = false;
        while (true) {
            const Index state = history.states.back();
            if (state == smdp.delta()) break;
            const int action = policy.decide(history);
            if (action == 1) {
                if (clock + 1.0 > horizon) {
                    cost += smdp.stop_cost(state) *
                            discount_increment(beta, clock, horizon);
                    truncated = true;
                    break;
                }
                cost += smdp.stop_cost(state) * std::exp(-beta * clock) * survival;
                history.actions.push_back(1);
                history.sojourns.push_back(1.0);
                history.states.push_back(smdp.delta());
                clock += 1.0;
                continue;
            }
            const Step step = draw_epoch(smdp.base, state, stream);
            const Real next_clock = clock + step.sojourn;
            if (next_clock > horizon) {
                cost += smdp.base.cost_rate(state) *
                        discount_increment(beta, clock, horizon);
                truncated = true;
                break;
            }
            cost += smdp.base.cost_rate(state) *
                    discount_increment(beta, clock, next_clock);
            history.actions.push_back(0);
            history.sojourns.push_back(step.sojourn);
            history.states.push_back(step.next);
            clock = next_clock;
        }
        if (truncated) ++report.truncated_paths;
        const Real delta = cost - mean;
        mean += delta / static_cast<Real>(r + 1);
        m2 += delta * (cost - mean);
    }
    report.mean = mean;
    report.std_error = std::sqrt(m2 / static_cast<Real>(replications - 1) /
                                 static_cast<Real>(replications));
    return report;
}

}  // namespace smpstop
