#include "smpstop/equivalence.hpp"

#include <cmath>
#include <string>

namespace smpstop {

namespace {

void validate_history(const SmdpHistory& history) {
    if (history.states.empty() || history.actions.size() + 1 != history.states.size() ||
        history.sojourns.size() != history.actions.size())
        throw ValidationError(
            "controlled history must alternate state, action, sojourn, state");
    for (int a : history.actions)
        if (a != 0 && a != 1) throw ValidationError("history actions must be 0 or 1");
    for (Real t : history.sojourns)
        if (!std::isfinite(t) || t < 0)
            throw ValidationError("history sojourns must be nonnegative");
}

}  // namespace

Real Smdp::unit_survival() const { return -std::expm1(-base.beta) / base.beta; }

Real Smdp::unit_transform() const { return std::exp(-base.beta); }

Smdp build_smdp(const Model& model) {
    validate_model(model);
    const Index n = model.num_states();
    Smdp smdp;
    smdp.base = model;
    smdp.stop_cost = Vector::Zero(n + 1);
    smdp.stop_cost.head(n) = model.terminal_cost * (model.beta / (-std::expm1(-model.beta)));
    return smdp;
}

std::vector<Vector> smdp_value_iterate(const Smdp& smdp, const DiscountedMoments& moments,
                                       long n_max) {
    if (n_max < 0) throw ValidationError("horizon n_max must be nonnegative");
    const Index n = smdp.base.num_states();
    const Real survival = smdp.unit_survival();
    const Real transform = smdp.unit_transform();

    std::vector<Vector> iterates;
    iterates.reserve(static_cast<std::size_t>(n_max) + 1);
    iterates.push_back(Vector::Zero(n + 1));
    for (long k = 1; k <= n_max; ++k) {
        // Both branches priced literally from the control model: action 0 is
        // the one-step continuation, action 1 pays the stop rate over a unit
        // sojourn and lands at delta.
        const Vector& prev = iterates.back();
        const Vector prev_s = prev.head(n);
        const Vector continue_branch = continuation_values(smdp.base, moments, prev_s);
        const Vector stop_branch =
            smdp.stop_cost.head(n) * survival + Vector::Constant(n, transform * prev(n));
        Vector next(n + 1);
        next.head(n) = continue_branch.cwiseMin(stop_branch);
        next(n) = smdp.stop_cost(n) * survival + transform * prev(n);
        iterates.push_back(std::move(next));
    }
    return iterates;
}

SmdpHistory embed_history(const SmpPath& path) {
    if (path.states.empty() || path.sojourns.size() + 1 != path.states.size())
        throw ValidationError("a history prefix must alternate state, sojourn, state");
    SmdpHistory history;
    history.states = path.states;
    history.sojourns = path.sojourns;
    history.actions.assign(path.sojourns.size(), 0);
    return history;
}

Policy as_policy(const Smdp& smdp, const StationaryPolicy& stationary) {
    if (static_cast<Index>(stationary.actions.size()) != smdp.num_states())
        throw ValidationError("stationary policy must list one action per state plus delta");
    for (int a : stationary.actions)
        if (a != 0 && a != 1) throw ValidationError("policy actions must be 0 or 1");
    if (stationary.actions.back() != 1)
        throw ValidationError("the absorbing state admits only action 1");

    const std::vector<int> actions = stationary.actions;
    return Policy{[actions](const SmdpHistory& history) -> int {
        validate_history(history);
        const Index state = history.states.back();
        if (state < 0 || state >= static_cast<Index>(actions.size()))
            throw ValidationError("history state out of range for the policy");
        return actions[static_cast<std::size_t>(state)];
    }};
}

Policy induce_policy(const StoppingRule& rule) {
    return Policy{[rule](const SmdpHistory& history) -> int {
        validate_history(history);
        // Any stop action in the past puts the history off the embedding
        // image, where the induced policy keeps stopping.
        for (int a : history.actions)
            if (a == 1) return 1;
        const SmpPath stripped{history.states, history.sojourns};
        const long n = static_cast<long>(history.actions.size());
        const StopEpoch when = stopping_time_of(rule, stripped);
        return when.fired() && when.epoch == n ? 1 : 0;
    }};
}

StoppingRule induce_stopping_time(const Policy& policy) {
    if (!policy.decide) throw ValidationError("policy has no decision function");
    const auto decide = policy.decide;
    return Predicate{
        [decide](const SmpPath& prefix) { return decide(embed_history(prefix)) == 1; }};
}

RoundTripReport round_trip_check(const StoppingRule& rule, const std::vector<SmpPath>& paths) {
    const StoppingRule induced = induce_stopping_time(induce_policy(rule));
    RoundTripReport report;
    for (const SmpPath& path : paths) {
        const StopEpoch expected = stopping_time_of(rule, path);
        const StopEpoch actual = stopping_time_of(induced, path);
        ++report.paths_checked;
        const bool agree = expected.fired() == actual.fired() &&
                           (!expected.fired() || expected.epoch == actual.epoch);
        if (!agree) {
            report.ok = false;
            report.counterexample = path;
            report.expected = expected;
            report.actual = actual;
            break;
        }
    }
    return report;
}

}  // namespace smpstop
