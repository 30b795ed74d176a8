#include "smpstop/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smpstop {

namespace {

void validate_path(const SmpPath& path) {
    if (path.states.empty() || path.sojourns.size() + 1 != path.states.size())
        throw ValidationError("a history prefix must alternate state, sojourn, state");
    for (Real t : path.sojourns)
        if (!std::isfinite(t) || t < 0)
            throw ValidationError("sojourns in a history prefix must be nonnegative");
}

bool contains(const StateSet& set, Index state) {
    return std::find(set.begin(), set.end(), state) != set.end();
}

}  // namespace

SmpPath SmpPath::prefix(Index n) const {
    if (n < 0 || n > epochs()) throw ValidationError("prefix epoch out of range");
    SmpPath out;
    out.states.assign(states.begin(), states.begin() + n + 1);
    out.sojourns.assign(sojourns.begin(), sojourns.begin() + n);
    return out;
}

bool rule_fires_now(const StoppingRule& rule, const SmpPath& prefix) {
    validate_path(prefix);
    if (const auto* hit = std::get_if<HittingSet>(&rule))
        return contains(hit->states, prefix.states.back());
    if (const auto* first = std::get_if<FirstEpoch>(&rule)) {
        if (first->epoch < 0) throw ValidationError("first-epoch rule needs epoch >= 0");
        return first->epoch == static_cast<long>(prefix.epochs());
    }
    const auto& predicate = std::get<Predicate>(rule);
    if (!predicate.stop_now) throw ValidationError("predicate rule has no callable");
    return predicate.stop_now(prefix);
}

StopEpoch stopping_time_of(const StoppingRule& rule, const SmpPath& prefix) {
    validate_path(prefix);
    const long n = static_cast<long>(prefix.epochs());

    if (const auto* hit = std::get_if<HittingSet>(&rule)) {
        for (long k = 0; k <= n; ++k)
            if (contains(hit->states, prefix.states[static_cast<std::size_t>(k)]))
                return StopEpoch::fired_at(k);
        return hit->states.empty() ? StopEpoch::never() : StopEpoch::not_yet();
    }

    if (const auto* first = std::get_if<FirstEpoch>(&rule)) {
        if (first->epoch < 0) throw ValidationError("first-epoch rule needs epoch >= 0");
        return first->epoch <= n ? StopEpoch::fired_at(first->epoch) : StopEpoch::not_yet();
    }

    const auto& predicate = std::get<Predicate>(rule);
    if (!predicate.stop_now) throw ValidationError("predicate rule has no callable");
    long fired = -1;
    for (long k = 0; k <= n; ++k) {
        if (predicate.stop_now(prefix.prefix(k))) {
            fired = k;
            break;
        }
    }
    if (fired < 0) return StopEpoch::not_yet();
    // A genuine function of the prefix declines every earlier prefix again on
    // re-evaluation; one that now fires earlier is stateful and its answers
    // cannot name a well-defined epoch.
    for (long k = 0; k < fired; ++k)
        if (predicate.stop_now(prefix.prefix(k)))
            throw ValidationError("inconsistent predicate: fires at epoch " +
                                  std::to_string(fired) + " but also at earlier epoch " +
                                  std::to_string(k));
    return StopEpoch::fired_at(fired);
}

StoppingCertificate extract_stop_set(const Model& model, const DiscountedMoments& moments,
                                     const ValueFunction& value,
                                     const RegularityWitness& witness, Real eq_tol,
                                     Real epsilon_opt) {
    if (value.values.size() != model.num_states())
        throw ValidationError("value function size does not match the model");
    if (!(eq_tol >= 0)) throw ValidationError("eq_tol must be nonnegative");

    StoppingCertificate cert;
    cert.eq_tol = eq_tol;
    cert.epsilon_opt = epsilon_opt;
    cert.iteration_budget = compute_iteration_budget(model, witness, epsilon_opt);

    const Vector applied = bellman_apply(model, moments, value.values);
    cert.margin = std::numeric_limits<Real>::infinity();
    for (Index i = 0; i < model.num_states(); ++i) {
        const Real gap = model.terminal_cost(i) - applied(i);
        if (gap <= eq_tol * (1.0 + std::abs(model.terminal_cost(i))))
            cert.stop_set.push_back(i);
        else
            cert.margin = std::min(cert.margin, gap);
    }
    cert.certified_optimal = cert.margin > epsilon_opt;
    return cert;
}

}  // namespace smpstop
