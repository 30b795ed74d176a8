#pragma once

#include <functional>
#include <variant>

#include "smpstop/solver.hpp"

namespace smpstop {

// Jump-chain prefix (i_0, t_1, i_1, ..., t_n, i_n): n+1 states, n sojourns.
struct SmpPath {
    std::vector<Index> states;
    std::vector<Real> sojourns;

    Index epochs() const { return static_cast<Index>(states.size()) - 1; }
    SmpPath prefix(Index n) const;
};

// Stop on first entry to `states`. An empty set never stops.
struct HittingSet {
    StateSet states;
};

// Stop at a fixed epoch regardless of the path.
struct FirstEpoch {
    long epoch = 0;
};

// Caller-supplied rule: stop_now is evaluated on successive prefixes and the
// stopping epoch is the first n where it returns true. It must be a
// deterministic function of the prefix.
struct Predicate {
    std::function<bool(const SmpPath& prefix)> stop_now;
};

using StoppingRule = std::variant<HittingSet, FirstEpoch, Predicate>;

struct StopEpoch {
    enum class Kind { fired, not_yet, never };

    Kind kind = Kind::not_yet;
    long epoch = -1;

    static StopEpoch fired_at(long n) { return {Kind::fired, n}; }
    static StopEpoch not_yet() { return {Kind::not_yet, -1}; }
    static StopEpoch never() { return {Kind::never, -1}; }
    bool fired() const { return kind == Kind::fired; }
    bool operator==(const StopEpoch&) const = default;
};

// First epoch within the prefix at which the rule fires. `never` is reported
// only when no continuation of the prefix can fire (the empty hitting set);
// anything else that has not fired yet is `not_yet`. A predicate that, on
// re-evaluation, fires earlier than its first reported epoch is rejected
// with a ValidationError (it is not a function of the prefix).
StopEpoch stopping_time_of(const StoppingRule& rule, const SmpPath& prefix);

// Does the rule fire at the last epoch of the prefix, given that it has not
// fired before? This is the incremental question a sampler asks while
// extending a path one epoch at a time.
bool rule_fires_now(const StoppingRule& rule, const SmpPath& prefix);

struct StoppingCertificate {
    StateSet stop_set;
    Real eq_tol = 0;
    Real epsilon_opt = 0;
    long iteration_budget = 0;  // iterate index N backing an epsilon_opt-optimal rule
    Real margin = 0;            // min over the complement of g - TV; +inf if empty
    bool certified_optimal = false;  // margin > epsilon_opt: the set is exactly optimal
};

// Reads the stopping region { i : g(i) <= TV(i) + eq_tol*(1 + |g(i)|) } off a
// solved value function and certifies it through the margin test.
StoppingCertificate extract_stop_set(const Model& model, const DiscountedMoments& moments,
                                     const ValueFunction& value, const RegularityWitness& witness,
                                     Real eq_tol = 1e-9, Real epsilon_opt = 1e-8);

}  // namespace smpstop
