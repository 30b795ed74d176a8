#pragma once

#include <optional>

#include "smpstop/stopping.hpp"

namespace smpstop {

// Control reformulation of the stopping problem on the state space
// S + {delta}: action 0 continues along the original kernel, action 1 jumps
// to the absorbing state delta after a deterministic unit sojourn and is the
// only action available at delta. The stop decision is priced as a running
// cost over that unit sojourn:
//   stop_cost(i) = beta * g(i) / (1 - exp(-beta)),
// so that stop_cost(i) * int_0^1 exp(-beta t) dt recovers g(i) exactly.
struct Smdp {
    Model base;
    Vector stop_cost;  // indexed over S + {delta}; zero at delta

    Index delta() const { return base.num_states(); }
    Index num_states() const { return base.num_states() + 1; }
    Real unit_survival() const;   // int_0^1 exp(-beta t) dt
    Real unit_transform() const;  // exp(-beta)
};

Smdp build_smdp(const Model& model);

// Finite-horizon optimal values U_0, ..., U_{n_max}, each indexed over
// S + {delta} with delta last. U_n(delta) stays exactly 0, and U_n restricted
// to S reproduces the stopping-operator iterates.
std::vector<Vector> smdp_value_iterate(const Smdp& smdp, const DiscountedMoments& moments,
                                       long n_max);

// Controlled history (i_0, a_0, t_1, i_1, ..., a_{n-1}, t_n, i_n).
struct SmdpHistory {
    std::vector<Index> states;
    std::vector<int> actions;
    std::vector<Real> sojourns;

    Index epochs() const { return static_cast<Index>(states.size()) - 1; }
};

// Embeds a jump-chain prefix as an all-continue controlled history.
SmdpHistory embed_history(const SmpPath& path);

// History-dependent deterministic policy: decide(h) is the action taken at
// the final state of h.
struct Policy {
    std::function<int(const SmdpHistory&)> decide;
};

// One action per state of S + {delta}; the delta entry must be 1.
struct StationaryPolicy {
    std::vector<int> actions;
};

Policy as_policy(const Smdp& smdp, const StationaryPolicy& stationary);

// Policy replicating a stopping rule through the embedding: it picks action 1
// exactly at the rule's firing epoch on embedded histories and action 1
// everywhere off the embedding image.
Policy induce_policy(const StoppingRule& rule);

// Stopping rule tau_pi = first n at which the policy picks action 1 on the
// embedded history.
StoppingRule induce_stopping_time(const Policy& policy);

struct RoundTripReport {
    bool ok = true;
    long paths_checked = 0;
    std::optional<SmpPath> counterexample;
    StopEpoch expected;  // rule verdict on the counterexample
    StopEpoch actual;    // rule -> policy -> rule verdict
};

// Checks that rule -> induced policy -> induced stopping time reproduces the
// original firing epoch on every given prefix ("never" and "not yet fired"
// both count as not firing on the prefix).
RoundTripReport round_trip_check(const StoppingRule& rule, const std::vector<SmpPath>& paths);

}  // namespace smpstop
