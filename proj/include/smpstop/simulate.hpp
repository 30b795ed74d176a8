#pragma once

#include <cstdint>
#include <optional>

#include "smpstop/equivalence.hpp"

namespace smpstop {

struct Trajectory {
    SmpPath path;
    std::optional<long> stop_epoch;    // engaged iff the rule fired
    std::optional<Real> truncated_at;  // engaged iff the horizon cut the path
    bool horizon_warning = false;      // horizon ended before the first jump
    Real discounted_cost = 0;
};

struct EstimatorReport {
    long replications = 0;
    Real mean = 0;
    Real std_error = 0;
    Real truncation_bias_bound = 0;  // exp(-beta T) |c| / beta
    long truncated_paths = 0;
};

// Horizon T with exp(-beta T) |c| / beta < bias_tol.
Real default_horizon(const Model& model, Real bias_tol = 1e-6);

// One path under the rule: replication r of master seed s is a deterministic
// function of (s, r). Runs until the rule fires (terminal cost is paid) or
// the jump clock would pass the horizon (running cost is integrated up to the
// horizon and the truncation is recorded).
Trajectory sample_trajectory(const Model& model, Index start, const StoppingRule& rule,
                             Real horizon, std::uint64_t seed, std::uint64_t replication = 0);

// Jump-chain prefix of a fixed number of epochs, no stopping applied.
SmpPath sample_path_prefix(const Model& model, Index start, long epochs, std::uint64_t seed,
                           std::uint64_t replication = 0);

// Monte Carlo estimate of the rule's value, aggregated over replications
// 0..replications-1 in that order.
EstimatorReport estimate_value(const Model& model, Index start, const StoppingRule& rule,
                               long replications, Real horizon, std::uint64_t seed);

// Monte Carlo value of a policy on the control reformulation. Entering delta
// absorbs the path at zero cost; the action-1 stop cost is integrated over
// its unit sojourn (truncated at the horizon like any other cost).
EstimatorReport simulate_smdp_policy(const Smdp& smdp, Index start, const Policy& policy,
                                     long replications, Real horizon, std::uint64_t seed);

}  // namespace smpstop
