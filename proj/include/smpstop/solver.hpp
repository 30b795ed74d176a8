#pragma once

#include <functional>
#include <vector>

#include "smpstop/moments.hpp"

namespace smpstop {

// Sorted, duplicate-free state indices.
using StateSet = std::vector<Index>;

struct ValueFunction {
    Vector values;
    long iterations = 0;   // operator applications performed
    Real sup_diff = 0;     // last sup-norm step
    Real error_bound = 0;  // gamma_tight/(1-gamma_tight) * sup_diff
    bool converged = true;
};

struct IterationControl {
    Real tol = 1e-10;
    long max_iters = 1000000;
};

// Continuation branch c .* m0 + m1 * v of the one-step operator.
Vector continuation_values(const Model& model, const DiscountedMoments& moments, const Vector& v);

// One application of the stopping operator: (Tv)(i) = min(g(i), continuation(i)).
Vector bellman_apply(const Model& model, const DiscountedMoments& moments, const Vector& v);

using IterationTrace = std::function<void(long iteration, Real sup_diff, Real error_bound)>;

// Iterates the operator from v = 0 until sup_diff <= tol. Iterates increase
// pointwise toward the fixed point; error_bound is an a-posteriori sup-norm
// bound on the remaining distance. If the cap is hit first the last iterate
// is returned with converged = false.
ValueFunction value_iterate(const Model& model, const DiscountedMoments& moments,
                            const IterationControl& control = {},
                            const IterationTrace& trace = nullptr);

// Smallest N with gamma^(N+2)/(1-gamma) * (|c|/beta + |g| + 1) <= epsilon_opt
// (sup norms; 1-gamma evaluated as epsilon_reg*(1-exp(-beta*delta_star))).
// Running N+1 operator applications then yields an iterate whose stop region
// is epsilon_opt-optimal. NumericalError if N would exceed 1e9.
long compute_iteration_budget(const Model& model, const RegularityWitness& witness,
                              Real epsilon_opt);

// Value of the rule "stop on first entry to stop_states" (empty set: never
// stop). Solved as a linear system on the complement; the system is strictly
// diagonally dominant, and an LU solve is used up to 2000 states with damped
// fixed-point sweeps beyond that.
ValueFunction evaluate_hitting_rule(const Model& model, const DiscountedMoments& moments,
                                    const StateSet& stop_states);

struct BruteForceResult {
    Vector values;      // pointwise minimum over all 2^n hitting rules
    StateSet best_set;  // a set attaining that minimum
};

// Exhaustive reference optimum over hitting rules; ValidationError when
// num_states > 20.
BruteForceResult brute_force_optimum(const Model& model, const DiscountedMoments& moments);

}  // namespace smpstop
