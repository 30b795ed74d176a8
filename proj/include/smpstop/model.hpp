#pragma once

#include <string>
#include <vector>

#include "smpstop/sojourn.hpp"
#include "smpstop/types.hpp"

namespace smpstop {

enum class SojournMode { per_state, per_pair };

// Semi-Markov kernel Q(t, j | i) = transition(i, j) * F(t), where F is the
// sojourn law attached to state i (per_state) or to the pair (i, j)
// (per_pair).
struct KernelSpec {
    Matrix transition;  // row-stochastic within 1e-12
    SojournMode mode = SojournMode::per_state;
    std::vector<SojournDistribution> sojourns;  // n entries, or n*n row-major

    const SojournDistribution& sojourn(Index i) const;
    const SojournDistribution& sojourn(Index i, Index j) const;
};

struct Model {
    std::vector<std::string> states;
    Real beta = 0;         // discount rate, strictly positive
    Vector cost_rate;      // running cost c, nonnegative
    Vector terminal_cost;  // stopping cost g, nonnegative
    KernelSpec kernel;

    Index num_states() const { return static_cast<Index>(states.size()); }
    Index state_index(const std::string& name) const;
};

// Certifies sum_j Q(delta, j | i) <= 1 - epsilon_reg for every state, and
// carries the induced contraction factor
//   gamma = 1 - epsilon_reg + epsilon_reg * exp(-beta * delta_star),
// with delta_star = min(delta, 1/2).
struct RegularityWitness {
    Real delta = 0;
    Real epsilon_reg = 0;
    Real delta_star = 0;
    Real gamma = 1;
};

void validate_model(const Model& model);

Model load_model(const std::string& path);

// Total kernel mass sum_j Q(t, j | i).
Real kernel_mass(const Model& model, Index i, Real t);

// Scans 64 log-spaced delta candidates in (1e-4, 1/2] and returns the witness
// with the smallest gamma. Candidates whose margin is not clearly positive
// (epsilon_reg <= 1e-12) are discarded; if all are, a ValidationError
// reports that no witness was found.
RegularityWitness find_regularity_witness(const Model& model);

// Witness at a caller-chosen delta (diagnostic use; delta may exceed 1/2, in
// which case gamma is still computed at delta_star = 1/2).
RegularityWitness find_regularity_witness(const Model& model, Real delta);

}  // namespace smpstop
