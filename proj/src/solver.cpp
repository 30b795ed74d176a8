#include "smpstop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/LU>

namespace smpstop {

Vector continuation_values(const Model& model, const DiscountedMoments& moments,
                           const Vector& v) {
    return model.cost_rate.cwiseProduct(moments.m0) + moments.m1 * v;
}

Vector bellman_apply(const Model& model, const DiscountedMoments& moments, const Vector& v) {
    return continuation_values(model, moments, v).cwiseMin(model.terminal_cost);
}

ValueFunction value_iterate(const Model& model, const DiscountedMoments& moments,
                            const IterationControl& control, const IterationTrace& trace) {
    if (!(control.tol >= 0)) throw ValidationError("iteration tolerance must be nonnegative");
    if (control.max_iters < 1) throw ValidationError("max_iters must be at least 1");

    const Real bound_factor = moments.gamma_tight / (1.0 - moments.gamma_tight);
    ValueFunction out;
    out.values = Vector::Zero(model.num_states());
    for (long k = 1; k <= control.max_iters; ++k) {
        Vector next = bellman_apply(model, moments, out.values);
        const Vector step = next - out.values;
        if (step.minCoeff() < -1e-12 * (1.0 + out.values.cwiseAbs().maxCoeff()))
            throw NumericalError("value iterates lost pointwise monotonicity at step " +
                                 std::to_string(k));
        out.iterations = k;
        out.sup_diff = step.cwiseAbs().maxCoeff();
        out.error_bound = bound_factor * out.sup_diff;
        out.values.swap(next);
        if (trace) trace(k, out.sup_diff, out.error_bound);
        if (out.sup_diff <= control.tol) return out;
    }
    out.converged = false;
    return out;
}

long compute_iteration_budget(const Model& model, const RegularityWitness& witness,
                              Real epsilon_opt) {
    if (!(epsilon_opt > 0)) throw ValidationError("epsilon_opt must be positive");
    if (!(witness.epsilon_reg > 0) || !(witness.gamma < 1))
        throw ValidationError("iteration budget needs a usable regularity witness");

    const Real constant = model.cost_rate.cwiseAbs().maxCoeff() / model.beta +
                          model.terminal_cost.cwiseAbs().maxCoeff() + 1.0;
    // 1 - gamma expanded analytically; the subtraction 1 - witness.gamma
    // would shed digits when gamma is close to 1.
    const Real one_minus_gamma =
        witness.epsilon_reg * (-std::expm1(-model.beta * witness.delta_star));
    const Real log_gamma = std::log1p(-one_minus_gamma);
    const Real crossing =
        (std::log(epsilon_opt) + std::log(one_minus_gamma) - std::log(constant)) / log_gamma;
    if (!(crossing - 2.0 <= 1e9))
        throw NumericalError(
            "iteration budget exceeds 1e9; request a larger epsilon_opt or tighten the "
            "witness");
    const Real need = std::ceil(crossing - 2.0);
    return need < 0 ? 0 : static_cast<long>(need);
}

ValueFunction evaluate_hitting_rule(const Model& model, const DiscountedMoments& moments,
                                    const StateSet& stop_states) {
    const Index n = model.num_states();
    std::vector<bool> stopped(static_cast<std::size_t>(n), false);
    for (Index s : stop_states) {
        if (s < 0 || s >= n)
            throw ValidationError("stop set contains out-of-range state index " +
                                  std::to_string(s));
        stopped[static_cast<std::size_t>(s)] = true;
    }

    std::vector<Index> stop, cont;
    for (Index i = 0; i < n; ++i) (stopped[static_cast<std::size_t>(i)] ? stop : cont).push_back(i);

    ValueFunction out;
    out.values = Vector(n);
    out.values(stop) = model.terminal_cost(stop);
    if (cont.empty()) return out;

    const Matrix sub = moments.m1(cont, cont);
    Vector rhs = model.cost_rate(cont).cwiseProduct(moments.m0(cont));
    if (!stop.empty()) rhs += moments.m1(cont, stop) * model.terminal_cost(stop);

    const Index m = static_cast<Index>(cont.size());
    Vector solution;
    if (m <= 2000) {
        const Matrix system = Matrix::Identity(m, m) - sub;
        solution = Eigen::PartialPivLU<Matrix>(system).solve(rhs);
        const Real residual = (system * solution - rhs).cwiseAbs().maxCoeff();
        const Real scale = 1.0 + rhs.cwiseAbs().maxCoeff() + solution.cwiseAbs().maxCoeff();
        if (!(residual <= 1e-9 * scale))
            throw NumericalError("hitting-rule linear system solve left residual " +
                                 std::to_string(residual));
    } else {
        // The row sums of sub are below gamma_tight < 1, so plain sweeps
        // contract; stop when the geometric tail is negligible.
        const Real tail_factor = moments.gamma_tight / (1.0 - moments.gamma_tight);
        solution = rhs;
        bool done = false;
        for (long k = 0; k < 1000000 && !done; ++k) {
            Vector next = rhs + sub * solution;
            const Real diff = (next - solution).cwiseAbs().maxCoeff();
            solution.swap(next);
            done = tail_factor * diff <= 1e-12 * (1.0 + solution.cwiseAbs().maxCoeff());
        }
        if (!done)
            throw NumericalError("hitting-rule fixed-point sweeps failed to converge");
    }
    out.values(cont) = solution;
    return out;
}

BruteForceResult brute_force_optimum(const Model& model, const DiscountedMoments& moments) {
    const Index n = model.num_states();
    if (n > 20)
        throw ValidationError("brute force enumerates 2^n hitting rules; refusing n > 20");

    BruteForceResult out;
    out.values = Vector::Constant(n, std::numeric_limits<Real>::infinity());
    Real best_sum = std::numeric_limits<Real>::infinity();
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        StateSet set;
        for (Index i = 0; i < n; ++i)
            if (mask & (1ull << i)) set.push_back(i);
        const Vector values = evaluate_hitting_rule(model, moments, set).values;
        out.values = out.values.cwiseMin(values);
        const Real sum = values.sum();
        if (sum < best_sum) {
            best_sum = sum;
            out.best_set = std::move(set);
        }
    }
    return out;
}

}  // namespace smpstop
