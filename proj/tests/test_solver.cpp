#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "smpstop/model.hpp"
#include "smpstop/moments.hpp"
#include "smpstop/solver.hpp"
#include "support.hpp"

using namespace smpstop;

namespace {

// Fixed point of the bundled maintenance model, solved independently from the
// linear system on the continuation region {1, 2} with state 3 stopped.
const Vector kMaintenanceValue = (Vector(3) << 147.6923077, 222.5641026, 400.0).finished();

Model two_state_unit_model() {
    Model model;
    model.states = {"a", "b"};
    model.beta = 1.0;
    model.cost_rate = Vector::Constant(2, 1.0);
    model.terminal_cost = Vector::Constant(2, 10.0);
    model.kernel.transition = Matrix::Constant(2, 2, 0.5);
    model.kernel.mode = SojournMode::per_state;
    model.kernel.sojourns = {Exponential{1.0}, Exponential{1.0}};
    return model;
}

}  // namespace

TEST_CASE("value iteration reproduces the bundled maintenance fixed point") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    IterationControl control;
    control.tol = 1e-12;
    const ValueFunction result = value_iterate(model, moments, control);

    REQUIRE(result.converged);
    CHECK(result.iterations <= 200);
    CHECK(result.sup_diff <= 1e-12);
    for (Index i = 0; i < 3; ++i)
        CHECK(std::abs(result.values(i) - kMaintenanceValue(i)) <= 5e-4);
    // The stop branch is exactly active at the worst state.
    CHECK(result.values(2) == 400.0);

    // A further operator application does not move a converged iterate.
    const Vector again = bellman_apply(model, moments, result.values);
    CHECK((again - result.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("continuation value at the stopped state sits above the stop cost") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);
    IterationControl control;
    control.tol = 1e-12;
    const ValueFunction result = value_iterate(model, moments, control);

    const Vector cont = continuation_values(model, moments, result.values);
    CHECK(std::abs(cont(2) - 416.2148962) <= 1e-6);
    CHECK(cont(2) > model.terminal_cost(2));
    // States 1 and 2 continue: their continuation branch is the value itself.
    CHECK(std::abs(cont(0) - result.values(0)) <= 1e-9);
    CHECK(std::abs(cont(1) - result.values(1)) <= 1e-9);
}

TEST_CASE("one operator application from zero takes min of stop cost and one-step cost") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    const Vector from_zero = bellman_apply(model, moments, Vector::Zero(3));
    const Vector expected = model.terminal_cost.cwiseMin(model.cost_rate.cwiseProduct(moments.m0));
    for (Index i = 0; i < 3; ++i) CHECK(from_zero(i) == doctest::Approx(expected(i)).epsilon(1e-15));
}

TEST_CASE("zero stop cost collapses the value function to zero") {
    Model model = test::load_maintenance();
    model.terminal_cost.setZero();
    const DiscountedMoments moments = compute_moments(model);

    const ValueFunction result = value_iterate(model, moments);
    CHECK(result.converged);
    CHECK(result.iterations == 1);
    CHECK(result.sup_diff == 0.0);
    CHECK(result.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero running cost collapses the value function to zero") {
    Model model = test::load_maintenance();
    model.cost_rate.setZero();
    const DiscountedMoments moments = compute_moments(model);

    const ValueFunction result = value_iterate(model, moments);
    CHECK(result.converged);
    CHECK(result.iterations == 1);
    CHECK(result.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator is monotone and contracts at the tight modulus") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        const Model model = test::random_model(seed);
        const DiscountedMoments moments = compute_moments(model);
        const Index n = model.num_states();

        RandomStream rng(seed, 0x736f6c766572ull);
        Vector v(n), w(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = test::uniform_in(rng, 0.0, 1000.0);
            w(i) = test::uniform_in(rng, 0.0, 1000.0);
        }

        const Vector tv = bellman_apply(model, moments, v);
        const Vector tw = bellman_apply(model, moments, w);
        const Real lhs = (tv - tw).cwiseAbs().maxCoeff();
        const Real rhs = moments.gamma_tight * (v - w).cwiseAbs().maxCoeff();
        CHECK(lhs <= rhs + 1e-12);

        // Pointwise domination is preserved.
        const Vector above = v + Vector::Constant(n, 1.0) +
                             Vector::NullaryExpr(n, [&](Index) {
                                 return test::uniform_in(rng, 0.0, 50.0);
                             });
        const Vector t_above = bellman_apply(model, moments, above);
        CHECK((t_above - tv).minCoeff() >= -1e-14);
    }
}

TEST_CASE("value iterates from zero never step downward") {
    for (std::uint64_t seed = 21; seed <= 25; ++seed) {
        CAPTURE(seed);
        const Model model = test::random_model(seed);
        const DiscountedMoments moments = compute_moments(model);

        Vector v = Vector::Zero(model.num_states());
        for (int k = 0; k < 60; ++k) {
            const Vector next = bellman_apply(model, moments, v);
            CHECK((next - v).minCoeff() >= -1e-14);
            v = next;
        }
    }
}

TEST_CASE("a-posteriori error bound covers the distance to the fixed point") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    IterationControl tight;
    tight.tol = 1e-13;
    const ValueFunction reference = value_iterate(model, moments, tight);
    REQUIRE(reference.converged);

    for (Real tol : {1e-2, 1e-4, 1e-6}) {
        CAPTURE(tol);
        IterationControl loose;
        loose.tol = tol;
        const ValueFunction early = value_iterate(model, moments, loose);
        REQUIRE(early.converged);
        const Real distance = (early.values - reference.values).cwiseAbs().maxCoeff();
        CHECK(distance <= early.error_bound + 1e-12);
        const Real factor = moments.gamma_tight / (1.0 - moments.gamma_tight);
        CHECK(early.error_bound == doctest::Approx(factor * early.sup_diff).epsilon(1e-14));
    }
}

TEST_CASE("hitting the iteration cap reports non-convergence") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    IterationControl control;
    control.tol = 0.0;
    control.max_iters = 7;
    const ValueFunction result = value_iterate(model, moments, control);
    CHECK_FALSE(result.converged);
    CHECK(result.iterations == 7);
    CHECK(result.sup_diff > 0.0);
    CHECK(std::isfinite(result.error_bound));
}

TEST_CASE("iteration control is validated") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    IterationControl negative_tol;
    negative_tol.tol = -1e-9;
    CHECK_THROWS_AS(value_iterate(model, moments, negative_tol), ValidationError);

    IterationControl no_budget;
    no_budget.max_iters = 0;
    CHECK_THROWS_AS(value_iterate(model, moments, no_budget), ValidationError);
}

TEST_CASE("trace callback reports every step with the published bound") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    std::vector<long> steps;
    std::vector<Real> diffs;
    std::vector<Real> bounds;
    IterationControl control;
    control.tol = 1e-6;
    const ValueFunction result =
        value_iterate(model, moments, control, [&](long k, Real diff, Real bound) {
            steps.push_back(k);
            diffs.push_back(diff);
            bounds.push_back(bound);
        });

    REQUIRE(result.converged);
    REQUIRE(static_cast<long>(steps.size()) == result.iterations);
    for (std::size_t k = 0; k < steps.size(); ++k) CHECK(steps[k] == static_cast<long>(k) + 1);
    CHECK(diffs.back() == result.sup_diff);
    CHECK(bounds.back() == result.error_bound);
    const Real factor = moments.gamma_tight / (1.0 - moments.gamma_tight);
    for (std::size_t k = 0; k < diffs.size(); ++k)
        CHECK(bounds[k] == doctest::Approx(factor * diffs[k]).epsilon(1e-14));
}

TEST_CASE("iteration budget matches a direct geometric-series search") {
    const Model model = test::load_maintenance();

    const auto oracle = [&](const RegularityWitness& witness, Real epsilon_opt) {
        const long double one_minus_gamma =
            static_cast<long double>(witness.epsilon_reg) *
            (-std::expm1l(-static_cast<long double>(model.beta) * witness.delta_star));
        const long double gamma = 1.0L - one_minus_gamma;
        const long double constant =
            static_cast<long double>(model.cost_rate.maxCoeff()) / model.beta +
            model.terminal_cost.maxCoeff() + 1.0L;
        long n = 0;
        long double power = gamma * gamma;  // gamma^(n+2) at n = 0
        while (power / one_minus_gamma * constant > epsilon_opt) {
            power *= gamma;
            if (++n > 200000) FAIL("oracle search did not terminate");
        }
        return n;
    };

    const RegularityWitness grid = find_regularity_witness(model);
    CHECK(compute_iteration_budget(model, grid, 1e-8) == 3366);
    CHECK(compute_iteration_budget(model, grid, 1e-8) == oracle(grid, 1e-8));

    const RegularityWitness diagnostic = find_regularity_witness(model, 1.0);
    CHECK(compute_iteration_budget(model, diagnostic, 1e-8) == 9477);
    CHECK(compute_iteration_budget(model, diagnostic, 1e-8) == oracle(diagnostic, 1e-8));

    for (Real eps : {1e-4, 1e-6, 1e-10}) {
        CAPTURE(eps);
        CHECK(compute_iteration_budget(model, grid, eps) == oracle(grid, eps));
    }
}

TEST_CASE("iteration budget saturates at zero for generous targets") {
    const Model model = test::load_maintenance();
    const RegularityWitness witness = find_regularity_witness(model);
    CHECK(compute_iteration_budget(model, witness, 1e6) == 0);
}

TEST_CASE("iteration budget refuses astronomically slow contractions") {
    const Model model = test::load_maintenance();
    RegularityWitness witness;
    witness.delta = 0.5;
    witness.delta_star = 0.5;
    witness.epsilon_reg = 1e-9;
    witness.gamma = 1.0 - witness.epsilon_reg * (-std::expm1(-model.beta * witness.delta_star));
    CHECK_THROWS_AS(compute_iteration_budget(model, witness, 1e-8), NumericalError);
}

TEST_CASE("iteration budget validates its inputs") {
    const Model model = test::load_maintenance();
    const RegularityWitness witness = find_regularity_witness(model);
    CHECK_THROWS_AS(compute_iteration_budget(model, witness, 0.0), ValidationError);
    CHECK_THROWS_AS(compute_iteration_budget(model, witness, -1.0), ValidationError);

    RegularityWitness degenerate = witness;
    degenerate.epsilon_reg = 0.0;
    CHECK_THROWS_AS(compute_iteration_budget(model, degenerate, 1e-8), ValidationError);

    RegularityWitness expanded = witness;
    expanded.gamma = 1.0;
    CHECK_THROWS_AS(compute_iteration_budget(model, expanded, 1e-8), ValidationError);
}

TEST_CASE("hitting-rule value of the optimal set matches value iteration") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);

    const ValueFunction rule = evaluate_hitting_rule(model, moments, {2});
    for (Index i = 0; i < 3; ++i)
        CHECK(std::abs(rule.values(i) - kMaintenanceValue(i)) <= 5e-4);

    IterationControl control;
    control.tol = 1e-13;
    const ValueFunction iterated = value_iterate(model, moments, control);
    CHECK((rule.values - iterated.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("stopping everywhere pays the stop cost and nothing else") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);
    const ValueFunction rule = evaluate_hitting_rule(model, moments, {0, 1, 2});
    for (Index i = 0; i < 3; ++i) CHECK(rule.values(i) == model.terminal_cost(i));
}

TEST_CASE("never stopping accumulates the discounted running cost") {
    // Unit rates and costs: each step contributes survival mass 1/2 and the
    // one-step transform is 1/2, so the never-stop value solves
    // v = 1/2 + v/2, i.e. v = 1 in every state.
    const Model model = two_state_unit_model();
    const DiscountedMoments moments = compute_moments(model);
    const ValueFunction rule = evaluate_hitting_rule(model, moments, {});
    CHECK(std::abs(rule.values(0) - 1.0) <= 1e-12);
    CHECK(std::abs(rule.values(1) - 1.0) <= 1e-12);
}

TEST_CASE("hitting-rule evaluation validates the stop set") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);
    CHECK_THROWS_AS(evaluate_hitting_rule(model, moments, {5}), ValidationError);
    CHECK_THROWS_AS(evaluate_hitting_rule(model, moments, {-1}), ValidationError);
}

TEST_CASE("brute force agrees with value iteration on the bundled model") {
    const Model model = test::load_maintenance();
    const DiscountedMoments moments = compute_moments(model);
    const BruteForceResult brute = brute_force_optimum(model, moments);

    CHECK(brute.best_set == StateSet{2});

    IterationControl control;
    control.tol = 1e-13;
    const ValueFunction iterated = value_iterate(model, moments, control);
    CHECK((brute.values - iterated.values).cwiseAbs().maxCoeff() <= 1e-8);
    // Stopping immediately is always available, so the optimum never exceeds g.
    CHECK(((model.terminal_cost - brute.values).minCoeff()) >= -1e-12);
}

TEST_CASE("brute force agrees with value iteration on random small models") {
    test::GeneratorOptions opts;
    opts.min_states = 2;
    opts.max_states = 5;
    for (std::uint64_t seed = 31; seed <= 36; ++seed) {
        CAPTURE(seed);
        const Model model = test::random_model(seed, opts);
        const DiscountedMoments moments = compute_moments(model);
        const BruteForceResult brute = brute_force_optimum(model, moments);

        IterationControl control;
        control.tol = 1e-13;
        const ValueFunction iterated = value_iterate(model, moments, control);
        REQUIRE(iterated.converged);
        CHECK((brute.values - iterated.values).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("brute force with zero stop cost stops everywhere at zero value") {
    Model model = test::load_maintenance();
    model.terminal_cost.setZero();
    const DiscountedMoments moments = compute_moments(model);
    const BruteForceResult brute = brute_force_optimum(model, moments);
    CHECK(brute.values.cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(brute.best_set == StateSet{0, 1, 2});
}

TEST_CASE("brute force refuses models beyond twenty states") {
    const Index n = 21;
    Model model;
    for (Index i = 0; i < n; ++i) model.states.push_back("s" + std::to_string(i));
    model.beta = 0.5;
    model.cost_rate = Vector::Constant(n, 1.0);
    model.terminal_cost = Vector::Constant(n, 1.0);
    model.kernel.transition = Matrix::Constant(n, n, 1.0 / static_cast<Real>(n));
    model.kernel.mode = SojournMode::per_state;
    model.kernel.sojourns.assign(static_cast<std::size_t>(n), Exponential{1.0});
    validate_model(model);

    const DiscountedMoments moments = compute_moments(model);
    CHECK_THROWS_AS(brute_force_optimum(model, moments), ValidationError);
}
