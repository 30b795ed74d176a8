#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "smpstop/model.hpp"
#include "smpstop/moments.hpp"
#include "smpstop/rng.hpp"

namespace smpstop::test {

inline std::string maintenance_path() {
    return std::string(SMPSTOP_MODELS_DIR) + "/maintenance.json";
}

inline Model load_maintenance() { return load_model(maintenance_path()); }

inline Real uniform_in(RandomStream& rng, Real lo, Real hi) {
    return lo + (hi - lo) * rng.next_uniform();
}

inline long uniform_index(RandomStream& rng, long n) {
    return static_cast<long>(rng.next_uniform() * static_cast<Real>(n)) % n;
}

// Weibull shapes stay at or above 1: below that the sojourn density is
// unbounded at 0 and the moment quadrature can legitimately fail to reach
// the default residual target.
inline SojournDistribution random_sojourn(RandomStream& rng) {
    switch (uniform_index(rng, 4)) {
        case 0: return Exponential{uniform_in(rng, 0.2, 5.0)};
        case 1: return Deterministic{uniform_in(rng, 0.2, 3.0)};
        case 2: return Weibull{uniform_in(rng, 1.0, 3.0), uniform_in(rng, 0.3, 3.0)};
        default: {
            const long m = 2 + uniform_index(rng, 4);
            std::vector<Real> times;
            std::vector<Real> values;
            Real t = uniform_in(rng, 0.1, 1.0);
            Real v = 0;
            for (long k = 0; k < m; ++k) {
                times.push_back(t);
                t += uniform_in(rng, 0.2, 1.0);
                v += rng.next_uniform();
                values.push_back(v);
            }
            for (Real& x : values) x /= v;
            return Empirical{std::move(times), std::move(values)};
        }
    }
}

struct GeneratorOptions {
    Index min_states = 2;
    Index max_states = 8;
    bool allow_per_pair = true;
    Real c_max = 20;
    Real g_max = 500;
};

inline Model random_model(std::uint64_t seed, const GeneratorOptions& opts = {}) {
    RandomStream rng(seed, 0x6d6f64656cull);
    Model model;
    const Index n =
        opts.min_states + uniform_index(rng, opts.max_states - opts.min_states + 1);
    for (Index i = 0; i < n; ++i) model.states.push_back("s" + std::to_string(i));
    model.beta = uniform_in(rng, 0.05, 0.4);
    model.cost_rate = Vector(n);
    model.terminal_cost = Vector(n);
    for (Index i = 0; i < n; ++i) {
        model.cost_rate(i) = uniform_in(rng, 0.0, opts.c_max);
        model.terminal_cost(i) = uniform_in(rng, 0.0, opts.g_max);
    }
    model.kernel.transition = Matrix(n, n);
    for (Index i = 0; i < n; ++i) {
        Real sum = 0;
        for (Index j = 0; j < n; ++j) {
            model.kernel.transition(i, j) = 0.05 + rng.next_uniform();
            sum += model.kernel.transition(i, j);
        }
        model.kernel.transition.row(i) /= sum;
    }
    const bool per_pair = opts.allow_per_pair && rng.next_uniform() < 0.5;
    model.kernel.mode = per_pair ? SojournMode::per_pair : SojournMode::per_state;
    const Index count = per_pair ? n * n : n;
    for (Index k = 0; k < count; ++k) model.kernel.sojourns.push_back(random_sojourn(rng));
    return model;
}

template <class F>
Real simpson(F f, Real a, Real b, long n) {
    const Real h = (b - a) / static_cast<Real>(n);
    Real sum = f(a) + f(b);
    for (long k = 1; k < n; ++k) sum += f(a + h * static_cast<Real>(k)) * (k % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

struct OraclePair {
    Real survival = 0;   // int_0^inf exp(-beta t) (1 - F(t)) dt
    Real transform = 0;  // int_0^inf exp(-beta t) dF(t)
};

// Slow reference evaluation of the two discounted integrals, written against
// each family's textbook CDF/density rather than the library quadrature.
inline OraclePair oracle_pair(const SojournDistribution& dist, Real beta) {
    OraclePair out;
    if (const auto* exp_dist = std::get_if<Exponential>(&dist)) {
        const Real u = exp_dist->rate;
        const Real cut = 42.0 / (beta + u);
        out.survival =
            simpson([&](Real t) { return std::exp(-(beta + u) * t); }, 0.0, cut, 200000);
        out.transform = simpson([&](Real t) { return std::exp(-beta * t) * u * std::exp(-u * t); },
                                0.0, cut, 200000);
    } else if (const auto* det = std::get_if<Deterministic>(&dist)) {
        out.survival = simpson([&](Real t) { return std::exp(-beta * t); }, 0.0, det->delay, 20000);
        out.transform = std::exp(-beta * det->delay);
    } else if (const auto* wb = std::get_if<Weibull>(&dist)) {
        const Real k = wb->shape;
        const Real lambda = wb->scale;
        const Real cut = lambda * std::pow(42.0, 1.0 / k);
        const auto tail = [&](Real t) { return std::exp(-std::pow(t / lambda, k)); };
        out.survival =
            simpson([&](Real t) { return std::exp(-beta * t) * tail(t); }, 0.0, cut, 400000);
        out.transform = simpson(
            [&](Real t) {
                const Real z = t / lambda;
                return std::exp(-beta * t) * (k / lambda) * std::pow(z, k - 1) * tail(t);
            },
            0.0, cut, 400000);
    } else {
        const auto& emp = std::get<Empirical>(dist);
        Real a = 0;
        Real fa = 0;
        for (std::size_t seg = 0; seg < emp.times.size(); ++seg) {
            const Real b = emp.times[seg];
            const Real fb = emp.values[seg];
            const Real slope = (fb - fa) / (b - a);
            out.survival += simpson(
                [&](Real t) { return std::exp(-beta * t) * (1 - fa - slope * (t - a)); }, a, b,
                2000);
            out.transform += slope * (std::exp(-beta * a) - std::exp(-beta * b)) / beta;
            a = b;
            fa = fb;
        }
    }
    return out;
}

inline DiscountedMoments oracle_moments(const Model& model) {
    const Index n = model.num_states();
    DiscountedMoments moments;
    moments.m0 = Vector::Zero(n);
    moments.m1 = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const bool per_state = model.kernel.mode == SojournMode::per_state;
        const OraclePair shared =
            per_state ? oracle_pair(model.kernel.sojourn(i), model.beta) : OraclePair{};
        for (Index j = 0; j < n; ++j) {
            const Real p = model.kernel.transition(i, j);
            const OraclePair pair =
                per_state ? shared : oracle_pair(model.kernel.sojourn(i, j), model.beta);
            moments.m0(i) += p * pair.survival;
            moments.m1(i, j) = p * pair.transform;
        }
    }
    moments.gamma_tight = moments.m1.rowwise().sum().maxCoeff();
    return moments;
}

}  // namespace smpstop::test
