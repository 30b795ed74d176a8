#include "smpstop/moments.hpp"

#include <cmath>
#include <string>

namespace smpstop {

namespace {

// Discounted integrals of one sojourn law:
//   survival  = int_0^inf exp(-beta t) (1 - F(t)) dt
//   transform = int_0^inf exp(-beta t) dF(t)
// They satisfy beta * survival + transform = 1 whenever F(inf) = 1.
struct DiscountedPair {
    Real survival = 0;
    Real transform = 0;
};

constexpr Real kTailMass = 1e-12;

bool has_closed_form(const SojournDistribution& dist) {
    return std::holds_alternative<Exponential>(dist) ||
           std::holds_alternative<Deterministic>(dist);
}

DiscountedPair closed_form_pair(const SojournDistribution& dist, Real beta) {
    if (const auto* e = std::get_if<Exponential>(&dist))
        return {1.0 / (beta + e->rate), e->rate / (beta + e->rate)};
    const auto& d = std::get<Deterministic>(dist);
    return {-std::expm1(-beta * d.delay) / beta, std::exp(-beta * d.delay)};
}

// Cell boundaries sit on the distribution's own breakpoints so every cell
// interior is smooth, and a point mass is summed exactly as an atom rather
// than smeared across its cell (a midpoint rule straddling a jump converges
// only O(h) and cannot meet the identity tolerance).
struct StieltjesLayout {
    std::vector<Real> nodes;  // includes 0 and the tail cutoff
    Real atom_at = -1;
    Real atom_mass = 0;
};

StieltjesLayout layout_for(const SojournDistribution& dist) {
    StieltjesLayout layout;
    layout.nodes.push_back(0);
    if (const auto* d = std::get_if<Deterministic>(&dist)) {
        layout.nodes.push_back(d->delay);
        layout.atom_at = d->delay;
        layout.atom_mass = 1;
    } else if (const auto* e = std::get_if<Empirical>(&dist)) {
        const Real cut = sojourn_tail_cutoff(dist, kTailMass);
        for (Real t : e->times) {
            if (t >= cut) break;
            layout.nodes.push_back(t);
        }
        layout.nodes.push_back(cut);
    } else {
        layout.nodes.push_back(sojourn_tail_cutoff(dist, kTailMass));
    }
    return layout;
}

// Midpoint Stieltjes sums at 2^level cells per segment, plus the atom and the
// cutoff tail (both contribute exactly or to within kTailMass).
DiscountedPair quadrature_level(const SojournDistribution& dist, Real beta,
                                const StieltjesLayout& layout, int level) {
    const long cells = 1L << level;
    const auto continuous_cdf = [&](Real t) {
        Real f = sojourn_cdf(dist, t);
        if (layout.atom_at >= 0 && t >= layout.atom_at) f -= layout.atom_mass;
        return f;
    };

    DiscountedPair pair;
    for (std::size_t s = 0; s + 1 < layout.nodes.size(); ++s) {
        const Real a = layout.nodes[s];
        const Real b = layout.nodes[s + 1];
        const Real h = (b - a) / static_cast<Real>(cells);
        Real f_left = continuous_cdf(a);
        for (long k = 0; k < cells; ++k) {
            const Real left = a + h * static_cast<Real>(k);
            const Real right = k + 1 == cells ? b : a + h * static_cast<Real>(k + 1);
            const Real mid = 0.5 * (left + right);
            const Real weight = std::exp(-beta * mid);
            const Real f_right = continuous_cdf(right);
            pair.transform += weight * (f_right - f_left);
            pair.survival += weight * (1.0 - sojourn_cdf(dist, mid)) * (right - left);
            f_left = f_right;
        }
    }
    if (layout.atom_at >= 0)
        pair.transform += layout.atom_mass * std::exp(-beta * layout.atom_at);

    const Real cut = layout.nodes.back();
    const Real tail = 1.0 - sojourn_cdf(dist, cut);
    if (tail > 0) {
        const Real tail_weight = std::exp(-beta * cut);
        pair.transform += tail * tail_weight;
        pair.survival += tail * tail_weight / beta;
    }
    return pair;
}

DiscountedPair discounted_pair(const SojournDistribution& dist, Real beta,
                               const QuadratureConfig& quad) {
    if (!quad.force_quadrature && has_closed_form(dist)) return closed_form_pair(dist, beta);
    const StieltjesLayout layout = layout_for(dist);
    DiscountedPair prev;
    Real residual = 0;
    for (int level = 0; level <= quad.max_refine; ++level) {
        const DiscountedPair pair = quadrature_level(dist, beta, layout, level);
        residual = std::abs(beta * pair.survival + pair.transform - 1.0);
        // The identity certifies the combined error only; each integral is
        // additionally required to have stabilized across one refinement
        // halving (the midpoint error shrinks 4x per level, so the last step
        // bounds what remains).
        const bool stable = level > 0 &&
                            std::abs(pair.survival - prev.survival) <= quad.tol / 2 &&
                            std::abs(pair.transform - prev.transform) <= quad.tol / 2;
        if (residual < quad.tol && stable) return pair;
        prev = pair;
    }
    throw NumericalError(std::string("sojourn quadrature failed: ") + family_name(dist) +
                         " law left an identity residual of " + std::to_string(residual) +
                         " after the maximum refinement (target " + std::to_string(quad.tol) +
                         ")");
}

}  // namespace

DiscountedMoments compute_moments(const Model& model, const QuadratureConfig& quad) {
    if (!(quad.tol > 0)) throw ValidationError("quadrature tolerance must be positive");
    if (quad.max_refine < 0 || quad.max_refine > 30)
        throw ValidationError("quadrature refinement level must lie in [0, 30]");

    const Index n = model.num_states();
    DiscountedMoments moments;
    moments.m0 = Vector::Zero(n);
    moments.m1 = Matrix::Zero(n, n);

    if (model.kernel.mode == SojournMode::per_state) {
        for (Index i = 0; i < n; ++i) {
            const DiscountedPair pair =
                discounted_pair(model.kernel.sojourn(i), model.beta, quad);
            moments.m0(i) = pair.survival;
            moments.m1.row(i) = model.kernel.transition.row(i) * pair.transform;
        }
    } else {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                const Real p = model.kernel.transition(i, j);
                if (p == 0) continue;
                const DiscountedPair pair =
                    discounted_pair(model.kernel.sojourn(i, j), model.beta, quad);
                moments.m0(i) += p * pair.survival;
                moments.m1(i, j) = p * pair.transform;
            }
        }
    }

    moments.gamma_tight = moments.m1.rowwise().sum().maxCoeff();
    if (!(moments.gamma_tight < 1.0))
        throw NumericalError("kernel moments do not contract: max row sum " +
                             std::to_string(moments.gamma_tight));
    return moments;
}

Real contraction_modulus(const DiscountedMoments& moments) { return moments.gamma_tight; }

}  // namespace smpstop
