#pragma once

#include <variant>
#include <vector>

#include "smpstop/types.hpp"

namespace smpstop {

struct Exponential {
    Real rate = 0;  // F(t) = 1 - exp(-rate t)
};

struct Deterministic {
    Real delay = 0;  // unit point mass at t = delay
};

struct Weibull {
    Real shape = 0;
    Real scale = 0;  // F(t) = 1 - exp(-(t/scale)^shape)
};

// Piecewise-linear CDF through (0,0), (times[0], values[0]), ...,
// (times[m-1], values[m-1]). Times are strictly increasing and positive,
// values nondecreasing with values[m-1] == 1, so the law is continuous and
// supported on (0, times[m-1]].
struct Empirical {
    std::vector<Real> times;
    std::vector<Real> values;
};

using SojournDistribution = std::variant<Exponential, Deterministic, Weibull, Empirical>;

void validate_sojourn(const SojournDistribution& dist);

const char* family_name(const SojournDistribution& dist);

Real sojourn_cdf(const SojournDistribution& dist, Real t);

// Inverse CDF for u in (0,1). Deterministic delays ignore u, so every family
// samples through the same call and consumes the same number of draws.
Real sojourn_quantile(const SojournDistribution& dist, Real u);

// Smallest T with 1 - F(T) <= mass_tol (the exact support end when there is
// one).
Real sojourn_tail_cutoff(const SojournDistribution& dist, Real mass_tol);

}  // namespace smpstop
