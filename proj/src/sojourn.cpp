#include "smpstop/sojourn.hpp"

#include <algorithm>
#include <cmath>

namespace smpstop {

namespace {

template <class... Ts>
struct overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overload(Ts...) -> overload<Ts...>;

}  // namespace

void validate_sojourn(const SojournDistribution& dist) {
    std::visit(
        overload{
            [](const Exponential& d) {
                if (!std::isfinite(d.rate) || !(d.rate > 0))
                    throw ValidationError("exponential sojourn needs rate > 0");
            },
            [](const Deterministic& d) {
                if (!std::isfinite(d.delay) || !(d.delay > 0))
                    throw ValidationError("deterministic sojourn needs delay > 0");
            },
            [](const Weibull& d) {
                if (!std::isfinite(d.shape) || !(d.shape > 0) || !std::isfinite(d.scale) ||
                    !(d.scale > 0))
                    throw ValidationError("weibull sojourn needs shape > 0 and scale > 0");
            },
            [](const Empirical& d) {
                if (d.times.empty() || d.times.size() != d.values.size())
                    throw ValidationError(
                        "empirical sojourn needs matching, nonempty times and values");
                if (!std::isfinite(d.times.front()) || !(d.times.front() > 0))
                    throw ValidationError("empirical sojourn times must start above 0");
                for (std::size_t k = 0; k + 1 < d.times.size(); ++k)
                    if (!std::isfinite(d.times[k + 1]) || !(d.times[k] < d.times[k + 1]))
                        throw ValidationError(
                            "empirical sojourn times must be strictly increasing");
                Real prev = 0;
                for (Real v : d.values) {
                    if (!std::isfinite(v) || !(v >= prev) || !(v <= 1))
                        throw ValidationError(
                            "empirical sojourn values must be nondecreasing within [0,1]");
                    prev = v;
                }
                if (d.values.back() != 1.0)
                    throw ValidationError(
                        "empirical sojourn must reach 1 at the last grid point");
            }},
        dist);
}

const char* family_name(const SojournDistribution& dist) {
    return std::visit(overload{[](const Exponential&) { return "exponential"; },
                               [](const Deterministic&) { return "deterministic"; },
                               [](const Weibull&) { return "weibull"; },
                               [](const Empirical&) { return "empirical"; }},
                      dist);
}

Real sojourn_cdf(const SojournDistribution& dist, Real t) {
    if (t <= 0) return 0;
    return std::visit(
        overload{
            [&](const Exponential& d) { return -std::expm1(-d.rate * t); },
            [&](const Deterministic& d) { return t >= d.delay ? 1.0 : 0.0; },
            [&](const Weibull& d) { return -std::expm1(-std::pow(t / d.scale, d.shape)); },
            [&](const Empirical& d) {
                if (t >= d.times.back()) return 1.0;
                auto it = std::upper_bound(d.times.begin(), d.times.end(), t);
                std::size_t k = static_cast<std::size_t>(it - d.times.begin());
                const Real t0 = k == 0 ? 0.0 : d.times[k - 1];
                const Real f0 = k == 0 ? 0.0 : d.values[k - 1];
                return f0 + (d.values[k] - f0) * (t - t0) / (d.times[k] - t0);
            }},
        dist);
}

Real sojourn_quantile(const SojournDistribution& dist, Real u) {
    if (!(u > 0) || !(u < 1)) throw ValidationError("sojourn quantile needs u in (0,1)");
    return std::visit(
        overload{
            [&](const Exponential& d) { return -std::log1p(-u) / d.rate; },
            [&](const Deterministic& d) { return d.delay; },
            [&](const Weibull& d) {
                return d.scale * std::pow(-std::log1p(-u), 1.0 / d.shape);
            },
            [&](const Empirical& d) {
                // First grid value >= u bounds the segment; zero-slope
                // segments carry no mass, so the interpolation below never
                // divides by zero.
                auto it = std::lower_bound(d.values.begin(), d.values.end(), u);
                std::size_t k = static_cast<std::size_t>(it - d.values.begin());
                const Real t0 = k == 0 ? 0.0 : d.times[k - 1];
                const Real f0 = k == 0 ? 0.0 : d.values[k - 1];
                return t0 + (d.times[k] - t0) * (u - f0) / (d.values[k] - f0);
            }},
        dist);
}

Real sojourn_tail_cutoff(const SojournDistribution& dist, Real mass_tol) {
    if (!(mass_tol > 0) || !(mass_tol < 1))
        throw ValidationError("tail cutoff needs mass_tol in (0,1)");
    return std::visit(
        overload{
            [&](const Exponential& d) { return -std::log(mass_tol) / d.rate; },
            [&](const Deterministic& d) { return d.delay; },
            [&](const Weibull& d) {
                return d.scale * std::pow(-std::log(mass_tol), 1.0 / d.shape);
            },
            [&](const Empirical& d) {
                for (std::size_t k = 0; k < d.values.size(); ++k)
                    if (d.values[k] >= 1.0) return d.times[k];
                return d.times.back();
            }},
        dist);
}

}  // namespace smpstop
