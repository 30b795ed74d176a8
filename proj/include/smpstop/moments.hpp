#pragma once

#include "smpstop/model.hpp"

namespace smpstop {

struct QuadratureConfig {
    Real tol = 1e-9;      // identity residual target |beta*m0 + sum m1 - 1|
    int max_refine = 20;  // dyadic refinement ceiling per smooth segment
    bool force_quadrature = false;  // integrate closed-form families numerically too
};

// One-step discounted moments of the kernel:
//   m0(i)    = int_0^inf exp(-beta t) (1 - sum_j Q(t, j | i)) dt
//   m1(i, j) = int_0^inf exp(-beta t) Q(dt, j | i)
// They satisfy beta * m0(i) + sum_j m1(i, j) = 1 exactly, which doubles as
// the quadrature convergence certificate.
struct DiscountedMoments {
    Vector m0;
    Matrix m1;
    Real gamma_tight = 0;  // max row sum of m1; the operator contracts at this rate
};

DiscountedMoments compute_moments(const Model& model, const QuadratureConfig& quad = {});

Real contraction_modulus(const DiscountedMoments& moments);

}  // namespace smpstop
