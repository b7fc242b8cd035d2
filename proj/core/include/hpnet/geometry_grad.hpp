#pragma once

#include "hpnet/geometry.hpp"

namespace hpnet {

// Vector-Jacobian products for the ball primitives. Each backward takes the
// forward inputs plus the upstream gradient and accumulates nothing: outputs
// are fresh vectors. All are exact closed forms; every one is checked against
// central finite differences in the test suite.
//
// Points are raw vectors here (the optimizers work on matrix rows); the
// caller maintains the ball invariant.

struct AddGrads {
    Vec gx;
    Vec gy;
};

// r = x (+)_c y
AddGrads mobius_add_vjp(const Vec& x, const Vec& y, double c, const Vec& upstream);

struct DistGrads {
    Vec gx;
    Vec gy;
};

// d = d_c(x, y); upstream is the scalar dL/dd. Returns zero gradients at
// x = y, where the distance is not differentiable.
DistGrads distance_vjp(const Vec& x, const Vec& y, double c, double upstream);

// r = exp-map of v at the origin
Vec exp_map_origin_vjp(const Vec& v, double c, const Vec& upstream);

struct MatvecGrads {
    Mat gM;
    Vec gx;
};

// r = Mobius matvec of x by M
MatvecGrads mobius_matvec_vjp(const Mat& M, const Vec& x, double c, const Vec& upstream);

// Euclidean counterpart used by the euclidean classifier mode: d = ||x - y||.
DistGrads euclidean_distance_vjp(const Vec& x, const Vec& y, double upstream);

}  // namespace hpnet
