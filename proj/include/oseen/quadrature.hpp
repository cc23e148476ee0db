#pragma once

#include <vector>

#include "oseen/geometry.hpp"

namespace oseen {

/// Gauss-Legendre rule on [0,1] with n points (exact for degree 2n-1).
struct GaussLegendre {
    std::vector<double> points;
    std::vector<double> weights;

    static const GaussLegendre& with_points(int n);
};

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
/// Points are stored in barycentric coordinates (l0, l1, l2) with
/// l0 = 1-x-y, l1 = x, l2 = y; weights sum to the reference area 1/2.
/// Built from a collapsed (Duffy) tensor Gauss rule, exact for all
/// polynomials of total degree <= `degree`.
struct TriangleQuadrature {
    int degree = 0;
    std::vector<double> bary;  // 3 entries per point
    std::vector<double> weights;

    int size() const { return static_cast<int>(weights.size()); }
    Vec2 reference_point(int q) const { return {bary[3 * q + 1], bary[3 * q + 2]}; }

    /// Map point q to the physical triangle (v0, v1, v2).
    Vec2 map_to(int q, const Vec2& v0, const Vec2& v1, const Vec2& v2) const {
        return bary[3 * q] * v0 + bary[3 * q + 1] * v1 + bary[3 * q + 2] * v2;
    }

    static const TriangleQuadrature& of_degree(int degree);
};

}  // namespace oseen
