#include "oseen/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace oseen {

namespace {

// Nodes as roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev initial guess; weights 2/((1-x^2) P_n'(x)^2), then
// shifted from [-1,1] to [0,1].
GaussLegendre build_gauss(int n) {
    if (n < 1) throw std::runtime_error("GaussLegendre: need at least one point");
    GaussLegendre g;
    g.points.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        g.points[n - 1 - i] = 0.5 * (x + 1.0);
        g.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
}

TriangleQuadrature build_triangle(int degree) {
    // Duffy map from the unit square: x = a(1-b), y = b, jacobian (1-b).
    // Exactness in b needs 2n-1 >= degree+1.
    int n = (degree + 3) / 2;
    if (n < 1) n = 1;
    const GaussLegendre& g = GaussLegendre::with_points(n);
    TriangleQuadrature tq;
    tq.degree = degree;
    tq.bary.reserve(3 * n * n);
    tq.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double a = g.points[i], b = g.points[j];
            double x = a * (1.0 - b), y = b;
            tq.bary.push_back(1.0 - x - y);
            tq.bary.push_back(x);
            tq.bary.push_back(y);
            tq.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - b));
        }
    }
    return tq;
}

}  // namespace

const GaussLegendre& GaussLegendre::with_points(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss(n)).first;
    return it->second;
}

const TriangleQuadrature& TriangleQuadrature::of_degree(int degree) {
    static std::map<int, TriangleQuadrature> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, build_triangle(degree)).first;
    return it->second;
}

}  // namespace oseen
