#include <cmath>
#include <random>

#include "doctest.h"
#include "oseen/fespace.hpp"

using namespace oseen;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 test1_velocity(const Vec2& p) {
    double sx = std::sin(kPi * p.x), sy = std::sin(kPi * p.y), cy = std::cos(kPi * p.y);
    return {sx * sx * sy * sy * cy, -std::sin(2 * kPi * p.x) * sy * sy * sy / 3.0};
}

double l2_norm_vector_error(const FESpace& space, const Eigen::VectorXd& coeffs,
                            const VectorField& exact, double* div_err = nullptr) {
    const Mesh& mesh = space.mesh();
    const auto& tq = TriangleQuadrature::of_degree(2 * space.degree() + 6);
    FeField field(space, coeffs);
    double acc = 0.0, dacc = 0.0;
    std::vector<Vec2> pts(tq.size()), vals(tq.size());
    std::vector<double> divs(tq.size());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        for (int q = 0; q < tq.size(); ++q)
            pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                               mesh.vertex(cell[2]));
        field.eval_vector(c, pts.data(), tq.size(), vals.data(), divs.data());
        double jac = 2.0 * mesh.cell_area(c);
        for (int q = 0; q < tq.size(); ++q) {
            Vec2 diff = vals[q] - exact(pts[q]);
            acc += jac * tq.weights[q] * dot(diff, diff);
            dacc += jac * tq.weights[q] * divs[q] * divs[q];  // exact fields here are div-free
        }
    }
    if (div_err) *div_err = std::sqrt(dacc);
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("dof counts on the 2x2 structured square") {
    Mesh m = Mesh::structured(2, 2);
    CHECK(FESpace(m, SpaceKind::RTk, 0).n_dofs() == 16);   // one per facet
    CHECK(FESpace(m, SpaceKind::PkDisc, 0).n_dofs() == 8);  // one per cell
    CHECK(FESpace(m, SpaceKind::VectorPkDisc, 1).n_dofs() == 48);
    CHECK(FESpace(m, SpaceKind::LagrangeCont, 1).n_dofs() == 9);
    CHECK(FESpace(m, SpaceKind::LagrangeCont, 2).n_dofs() == 25);  // vertices + edges
    CHECK(FESpace(m, SpaceKind::RTk, 1).n_dofs() == 2 * 16 + 2 * 8);
    CHECK_THROWS_WITH_AS(FESpace(m, SpaceKind::RTk, 3), doctest::Contains("UnsupportedDegree"),
                         std::runtime_error);
}

TEST_CASE("lagrange partition of unity and curl convention") {
    Mesh m = Mesh::structured(3, 3);
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> unif(0.05, 0.28);
    for (int d = 1; d <= 3; ++d) {
        FESpace space(m, SpaceKind::LagrangeCont, d);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.n_dofs());
        FeField field(space, ones);
        for (int trial = 0; trial < 20; ++trial) {
            Vec2 p{unif(rng), unif(rng)};
            int c = m.find_cell(p);
            REQUIRE(c >= 0);
            double v;
            Vec2 g;
            field.eval_scalar(c, &p, 1, &v, &g);
            CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(g.x) < 1e-10);
            CHECK(std::abs(g.y) < 1e-10);
        }
    }

    // curl of theta(x,y) = x is the rotated gradient (dtheta/dy, -dtheta/dx) = (0, -1)
    FESpace space(m, SpaceKind::LagrangeCont, 1);
    Eigen::VectorXd coeffs = interpolate_nodal(space, [](const Vec2& p) { return p.x; });
    FeField field(space, coeffs);
    Vec2 p{0.41, 0.17};
    int c = m.find_cell(p);
    double v;
    Vec2 g;
    field.eval_scalar(c, &p, 1, &v, &g);
    Vec2 curl{g.y, -g.x};
    CHECK(curl.x == doctest::Approx(0.0));
    CHECK(curl.y == doctest::Approx(-1.0));
}

TEST_CASE("lagrange fields are continuous across interior facets") {
    Mesh m = Mesh::structured(3, 2);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int d = 2; d <= 3; ++d) {
        FESpace space(m, SpaceKind::LagrangeCont, d);
        Eigen::VectorXd coeffs(space.n_dofs());
        for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = unif(rng);
        FeField field(space, coeffs);
        for (int f = 0; f < m.n_facets(); ++f) {
            const Facet& fac = m.facet(f);
            if (!fac.couples_two_cells()) continue;
            for (double s : {0.21, 0.5, 0.83}) {
                Vec2 x = m.vertex(fac.v0) + s * (m.vertex(fac.v1) - m.vertex(fac.v0));
                double va, vb;
                field.eval_scalar(fac.cells[0], &x, 1, &va);
                field.eval_scalar(fac.cells[1], &x, 1, &vb);
                CHECK(std::abs(va - vb) < 1e-11);
            }
        }
    }
}

TEST_CASE("RT0 basis has constant divergence per basis function") {
    Mesh m = Mesh::from_arrays({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    FESpace rt(m, SpaceKind::RTk, 0);
    CellEval ev = rt.evaluator(0);
    Vec2 pts[3] = {{0.2, 0.2}, {0.6, 0.1}, {0.1, 0.55}};
    std::vector<Vec2> vals(3 * 3);
    std::vector<double> divs(3 * 3);
    ev.eval_vector(pts, 3, vals.data(), divs.data());
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(divs[i * 3 + 0] - divs[i * 3 + 1]) < 1e-12);
        CHECK(std::abs(divs[i * 3 + 0] - divs[i * 3 + 2]) < 1e-12);
    }
}

TEST_CASE("RT interpolation reproduces constants and linear divergence") {
    Mesh m = Mesh::structured(3, 3);
    FESpace rt(m, SpaceKind::RTk, 0);

    SUBCASE("constant field is reproduced exactly") {
        Eigen::VectorXd coeffs = interpolate_rt(rt, [](const Vec2&) { return Vec2{1, 0}; });
        FeField field(rt, coeffs);
        Vec2 p{0.37, 0.59};
        int c = m.find_cell(p);
        Vec2 val;
        field.eval_vector(c, &p, 1, &val);
        CHECK(val.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(val.y) < 1e-12);
    }

    SUBCASE("div of the interpolant of (x,y) is 2 cellwise") {
        Eigen::VectorXd coeffs = interpolate_rt(rt, [](const Vec2& p) { return p; });
        FeField field(rt, coeffs);
        for (int c = 0; c < m.n_cells(); c += 3) {
            const auto& cell = m.cell(c);
            Vec2 centroid =
                (m.vertex(cell[0]) + m.vertex(cell[1]) + m.vertex(cell[2])) / 3.0;
            Vec2 val;
            double dv;
            field.eval_vector(c, &centroid, 1, &val, &dv);
            CHECK(dv == doctest::Approx(2.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("commuting diagram: div interpolate_rt = project_l2 of div") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Mesh m = Mesh::structured(3, 2);
    for (int k = 0; k <= 1; ++k) {
        FESpace rt(m, SpaceKind::RTk, k);
        FESpace qh(m, SpaceKind::PkDisc, k);
        for (int trial = 0; trial < 20; ++trial) {
            // random polynomial vector field of degree <= k+1
            std::vector<double> cx, cy;
            for (int i = 0; i < (k + 2) * (k + 3) / 2; ++i) {
                cx.push_back(unif(rng));
                cy.push_back(unif(rng));
            }
            auto poly = [&](const Vec2& p) {
                double vx = 0, vy = 0;
                int idx = 0;
                for (int total = 0; total <= k + 1; ++total)
                    for (int a = total; a >= 0; --a, ++idx) {
                        double mono = std::pow(p.x, a) * std::pow(p.y, total - a);
                        vx += cx[idx] * mono;
                        vy += cy[idx] * mono;
                    }
                return Vec2{vx, vy};
            };
            auto div_poly = [&](const Vec2& p) {
                double d = 0;
                int idx = 0;
                for (int total = 0; total <= k + 1; ++total)
                    for (int a = total; a >= 0; --a, ++idx) {
                        int b = total - a;
                        if (a > 0) d += cx[idx] * a * std::pow(p.x, a - 1) * std::pow(p.y, b);
                        if (b > 0) d += cy[idx] * b * std::pow(p.x, a) * std::pow(p.y, b - 1);
                    }
                return d;
            };
            Eigen::VectorXd vh = interpolate_rt(rt, poly);
            Eigen::VectorXd ph = project_l2(qh, div_poly);

            // divergence of the interpolant, projected (identity on P_k)
            FeField field(rt, vh);
            Eigen::VectorXd div_vh = project_l2(qh, [&](const Vec2& p) {
                int c = m.find_cell(p);
                Vec2 val;
                double dv;
                field.eval_vector(c, &p, 1, &val, &dv);
                return dv;
            });
            CHECK((div_vh - ph).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("RT normal traces are single-valued across interior facets") {
    Mesh m = Mesh::structured(3, 3);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k <= 2; ++k) {
        FESpace rt(m, SpaceKind::RTk, k);
        Eigen::VectorXd coeffs(rt.n_dofs());
        for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = unif(rng);
        FeField field(rt, coeffs);
        for (int f = 0; f < m.n_facets(); ++f) {
            const Facet& fac = m.facet(f);
            if (!fac.couples_two_cells()) continue;
            for (double s : {0.11, 0.5, 0.92}) {
                Vec2 x = m.vertex(fac.v0) + s * (m.vertex(fac.v1) - m.vertex(fac.v0));
                Vec2 va, vb;
                field.eval_vector(fac.cells[0], &x, 1, &va);
                field.eval_vector(fac.cells[1], &x, 1, &vb);
                CHECK(std::abs(dot(va - vb, fac.normal)) < 1e-12);
            }
        }
    }
}

TEST_CASE("L2 projections: constants, cell means, and orthogonality") {
    Mesh m = Mesh::structured(2, 2);

    SUBCASE("constant reproduced in every space containing constants") {
        for (auto kind : {SpaceKind::PkDisc, SpaceKind::LagrangeCont}) {
            int d = kind == SpaceKind::PkDisc ? 0 : 1;
            FESpace s(m, kind, d);
            Eigen::VectorXd c = project_l2(s, [](const Vec2&) { return 3.25; });
            FeField field(s, c);
            Vec2 p{0.3, 0.6};
            int cell = m.find_cell(p);
            double v;
            field.eval_scalar(cell, &p, 1, &v);
            CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
        }
    }

    SUBCASE("P0 projection of x^4 - y^4 is the cell mean") {
        Mesh one = Mesh::from_arrays({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
        FESpace p0(one, SpaceKind::PkDisc, 0);
        auto f = [](const Vec2& p) { return std::pow(p.x, 4) - std::pow(p.y, 4); };
        Eigen::VectorXd c = project_l2(p0, f, 8);
        // independent oracle: mean value by high-order quadrature
        const auto& tq = TriangleQuadrature::of_degree(10);
        double mean = 0.0;
        for (int q = 0; q < tq.size(); ++q) {
            Vec2 p = tq.reference_point(q);
            mean += tq.weights[q] * f(p);
        }
        mean /= 0.5;
        CHECK(c[0] == doctest::Approx(mean).epsilon(1e-12));
    }

    SUBCASE("residual orthogonality of the projection") {
        FESpace s(m, SpaceKind::PkDisc, 1);
        auto f = [](const Vec2& p) { return std::sin(3 * p.x) + p.y * p.y * p.y; };
        Eigen::VectorXd c = project_l2(s, f, 10);
        FeField field(s, c);
        // residual integrated against every basis function ~ 0
        const auto& tq = TriangleQuadrature::of_degree(12);
        std::vector<Vec2> pts(tq.size());
        std::vector<double> fv(tq.size());
        std::vector<double> basis(static_cast<size_t>(s.n_cell_dofs()) * tq.size());
        std::vector<int> dofs;
        Eigen::VectorXd residual = Eigen::VectorXd::Zero(s.n_dofs());
        for (int cell = 0; cell < m.n_cells(); ++cell) {
            const auto& cv = m.cell(cell);
            for (int q = 0; q < tq.size(); ++q)
                pts[q] = tq.map_to(q, m.vertex(cv[0]), m.vertex(cv[1]), m.vertex(cv[2]));
            field.eval_scalar(cell, pts.data(), tq.size(), fv.data());
            CellEval ev = s.evaluator(cell);
            ev.eval_scalar(pts.data(), tq.size(), basis.data());
            s.cell_dofs(cell, dofs);
            double jac = 2.0 * m.cell_area(cell);
            for (int i = 0; i < s.n_cell_dofs(); ++i)
                for (int q = 0; q < tq.size(); ++q)
                    residual[dofs[i]] +=
                        jac * tq.weights[q] * (f(pts[q]) - fv[q]) * basis[i * tq.size() + q];
        }
        CHECK(residual.lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("interpolation and projection convergence rates") {
    SUBCASE("RT0 interpolation of the manufactured velocity: rate ~ 1 in H(div)") {
        std::vector<double> errs;
        for (int n : {4, 8, 16}) {
            Mesh m = Mesh::structured(n, n);
            FESpace rt(m, SpaceKind::RTk, 0);
            Eigen::VectorXd coeffs = interpolate_rt(rt, test1_velocity);
            double derr = 0.0;
            double err = l2_norm_vector_error(rt, coeffs, test1_velocity, &derr);
            errs.push_back(std::sqrt(err * err + derr * derr));
        }
        double rate1 = std::log2(errs[0] / errs[1]);
        double rate2 = std::log2(errs[1] / errs[2]);
        CHECK(std::abs(rate1 - 1.0) < 0.2);
        CHECK(std::abs(rate2 - 1.0) < 0.1);
    }

    SUBCASE("P0 projection of the manufactured pressure: rate ~ 1") {
        auto pressure = [](const Vec2& p) { return std::pow(p.x, 4) - std::pow(p.y, 4); };
        std::vector<double> errs;
        for (int n : {4, 8, 16}) {
            Mesh m = Mesh::structured(n, n);
            FESpace q(m, SpaceKind::PkDisc, 0);
            Eigen::VectorXd coeffs = project_l2(q, pressure, 8);
            FeField field(q, coeffs);
            const auto& tq = TriangleQuadrature::of_degree(9);
            double acc = 0.0;
            std::vector<Vec2> pts(tq.size());
            std::vector<double> vals(tq.size());
            for (int c = 0; c < m.n_cells(); ++c) {
                const auto& cell = m.cell(c);
                for (int qq = 0; qq < tq.size(); ++qq)
                    pts[qq] = tq.map_to(qq, m.vertex(cell[0]), m.vertex(cell[1]),
                                        m.vertex(cell[2]));
                field.eval_scalar(c, pts.data(), tq.size(), vals.data());
                for (int qq = 0; qq < tq.size(); ++qq) {
                    double diff = vals[qq] - pressure(pts[qq]);
                    acc += 2.0 * m.cell_area(c) * tq.weights[qq] * diff * diff;
                }
            }
            errs.push_back(std::sqrt(acc));
        }
        double rate2 = std::log2(errs[1] / errs[2]);
        CHECK(std::abs(rate2 - 1.0) < 0.1);
    }
}
