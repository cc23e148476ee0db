#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oseen/diagnostics.hpp"
#include "oseen/driver.hpp"
#include "oseen/mixed_assembly.hpp"

using namespace oseen;

namespace {

Mesh reference_cell() { return Mesh::from_arrays({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}}); }

Eigen::MatrixXd dense(const SparseMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k)
            d(r, m.col_indices[k]) += m.values[k];
    return d;
}

/// Independent fine-quadrature integration of a product of basis functions:
/// the oracle path does not share the assembly loops.
template <typename Integrand>
double fine_cell_integral(const Mesh& mesh, int cell, int degree, const Integrand& f) {
    const auto& tq = TriangleQuadrature::of_degree(degree);
    const auto& cv = mesh.cell(cell);
    double acc = 0.0;
    for (int q = 0; q < tq.size(); ++q) {
        Vec2 x = tq.map_to(q, mesh.vertex(cv[0]), mesh.vertex(cv[1]), mesh.vertex(cv[2]));
        acc += 2.0 * mesh.cell_area(cell) * tq.weights[q] * f(x);
    }
    return acc;
}

}  // namespace

TEST_CASE("assemble_a: single-cell RT0 mass against a fine-quadrature oracle") {
    Mesh m = reference_cell();
    FESpace rt(m, SpaceKind::RTk, 0);
    SparseMatrix a1 = assemble_a(rt, 1.0);
    Eigen::MatrixXd A = dense(a1);
    REQUIRE(A.rows() == 3);

    // SPD
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK((A - A.transpose()).lpNorm<Eigen::Infinity>() < 1e-14);

    FeField basis_i(rt, Eigen::VectorXd::Zero(3));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double oracle = fine_cell_integral(m, 0, 12, [&](const Vec2& x) {
                CellEval ev = rt.evaluator(0);
                Vec2 vals[3];
                ev.eval_vector(&x, 1, vals);
                return dot(vals[i], vals[j]);
            });
            CHECK(A(i, j) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }

    // linearity in sigma
    CHECK(dense(assemble_a(rt, 0.0)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((dense(assemble_a(rt, 10.0)) - 10.0 * A).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("assemble_b1: zero columns for constant vorticity, nu scaling, oracle") {
    Mesh m = Mesh::structured(2, 2);
    FESpace rt(m, SpaceKind::RTk, 0);
    FESpace z(m, SpaceKind::LagrangeCont, 1);
    double nu = 0.1;
    SparseMatrix b1 = assemble_b1(rt, z, nu);

    // constant theta has zero curl: B1^T * ones = 0 over the H block
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(z.n_dofs());
    Eigen::MatrixXd B1 = dense(b1);
    CHECK((B1.transpose() * ones).lpNorm<Eigen::Infinity>() < 1e-13);

    SparseMatrix b1_2nu = assemble_b1(rt, z, 2.0 * nu);
    CHECK((dense(b1_2nu) - std::sqrt(2.0) * B1).lpNorm<Eigen::Infinity>() < 1e-13);

    // single-cell value for theta = x against fine quadrature
    Mesh one = reference_cell();
    FESpace rt1(one, SpaceKind::RTk, 0);
    FESpace z1(one, SpaceKind::LagrangeCont, 1);
    Eigen::VectorXd theta = interpolate_nodal(z1, [](const Vec2& p) { return p.x; });
    Eigen::VectorXd form = dense(assemble_b1(rt1, z1, nu)).transpose() * theta;
    for (int i = 0; i < 3; ++i) {
        // b1(v_i, x) = sqrt(nu) int curl(x) . v_i = sqrt(nu) int (0,-1) . v_i
        double oracle = std::sqrt(nu) * fine_cell_integral(one, 0, 10, [&](const Vec2& x) {
            CellEval ev = rt1.evaluator(0);
            Vec2 vals[3];
            ev.eval_vector(&x, 1, vals);
            return -vals[i].y;
        });
        CHECK(form[i] == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("assemble_b2: kernel, divergence theorem, oracle") {
    Mesh one = reference_cell();
    FESpace rt(one, SpaceKind::RTk, 0);
    FESpace q(one, SpaceKind::PkDisc, 0);
    SparseMatrix b2 = assemble_b2(rt, q);

    // divergence-free field -> B2 v = 0
    Eigen::VectorXd vfree = interpolate_rt(rt, [](const Vec2&) { return Vec2{1, 0}; });
    CHECK((dense(b2) * vfree).lpNorm<Eigen::Infinity>() < 1e-13);

    // v = (x, y): total outflux 2*area = 1, so b2(v, 1) = -1
    Eigen::VectorXd vxy = interpolate_rt(rt, [](const Vec2& p) { return p; });
    Eigen::VectorXd b2v = dense(b2) * vxy;
    CHECK(b2v[0] == doctest::Approx(-1.0).epsilon(1e-13));

    // entrywise oracle
    Eigen::MatrixXd B2 = dense(b2);
    for (int j = 0; j < 3; ++j) {
        double oracle = -fine_cell_integral(one, 0, 10, [&](const Vec2& x) {
            CellEval ev = rt.evaluator(0);
            Vec2 vals[3];
            double divs[3];
            ev.eval_vector(&x, 1, vals, divs);
            return divs[j];
        });
        CHECK(B2(0, j) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("assemble_c: convention value and manufactured-beta oracle") {
    // unit-area cell, beta=(1,0), theta=1, v=(0,1): c = 1/sqrt(nu)
    Mesh one = Mesh::from_arrays({{0, 0}, {2, 0}, {0, 1}}, {{{0, 1, 2}}});
    REQUIRE(one.cell_area(0) == doctest::Approx(1.0));
    FESpace rt(one, SpaceKind::RTk, 0);
    FESpace z(one, SpaceKind::LagrangeCont, 1);
    double nu = 0.1;

    SparseMatrix zero_c =
        assemble_c(z, rt, nu, ConvectiveField::zero());
    CHECK(dense(zero_c).lpNorm<Eigen::Infinity>() == 0.0);

    auto beta10 = ConvectiveField::from_function([](const Vec2&) { return Vec2{1, 0}; });
    double beta_inf = 0.0;
    SparseMatrix c = assemble_c(z, rt, nu, beta10, &beta_inf);
    CHECK(beta_inf == doctest::Approx(1.0));
    Eigen::VectorXd theta = Eigen::VectorXd::Ones(z.n_dofs());
    Eigen::VectorXd v01 = interpolate_rt(rt, [](const Vec2&) { return Vec2{0, 1}; });
    double value = v01.dot(dense(c) * theta);
    CHECK(value == doctest::Approx(1.0 / std::sqrt(nu)).epsilon(1e-12));

    // Test-1 convective field against a fine-quadrature oracle; the
    // assembled value carries the form's own quadrature error on this
    // deliberately large cell, so the comparison is loose (sign and
    // convention errors are O(1))
    Scenario sc = scenario_test1();
    SparseMatrix cman = assemble_c(z, rt, nu, sc.beta);
    Eigen::MatrixXd C = dense(cman);
    for (int i = 0; i < 3; ++i) {
        double oracle = fine_cell_integral(one, 0, 18, [&](const Vec2& x) {
            CellEval ev = rt.evaluator(0);
            CellEval ez = z.evaluator(0);
            Vec2 vals[3];
            double th[3];
            ev.eval_vector(&x, 1, vals);
            ez.eval_scalar(&x, 1, th);
            Vec2 b = sc.beta.analytic(x);
            return th[0] * cross(b, vals[i]) / std::sqrt(nu);
        });
        CHECK(C(i, 0) == doctest::Approx(oracle).epsilon(0.05));
    }
}

TEST_CASE("assemble_d: vorticity mass matrix") {
    Mesh one = reference_cell();
    FESpace z(one, SpaceKind::LagrangeCont, 1);
    Eigen::MatrixXd D = dense(assemble_d(z));
    CHECK((D - D.transpose()).lpNorm<Eigen::Infinity>() < 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // P1 mass on the reference triangle: diag 1/12, offdiag 1/24
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(D(i, j) == doctest::Approx(i == j ? 1.0 / 12 : 1.0 / 24).epsilon(1e-13));
}

TEST_CASE("assemble_rhs: zero data, volume force oracle, sigma data errors") {
    Mesh m = Mesh::structured(2, 2);
    m.tag_all_gamma();
    FESpace rt(m, SpaceKind::RTk, 0);
    FESpace z(m, SpaceKind::LagrangeCont, 1);
    FESpace q(m, SpaceKind::PkDisc, 0);
    SchemeSpaces spaces{&rt, &z, &q};

    OseenParams p;
    p.nu = 0.1;
    p.sigma = 10.0;
    CHECK(assemble_rhs(p, spaces).lpNorm<Eigen::Infinity>() == 0.0);

    p.f = [](const Vec2&) { return Vec2{1, 0}; };
    Eigen::VectorXd rhs = assemble_rhs(p, spaces);
    // u-block entries are the integrals of the first basis component
    for (int f = 0; f < 4; ++f) {
        double oracle = 0.0;
        for (int c = 0; c < m.n_cells(); ++c) {
            bool touches = false;
            for (int lf = 0; lf < 3; ++lf) touches |= m.cell_facet(c, lf) == f;
            if (!touches) continue;
            std::vector<int> dofs;
            rt.cell_dofs(c, dofs);
            int local = -1;
            for (size_t i = 0; i < dofs.size(); ++i)
                if (dofs[i] == f) local = static_cast<int>(i);
            oracle += fine_cell_integral(m, c, 10, [&](const Vec2& x) {
                CellEval ev = rt.evaluator(c);
                Vec2 vals[3];
                ev.eval_vector(&x, 1, vals);
                return vals[local].x;
            });
        }
        CHECK(rhs[f] == doctest::Approx(oracle).epsilon(1e-12));
    }

    // Sigma data with no Sigma facets
    p.p_sigma = [](const Vec2&) { return 1.0; };
    CHECK_THROWS_WITH_AS(assemble_rhs(p, spaces), doctest::Contains("SigmaDataOnGamma"),
                         std::runtime_error);

    // with Sigma facets, G picks up -sqrt(nu) <u_sigma, theta>
    Mesh ms = Mesh::structured(2, 2);
    ms.tag_boundary([](const Vec2& pt) { return pt.y > 1e-9; },
                    [](const Vec2& pt) { return pt.y <= 1e-9; });
    FESpace rts(ms, SpaceKind::RTk, 0);
    FESpace zs(ms, SpaceKind::LagrangeCont, 1);
    FESpace qs(ms, SpaceKind::PkDisc, 0);
    OseenParams ps;
    ps.nu = 0.25;
    ps.sigma = 1.0;
    ps.u_sigma = [](const Vec2&) { return 1.0; };
    Eigen::VectorXd rs = assemble_rhs(ps, {&rts, &zs, &qs});
    // sum over vorticity dofs = -sqrt(nu) * integral of 1 over Sigma = -0.5 * 1
    double total = rs.segment(rts.n_dofs(), zs.n_dofs()).sum();
    CHECK(total == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("mixed system: structure, kernel exactness, gauge, inf-sup rank") {
    Scenario sc = scenario_test1();
    auto mesh = sc.make_structured_mesh(4);
    auto disc = Discretisation::make(mesh, Scheme::Mixed, 0);
    SaddleSystem sys = assemble_mixed_system(sc.params(), disc.spaces(), sc.gamma, true);
    CHECK(sys.size() == 114);
    CHECK(sys.beta_inf > 0.3);
    CHECK(sc.params().solvability_indicator(sys.beta_inf) < 1.0);

    SolutionTriple sol = solve_steady(sc, disc);
    CHECK(divergence_linf(sol) < 1e-10);
    CHECK(std::abs(sol.p.dot(disc.Q->basis_integrals())) < 1e-10);

    SUBCASE("b1 appears with its transpose across the diagonal") {
        // on an all-Sigma mesh no essential constraints disturb the blocks
        Mesh ms = Mesh::structured(3, 3);
        ms.tag_boundary([](const Vec2&) { return false; }, [](const Vec2&) { return true; });
        FESpace rt(ms, SpaceKind::RTk, 0);
        FESpace z(ms, SpaceKind::LagrangeCont, 1);
        FESpace q(ms, SpaceKind::PkDisc, 0);
        OseenParams p = sc.params();
        SaddleSystem s2 = assemble_mixed_system(p, {&rt, &z, &q}, {}, false);
        Eigen::MatrixXd A = dense(s2.matrix);
        int nu_ = rt.n_dofs(), nw = z.n_dofs();
        Eigen::MatrixXd upper = A.block(0, nu_, nu_, nw);  // b1(v,w) + c(w,v)
        Eigen::MatrixXd lower = A.block(nu_, 0, nw, nu_);  // b1(u,th)
        Eigen::MatrixXd C = dense(assemble_c(z, rt, p.nu, p.beta));
        CHECK((upper - C - lower.transpose()).lpNorm<Eigen::Infinity>() < 1e-14);
    }

    SUBCASE("zero data gives the zero solution") {
        Scenario zc = scenario_zero();
        auto mz = zc.make_structured_mesh(4);
        auto dz = Discretisation::make(mz, Scheme::Mixed, 1);
        SolutionTriple s = solve_steady(zc, dz);
        CHECK(s.u.lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK(s.w.lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK(s.p.lpNorm<Eigen::Infinity>() < 1e-12);
    }

    SUBCASE("discrete inf-sup smoke: b2 has full row rank modulo constants") {
        Eigen::MatrixXd A = dense(sys.matrix);
        int ou = 0, op = sys.offset_p();
        Eigen::MatrixXd B2 = A.block(op, ou, sys.n_p, sys.n_u);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B2);
        qr.setThreshold(1e-10);
        CHECK(qr.rank() == sys.n_p - 1);
    }

    SUBCASE("error paths") {
        FESpace wrong(*mesh, SpaceKind::PkDisc, 1);  // degree does not match k=0
        CHECK_THROWS_WITH_AS(
            assemble_mixed_system(sc.params(), {disc.H.get(), disc.Z.get(), &wrong}, sc.gamma,
                                  true),
            doctest::Contains("InconsistentSpaces"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            assemble_mixed_system(sc.params(), disc.spaces(), sc.gamma, false),
            doctest::Contains("NoPressureGauge"), std::runtime_error);
    }
}

TEST_CASE("coercivity inequality on random discrete pairs") {
    Scenario sc = scenario_test1();
    auto mesh = sc.make_structured_mesh(8);
    FESpace rt(*mesh, SpaceKind::RTk, 0);
    FESpace z(*mesh, SpaceKind::LagrangeCont, 1);
    OseenParams p = sc.params();
    double beta_inf = 0.0;
    Eigen::MatrixXd A = dense(assemble_a(rt, p.sigma));
    Eigen::MatrixXd M = A / p.sigma;
    Eigen::MatrixXd D = dense(assemble_d(z));
    Eigen::MatrixXd K = dense(assemble_c(z, rt, p.nu, p.beta, &beta_inf));
    double margin = 1.0 - 2.0 * beta_inf * beta_inf / (p.nu * p.sigma);
    REQUIRE(margin > 0.0);

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd v(rt.n_dofs()), th(z.n_dofs());
        for (int i = 0; i < v.size(); ++i) v[i] = unif(rng);
        for (int i = 0; i < th.size(); ++i) th[i] = unif(rng);
        double lhs = v.dot(A * v) + th.dot(D * th) + v.dot(K * th);
        double rhs = 0.5 * p.sigma * v.dot(M * v) + margin * th.dot(D * th);
        CHECK(lhs >= rhs - 1e-10);
    }
}
