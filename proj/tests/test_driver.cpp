#include <cmath>
#include <random>

#include "doctest.h"
#include "oseen/diagnostics.hpp"
#include "oseen/driver.hpp"

using namespace oseen;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Central finite differences, the independent oracle for the hand-derived
/// derivatives of the manufactured fields.
template <typename F>
double fd_x(const F& f, const Vec2& p, double h = 1e-6) {
    return (f({p.x + h, p.y}) - f({p.x - h, p.y})) / (2 * h);
}
template <typename F>
double fd_y(const F& f, const Vec2& p, double h = 1e-6) {
    return (f({p.x, p.y + h}) - f({p.x, p.y - h})) / (2 * h);
}

/// Independent restatement of the Kelvin-Helmholtz initial profile using
/// exponential forms of tanh and a regrouped gaussian.
Vec2 kh_reference(const Vec2& p) {
    const double cn = 1e-3, uinf = 1.0, d0 = 1.0 / 28.0;
    const double wa = 8.0 * kPi, wb = 20.0 * kPi;
    double Y = (2.0 * p.y - 1.0) / d0;
    double e2 = std::exp(2.0 * Y);
    double tanhY = (e2 - 1.0) / (e2 + 1.0);
    double gauss = std::exp(-0.25 * Y * Y);
    double u1 = uinf * tanhY -
                cn * uinf * (std::cos(wa * p.x) + std::cos(wb * p.x)) * (Y / d0) * gauss;
    double u2 = cn * uinf * gauss * (wa * std::sin(wa * p.x) + wb * std::sin(wb * p.x));
    return {u1, u2};
}

}  // namespace

TEST_CASE("manufactured solution: derivatives verified by finite differences") {
    Scenario sc = scenario_test1();
    const auto& ex = *sc.exact;
    double nu = sc.nu, sigma = sc.sigma;
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    for (int trial = 0; trial < 25; ++trial) {
        Vec2 p{unif(rng), unif(rng)};
        Vec2 u = ex.velocity(p);

        // divergence-free velocity
        double div = fd_x([&](const Vec2& q) { return ex.velocity(q).x; }, p) +
                     fd_y([&](const Vec2& q) { return ex.velocity(q).y; }, p);
        CHECK(std::abs(div) < 1e-7);

        // omega = sqrt(nu) (d u2/dx - d u1/dy)
        double curl = fd_x([&](const Vec2& q) { return ex.velocity(q).y; }, p) -
                      fd_y([&](const Vec2& q) { return ex.velocity(q).x; }, p);
        CHECK(ex.vorticity(p) == doctest::Approx(std::sqrt(nu) * curl).epsilon(1e-6));

        // gradient of the scaled vorticity
        Vec2 g = ex.vorticity_grad(p);
        CHECK(g.x == doctest::Approx(fd_x(ex.vorticity, p)).epsilon(1e-6));
        CHECK(g.y == doctest::Approx(fd_y(ex.vorticity, p)).epsilon(1e-6));

        // momentum residual: f = sigma u + sqrt(nu) curl omega
        //                        + (omega x beta)/sqrt(nu) + grad p
        Vec2 curl_w{fd_y(ex.vorticity, p), -fd_x(ex.vorticity, p)};
        double w = ex.vorticity(p);
        Vec2 grad_p{fd_x(ex.pressure, p), fd_y(ex.pressure, p)};
        Vec2 f = sc.forcing(p);
        CHECK(f.x == doctest::Approx(sigma * u.x + std::sqrt(nu) * curl_w.x -
                                     w / std::sqrt(nu) * u.y + grad_p.x)
                         .epsilon(1e-5));
        CHECK(f.y == doctest::Approx(sigma * u.y + std::sqrt(nu) * curl_w.y +
                                     w / std::sqrt(nu) * u.x + grad_p.y)
                         .epsilon(1e-5));
    }
}

TEST_CASE("kh initial velocity: centreline, asymptote, dual implementation") {
    Vec2 centre = kh_initial_velocity({0.0, 0.5});
    CHECK(centre.x == doctest::Approx(0.0));
    CHECK(centre.y == doctest::Approx(0.0));

    // near the wall the tanh term dominates and approaches u_inf
    Vec2 top = kh_initial_velocity({0.3, 1.0});
    CHECK(top.x == doctest::Approx(1.0).epsilon(1e-9));

    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            Vec2 p{i / 4.0 + 0.03, j / 4.0 + 0.05};
            Vec2 a = kh_initial_velocity(p);
            Vec2 b = kh_reference(p);
            CHECK(a.x == doctest::Approx(b.x).epsilon(1e-14));
            CHECK(a.y == doctest::Approx(b.y).epsilon(1e-14));
        }
    }
}

TEST_CASE("steady solve: manufactured convergence smoke and solvability") {
    Scenario sc = scenario_test1();
    std::vector<double> errs;
    for (int n : {4, 8, 16}) {
        auto disc = Discretisation::make(sc.make_structured_mesh(n), Scheme::Mixed, 0);
        SolutionTriple sol = solve_steady(sc, disc);
        CHECK(sol.solvability < 1.0);
        CHECK(sol.report.relative_residual < 1e-10);
        CHECK(divergence_linf(sol) < 1e-10);
        errs.push_back(error_norms(sol, *sc.exact).err_u_Hdiv);
    }
    auto rates = fit_rates(errs);
    CHECK(std::abs(rates.back() - 1.0) < 0.1);
}

TEST_CASE("transient: zero data stays zero and sigma dt = 1") {
    Scenario sc = scenario_zero();
    auto disc = Discretisation::make(sc.make_structured_mesh(4), Scheme::Mixed, 0);
    TimeLoopConfig cfg;
    cfg.dt = 0.1;
    cfg.n_steps = 1;
    CHECK(cfg.sigma() * cfg.dt == doctest::Approx(1.0));
    TransientResult r = run_transient(cfg, sc, disc);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.final.u.lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(r.steps[1].enstrophy < 1e-20);
}

TEST_CASE("transient: stationary data make the step map a fixed point") {
    Scenario sc = scenario_test1();
    auto disc = Discretisation::make(sc.make_structured_mesh(8), Scheme::Mixed, 0);

    TimeLoopConfig cfg;
    cfg.dt = 1.0 / sc.sigma;
    cfg.n_steps = 2;
    cfg.update_beta = false;
    cfg.couple_previous = false;  // frozen data: every step resolves the same system

    std::vector<Eigen::VectorXd> uh;
    TransientResult r = run_transient(cfg, sc, disc,
                                      [&](int, double, const SolutionTriple& s) {
                                          uh.push_back(s.u);
                                      });
    REQUIRE(uh.size() == 3);
    SolutionTriple steady = solve_steady(sc, disc);
    CHECK((uh[1] - steady.u).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((uh[2] - uh[1]).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("transient: open cavity steps stay divergence-free (mixed)") {
    Scenario sc = scenario_cavity();
    auto mesh = std::make_shared<Mesh>(cavity_mesh(1));
    sc.apply_tags(*mesh);
    auto disc = Discretisation::make(mesh, Scheme::Mixed, 0);

    TimeLoopConfig cfg;
    cfg.dt = 0.1;
    cfg.n_steps = 2;
    TransientResult r = run_transient(cfg, sc, disc);
    REQUIRE(r.steps.size() == 3);
    for (size_t i = 1; i < r.steps.size(); ++i) {
        CHECK(r.steps[i].div_linf < 1e-10);
        CHECK(std::isfinite(r.steps[i].enstrophy));
        CHECK(r.steps[i].enstrophy > 0.0);
    }
    // inflow data enters: the solution is not identically zero
    CHECK(r.final.u.lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("transient: Kelvin-Helmholtz on a coarse periodic mesh (DG)") {
    Scenario sc = scenario_kh();
    auto mesh = std::make_shared<Mesh>(Mesh::structured(8, 8));
    sc.apply_tags(*mesh);
    auto disc = Discretisation::make(mesh, Scheme::Dg, 0);

    TimeLoopConfig cfg;
    cfg.dt = 1.0 / sc.sigma;
    cfg.n_steps = 2;
    TransientResult r = run_transient(cfg, sc, disc);
    REQUIRE(r.steps.size() == 3);
    for (const auto& s : r.steps) {
        CHECK(std::isfinite(s.enstrophy));
        CHECK(std::isfinite(s.palinstrophy));
        CHECK(s.enstrophy > 0.0);
    }
}

TEST_CASE("stokes initialisation produces a finite nonzero field") {
    Scenario sc = scenario_cavity();
    auto mesh = std::make_shared<Mesh>(cavity_mesh(1));
    sc.apply_tags(*mesh);
    auto disc = Discretisation::make(mesh, Scheme::Mixed, 0);
    TimeLoopConfig cfg;
    cfg.dt = 0.1;
    cfg.n_steps = 1;
    cfg.initial_condition = TimeLoopConfig::Init::StokesSolve;
    TransientResult r = run_transient(cfg, sc, disc);
    CHECK(std::isfinite(r.steps[0].enstrophy));
    CHECK(r.final.u.lpNorm<Eigen::Infinity>() > 1e-6);
    CHECK(r.steps[1].div_linf < 1e-10);
}

TEST_CASE("cavity mesh geometry") {
    Mesh m = cavity_mesh(1);
    // main chamber + inlet + outlet areas
    CHECK(std::abs(m.total_area() - (1.2 + 0.02 + 0.02)) < 1e-12);
    CHECK(m.n_vertices() - m.n_facets() + m.n_cells() == 1);
    Scenario sc = scenario_cavity();
    sc.apply_tags(m);
    // boundary data: inflow/outflow fluxes balance
    double flux = 0.0;
    const auto& gl = GaussLegendre::with_points(6);
    for (int f : m.gamma_facets()) {
        const Facet& fac = m.facet(f);
        Vec2 p0 = m.vertex(fac.v0), p1 = m.vertex(fac.v1);
        for (size_t q = 0; q < gl.points.size(); ++q) {
            Vec2 x = p0 + gl.points[q] * (p1 - p0);
            flux += gl.weights[q] * norm(p1 - p0) * sc.gamma.u_normal(x);
        }
    }
    CHECK(std::abs(flux) < 1e-12);
}

TEST_CASE("scenario registry") {
    CHECK(scenario_by_name("test1").exact.has_value());
    CHECK(scenario_by_name("kh").periodic.has_value());
    CHECK_THROWS(scenario_by_name("nope"));
}
