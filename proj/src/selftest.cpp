#include "oseen/selftest.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oseen/dg_assembly.hpp"
#include "oseen/diagnostics.hpp"
#include "oseen/driver.hpp"
#include "oseen/quadrature.hpp"

namespace oseen {

namespace {

double quadratic_form(const SparseMatrix& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
    return x.dot(m.apply(y));
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
    // compare as dense on the small selftest meshes
    double m = 0.0;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(a.cols);
    for (int j = 0; j < a.cols; ++j) {
        e.setZero();
        e[j] = 1.0;
        m = std::max(m, (a.apply(e) - b.apply(e)).lpNorm<Eigen::Infinity>());
    }
    return m;
}

}  // namespace

std::vector<CheckResult> run_selftest(const OseenParams& params) {
    std::vector<CheckResult> results;
    auto check = [&](const std::string& name, auto&& fn) {
        CheckResult r;
        r.name = name;
        try {
            std::ostringstream detail;
            r.pass = fn(detail);
            r.detail = detail.str();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = e.what();
        }
        results.push_back(std::move(r));
    };

    check("quadrature exactness", [](std::ostringstream& d) {
        double worst = 0.0;
        for (int deg = 0; deg <= 8; ++deg) {
            const auto& tq = TriangleQuadrature::of_degree(deg);
            for (int a = 0; a + 0 <= deg; ++a)
                for (int b = 0; a + b <= deg; ++b) {
                    double acc = 0.0;
                    for (int q = 0; q < tq.size(); ++q) {
                        Vec2 p = tq.reference_point(q);
                        acc += tq.weights[q] * std::pow(p.x, a) * std::pow(p.y, b);
                    }
                    // exact value a! b! / (a+b+2)!
                    double num = 1.0, den = 1.0;
                    for (int i = 2; i <= a; ++i) num *= i;
                    for (int i = 2; i <= b; ++i) num *= i;
                    for (int i = 2; i <= a + b + 2; ++i) den *= i;
                    worst = std::max(worst, std::abs(acc - num / den));
                }
        }
        d << "max monomial defect " << worst;
        return worst < 1e-14;
    });

    check("mesh consistency", [](std::ostringstream& d) {
        Mesh m = Mesh::structured(4, 4);
        double worst = 0.0;
        for (int f = 0; f < m.n_facets(); ++f) {
            const Facet& fac = m.facet(f);
            if (fac.cells[1] < 0) continue;
            Vec2 nsum{0, 0};
            for (int side = 0; side < 2; ++side)
                for (int lf = 0; lf < 3; ++lf)
                    if (m.cell_facet(fac.cells[side], lf) == f)
                        nsum += m.outward_normal(fac.cells[side], lf);
            worst = std::max(worst, norm(nsum));
        }
        bool euler = m.n_vertices() - m.n_facets() + m.n_cells() == 1;
        bool area = std::abs(m.total_area() - 1.0) < 1e-12;
        bool halving =
            Mesh::structured(8, 8).mesh_size() == m.mesh_size() / 2.0;
        d << "normal defect " << worst;
        return worst < 1e-14 && euler && area && halving;
    });

    check("lagrange partition of unity", [](std::ostringstream& d) {
        Mesh m = Mesh::structured(3, 3);
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> unif(0.02, 0.31);
        double worst = 0.0;
        for (int deg = 1; deg <= 3; ++deg) {
            FESpace s(m, SpaceKind::LagrangeCont, deg);
            FeField field(s, Eigen::VectorXd::Ones(s.n_dofs()));
            for (int t = 0; t < 12; ++t) {
                Vec2 p{unif(rng), unif(rng)};
                int c = m.find_cell(p);
                double v;
                field.eval_scalar(c, &p, 1, &v);
                worst = std::max(worst, std::abs(v - 1.0));
            }
        }
        d << "max defect " << worst;
        return worst < 1e-11;
    });

    check("rt normal-trace continuity", [](std::ostringstream& d) {
        Mesh m = Mesh::structured(3, 3);
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> unif(-1, 1);
        double worst = 0.0;
        for (int k = 0; k <= 2; ++k) {
            FESpace rt(m, SpaceKind::RTk, k);
            Eigen::VectorXd c(rt.n_dofs());
            for (int i = 0; i < c.size(); ++i) c[i] = unif(rng);
            FeField f(rt, c);
            for (int fa = 0; fa < m.n_facets(); ++fa) {
                const Facet& fac = m.facet(fa);
                if (!fac.couples_two_cells()) continue;
                for (double s : {0.3, 0.71}) {
                    Vec2 x = m.vertex(fac.v0) + s * (m.vertex(fac.v1) - m.vertex(fac.v0));
                    Vec2 va, vb;
                    f.eval_vector(fac.cells[0], &x, 1, &va);
                    f.eval_vector(fac.cells[1], &x, 1, &vb);
                    worst = std::max(worst, std::abs(dot(va - vb, fac.normal)));
                }
            }
        }
        d << "max jump " << worst;
        return worst < 1e-12;
    });

    check("commuting diagram", [](std::ostringstream& d) {
        Mesh m = Mesh::structured(3, 2);
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> unif(-1, 1);
        double worst = 0.0;
        for (int k = 0; k <= 1; ++k) {
            FESpace rt(m, SpaceKind::RTk, k);
            FESpace q(m, SpaceKind::PkDisc, k);
            for (int t = 0; t < 5; ++t) {
                double a1 = unif(rng), a2 = unif(rng), a3 = unif(rng), a4 = unif(rng);
                auto v = [&](const Vec2& p) {
                    return Vec2{a1 * p.x * p.x + a2 * p.y + a3, a4 * p.x * p.y + a1};
                };
                auto dv = [&](const Vec2& p) { return 2 * a1 * p.x + a4 * p.x; };
                Eigen::VectorXd vh = interpolate_rt(rt, v);
                Eigen::VectorXd ph = project_l2(q, dv);
                FeField f(rt, vh);
                Eigen::VectorXd div_vh = project_l2(q, [&](const Vec2& p) {
                    int c = m.find_cell(p);
                    Vec2 val;
                    double divv;
                    f.eval_vector(c, &p, 1, &val, &divv);
                    return divv;
                });
                worst = std::max(worst, (div_vh - ph).lpNorm<Eigen::Infinity>());
            }
        }
        d << "max coeff defect " << worst;
        return worst < 1e-12;
    });

    check("stabilisation positivity and scaling", [&params](std::ostringstream& d) {
        Mesh coarse = Mesh::structured(2, 2);
        Mesh fine = Mesh::structured(4, 4);
        coarse.tag_all_gamma();
        fine.tag_all_gamma();
        // interior facet of matching orientation on both levels
        auto find_interior = [](const Mesh& m) {
            for (int f = 0; f < m.n_facets(); ++f)
                if (m.facet(f).couples_two_cells()) return f;
            return -1;
        };
        FacetContext c0 = make_facet_context(coarse, find_interior(coarse), params, 2);
        FacetContext c1 = make_facet_context(fine, find_interior(fine), params, 2);
        bool positive = c0.C11 > 0 && c0.A11 > 0 && c0.D11 > 0;
        bool scaling = std::abs(c1.C11 - 2 * c0.C11) < 1e-12 * std::abs(c0.C11) &&
                       std::abs(c1.A11 - 2 * c0.A11) < 1e-12 * std::abs(c0.A11) &&
                       std::abs(c1.D11 - 0.5 * c0.D11) < 1e-12 * std::abs(c0.D11);
        d << "C11 " << c0.C11 << " A11 " << c0.A11 << " D11 " << c0.D11;
        return positive && scaling;
    });

    check("j and e positive semidefinite", [&params](std::ostringstream& d) {
        Mesh m = Mesh::structured(3, 3);
        m.tag_boundary([](const Vec2& p) { return p.x < 0.5; },
                       [](const Vec2&) { return true; });
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> unif(-1, 1);
        FESpace H(m, SpaceKind::VectorPkDisc, 2);
        FESpace Q(m, SpaceKind::PkDisc, 1);
        SparseMatrix J = assemble_j(H, params);
        SparseMatrix E = assemble_e(Q, params);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 200; ++t) {
            Eigen::VectorXd x(H.n_dofs());
            for (int i = 0; i < x.size(); ++i) x[i] = unif(rng);
            worst = std::min(worst, quadratic_form(J, x, x));
            Eigen::VectorXd y(Q.n_dofs());
            for (int i = 0; i < y.size(); ++i) y[i] = unif(rng);
            worst = std::min(worst, quadratic_form(E, y, y));
        }
        d << "min quadratic form " << worst;
        return worst > -1e-12;
    });

    check("flux consistency on smooth fields", [&params](std::ostringstream& d) {
        // the numerical fluxes reduce to the trace when jumps vanish
        Mesh m = Mesh::structured(3, 3);
        m.tag_all_gamma();
        FESpace H(m, SpaceKind::VectorPkDisc, 1);
        FESpace Z(m, SpaceKind::PkDisc, 0);
        FESpace Q(m, SpaceKind::PkDisc, 0);
        auto uf = [](const Vec2& p) { return Vec2{0.3 - 0.2 * p.y, 0.1 + 0.4 * p.x}; };
        Eigen::VectorXd u = project_l2_vector(H, uf);
        Eigen::VectorXd w = project_l2(Z, [](const Vec2&) { return 0.7; });
        Eigen::VectorXd p = project_l2(Q, [](const Vec2&) { return -0.4; });
        FeField ufield(H, u), wfield(Z, w), pfield(Q, p);
        double worst = 0.0;
        for (int f = 0; f < m.n_facets(); ++f) {
            if (!m.facet(f).couples_two_cells()) continue;
            FacetContext fc = make_facet_context(m, f, params, 2);
            for (size_t q = 0; q < fc.points.size(); ++q) {
                Vec2 up, um;
                double wp, wm, pp, pm;
                ufield.eval_vector(fc.cell_plus, &fc.points[q], 1, &up);
                ufield.eval_vector(fc.cell_minus, &fc.points_minus[q], 1, &um);
                wfield.eval_scalar(fc.cell_plus, &fc.points[q], 1, &wp);
                wfield.eval_scalar(fc.cell_minus, &fc.points_minus[q], 1, &wm);
                pfield.eval_scalar(fc.cell_plus, &fc.points[q], 1, &pp);
                pfield.eval_scalar(fc.cell_minus, &fc.points_minus[q], 1, &pm);
                double jump_t = cross(up, fc.normal) + cross(um, -fc.normal);
                double jump_n = dot(up, fc.normal) + dot(um, -fc.normal);
                // vorticity flux {w} + C11 [u]_T and pressure flux {p} + A11 [u]_N
                double what = 0.5 * (wp + wm) + fc.C11 * jump_t;
                double phat = 0.5 * (pp + pm) + fc.A11 * jump_n;
                worst = std::max(worst, std::abs(what - wp));
                worst = std::max(worst, std::abs(phat - pp));
            }
        }
        d << "max flux deviation " << worst;
        return worst < 1e-12;
    });

    check("ipp equivalence of the DG forms", [](std::ostringstream& d) {
        Mesh m = Mesh::structured(3, 3);
        m.tag_boundary([](const Vec2& p) { return p.y > 0.5; },
                       [](const Vec2&) { return true; });
        double worst = 0.0;
        for (int k = 0; k <= 1; ++k) {
            FESpace H(m, SpaceKind::VectorPkDisc, k + 1);
            FESpace Z(m, SpaceKind::PkDisc, k);
            FESpace Q(m, SpaceKind::PkDisc, k);
            worst = std::max(worst, max_abs_diff(assemble_b1_dg(H, Z, 0.1),
                                                 assemble_b1_dg_ipp(H, Z, 0.1)));
            worst = std::max(worst,
                             max_abs_diff(assemble_b2_dg(H, Q), assemble_b2_dg_ipp(H, Q)));
        }
        d << "max entry difference " << worst;
        return worst < 1e-12;
    });

    check("coercivity of the reduced form", [](std::ostringstream& d) {
        Scenario sc = scenario_test1();
        auto mesh = sc.make_structured_mesh(8);
        FESpace H(*mesh, SpaceKind::RTk, 0);
        FESpace Z(*mesh, SpaceKind::LagrangeCont, 1);
        OseenParams p = sc.params();
        double beta_inf = 0.0;
        SparseMatrix A = assemble_a(H, p.sigma);
        SparseMatrix M = assemble_a(H, 1.0);
        SparseMatrix D = assemble_d(Z);
        SparseMatrix K = assemble_c(Z, H, p.nu, p.beta, &beta_inf);
        double margin = 1.0 - 2.0 * beta_inf * beta_inf / (p.nu * p.sigma);
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> unif(-1, 1);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 200; ++t) {
            Eigen::VectorXd v(H.n_dofs()), th(Z.n_dofs());
            for (int i = 0; i < v.size(); ++i) v[i] = unif(rng);
            for (int i = 0; i < th.size(); ++i) th[i] = unif(rng);
            double lhs = quadratic_form(A, v, v) + quadratic_form(D, th, th) +
                         v.dot(K.apply(th));
            double rhs = 0.5 * p.sigma * quadratic_form(M, v, v) +
                         margin * quadratic_form(D, th, th);
            worst = std::min(worst, lhs - rhs);
        }
        d << "min slack " << worst;
        return worst > -1e-10;
    });

    check("uniqueness with zero data", [](std::ostringstream& d) {
        Scenario sc = scenario_zero();
        auto mesh = sc.make_structured_mesh(4);
        double worst = 0.0;
        for (Scheme scheme : {Scheme::Mixed, Scheme::Dg}) {
            auto disc = Discretisation::make(mesh, scheme, 0);
            SolutionTriple sol = solve_steady(sc, disc);
            worst = std::max({worst, sol.u.lpNorm<Eigen::Infinity>(),
                              sol.w.lpNorm<Eigen::Infinity>(),
                              sol.p.lpNorm<Eigen::Infinity>()});
        }
        d << "max field value " << worst;
        return worst < 1e-9;
    });

    check("divergence-free mixed solve", [](std::ostringstream& d) {
        Scenario sc = scenario_test1();
        auto mesh = sc.make_structured_mesh(8);
        auto disc = Discretisation::make(mesh, Scheme::Mixed, 0);
        SolutionTriple sol = solve_steady(sc, disc);
        double div = divergence_linf(sol);
        double pmean = std::abs(sol.p.dot(disc.Q->basis_integrals()));
        d << "div_linf " << div << " |int p| " << pmean;
        return div < 1e-10 && pmean < 1e-10;
    });

    return results;
}

}  // namespace oseen
