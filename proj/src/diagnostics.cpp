#include "oseen/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "oseen/quadrature.hpp"

namespace oseen {

namespace {

/// One row of per-cell error accumulators over a fine rule.
struct CellLoop {
    const Mesh& mesh;
    const TriangleQuadrature& tq;
    std::vector<Vec2> pts;

    CellLoop(const Mesh& m, int degree)
        : mesh(m), tq(TriangleQuadrature::of_degree(degree)), pts(tq.size()) {}

    template <typename Fn>
    void run(Fn&& per_cell) {
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto& cell = mesh.cell(c);
            for (int q = 0; q < tq.size(); ++q)
                pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                                   mesh.vertex(cell[2]));
            per_cell(c, pts, 2.0 * mesh.cell_area(c));
        }
    }
};

int velocity_poly_degree(const SolutionTriple& sol) {
    return sol.disc.scheme == Scheme::Mixed ? sol.disc.k + 1 : sol.disc.H->degree();
}

}  // namespace

ErrorReport error_norms(const SolutionTriple& sol, const ManufacturedSolution& exact) {
    const Mesh& mesh = *sol.disc.mesh;
    const int qdeg = velocity_poly_degree(sol) + 3;

    FeField uf = sol.velocity();
    FeField wf = sol.vorticity();
    FeField pf = sol.pressure();

    double err_u = 0.0, err_div = 0.0, err_w = 0.0, err_gw = 0.0, err_p = 0.0;
    CellLoop loop(mesh, qdeg);
    const int nq = loop.tq.size();
    std::vector<Vec2> uvals(nq);
    std::vector<double> udivs(nq);
    std::vector<double> wvals(nq);
    std::vector<Vec2> wgrads(nq);
    std::vector<double> pvals(nq);
    loop.run([&](int c, const std::vector<Vec2>& pts, double jac) {
        uf.eval_vector(c, pts.data(), nq, uvals.data(), udivs.data());
        wf.eval_scalar(c, pts.data(), nq, wvals.data(), wgrads.data());
        pf.eval_scalar(c, pts.data(), nq, pvals.data());
        for (int q = 0; q < nq; ++q) {
            double w = jac * loop.tq.weights[q];
            Vec2 du = uvals[q] - exact.velocity(pts[q]);
            err_u += w * dot(du, du);
            double dd = udivs[q] - (exact.velocity_div ? exact.velocity_div(pts[q]) : 0.0);
            err_div += w * dd * dd;
            double dw = wvals[q] - exact.vorticity(pts[q]);
            err_w += w * dw * dw;
            Vec2 dg = wgrads[q] - exact.vorticity_grad(pts[q]);
            err_gw += w * dot(dg, dg);
            double dp = pvals[q] - exact.pressure(pts[q]);
            err_p += w * dp * dp;
        }
    });

    ErrorReport r;
    r.h = mesh.mesh_size();
    r.dofs = sol.disc.H->n_dofs() + sol.disc.Z->n_dofs() + sol.disc.Q->n_dofs() +
             (sol.disc.mesh->has_sigma() ? 0 : 1);
    r.err_u_Hdiv = std::sqrt(err_u + err_div);
    r.err_p_L2 = std::sqrt(err_p);
    r.div_linf = divergence_linf(sol);
    // Z-norm: |th|^2 + nu |curl th|^2; the scalar curl is the rotated
    // gradient, so |curl th| = |grad th| pointwise.
    r.err_w_Z = std::sqrt(err_w + sol.nu * err_gw);
    return r;
}

double dg_seminorm(const SolutionTriple& sol, const ManufacturedSolution& exact,
                   const OseenParams& params) {
    const Mesh& mesh = *sol.disc.mesh;
    const FESpace& H = *sol.disc.H;
    FeField uf = sol.velocity();
    FeField wf = sol.vorticity();
    FeField pf = sol.pressure();

    // L2 parts
    double l2u = 0.0, l2w = 0.0;
    CellLoop loop(mesh, velocity_poly_degree(sol) + 3);
    const int nq = loop.tq.size();
    std::vector<Vec2> uvals(nq);
    std::vector<double> wvals(nq);
    loop.run([&](int c, const std::vector<Vec2>& pts, double jac) {
        uf.eval_vector(c, pts.data(), nq, uvals.data());
        wf.eval_scalar(c, pts.data(), nq, wvals.data());
        for (int q = 0; q < nq; ++q) {
            double w = jac * loop.tq.weights[q];
            Vec2 du = uvals[q] - exact.velocity(pts[q]);
            double dw = wvals[q] - exact.vorticity(pts[q]);
            l2u += w * dot(du, du);
            l2w += w * dw * dw;
        }
    });

    // jump parts: interior jumps of the discrete fields (the exact fields
    // are continuous), boundary jumps of the error traces
    const double sqnu = std::sqrt(params.nu);
    const int npts = facet_quadrature_points(H) + 2;
    double ju = 0.0, ep = 0.0;
    std::vector<Vec2> up(npts), um(npts);
    std::vector<double> pp(npts), pm(npts);
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const Facet& fac = mesh.facet(f);
        if (fac.tag == BoundaryTag::PeriodicSlave) continue;
        FacetContext fc = make_facet_context(mesh, f, params, npts);
        bool interior = fc.two_sided();
        bool c_set = interior || fac.tag == BoundaryTag::Sigma;  // C11 tangential + e
        bool a_set = interior || fac.tag == BoundaryTag::Gamma;  // A11 normal
        uf.eval_vector(fc.cell_plus, fc.points.data(), npts, up.data());
        pf.eval_scalar(fc.cell_plus, fc.points.data(), npts, pp.data());
        if (interior) {
            uf.eval_vector(fc.cell_minus, fc.points_minus.data(), npts, um.data());
            pf.eval_scalar(fc.cell_minus, fc.points_minus.data(), npts, pm.data());
        }
        for (int q = 0; q < npts; ++q) {
            double w = fc.weights[q];
            double jump_t, jump_n, jump_p;
            if (interior) {
                jump_t = cross(up[q], fc.normal) + cross(um[q], -fc.normal);
                jump_n = dot(up[q], fc.normal) + dot(um[q], -fc.normal);
                jump_p = pp[q] - pm[q];
            } else {
                Vec2 eu = exact.velocity(fc.points[q]) - up[q];
                jump_t = cross(eu, fc.normal);
                jump_n = dot(eu, fc.normal);
                jump_p = exact.pressure(fc.points[q]) - pp[q];
            }
            if (c_set) {
                ju += w * sqnu * fc.C11 * jump_t * jump_t;
                ep += w * fc.D11 * jump_p * jump_p;
            }
            if (a_set) ju += w * fc.A11 * jump_n * jump_n;
        }
    }
    return std::sqrt(params.sigma * l2u + l2w + ju + ep);
}

double divergence_linf(const SolutionTriple& sol) {
    // div u_h lies in P_k cellwise for both schemes, so its L2 projection
    // into Q_h is itself: read it off at the pressure nodes.
    const Mesh& mesh = *sol.disc.mesh;
    const FESpace& Q = *sol.disc.Q;
    FeField uf = sol.velocity();
    const int nloc = Q.n_cell_dofs();
    double linf = 0.0;
    std::vector<Vec2> nodes(nloc);
    std::vector<Vec2> vals(nloc);
    std::vector<double> divs(nloc);
    const int d = Q.degree();
    // reference lattice of the nodal pressure basis
    std::vector<Vec2> ref;
    if (d == 0)
        ref = {Vec2{1.0 / 3.0, 1.0 / 3.0}};
    else {
        ref = {{0, 0}, {1, 0}, {0, 1}};
        for (int j = 1; j < d; ++j) ref.push_back({double(j) / d, 0.0});
        for (int j = 1; j < d; ++j) ref.push_back({1.0 - double(j) / d, double(j) / d});
        for (int j = 1; j < d; ++j) ref.push_back({0.0, 1.0 - double(j) / d});
        for (int i = 1; i < d; ++i)
            for (int j = 1; i + j <= d - 1; ++j) ref.push_back({double(i) / d, double(j) / d});
    }
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        const Vec2 &a = mesh.vertex(cell[0]), &b = mesh.vertex(cell[1]),
                   &e = mesh.vertex(cell[2]);
        for (int i = 0; i < nloc; ++i)
            nodes[i] = a + ref[i].x * (b - a) + ref[i].y * (e - a);
        uf.eval_vector(c, nodes.data(), nloc, vals.data(), divs.data());
        for (int i = 0; i < nloc; ++i) linf = std::max(linf, std::abs(divs[i]));
    }
    return linf;
}

std::vector<double> fit_rates(const std::vector<double>& errors) {
    std::vector<double> rates;
    for (size_t i = 1; i < errors.size(); ++i) {
        if (errors[i - 1] <= 0.0 || errors[i] <= 0.0)
            throw std::runtime_error("DegenerateError: zero error has no convergence rate");
        rates.push_back(std::log2(errors[i - 1] / errors[i]));
    }
    return rates;
}

FlowDiagnostics enstrophy_palinstrophy(const SolutionTriple& sol, double nu) {
    const Mesh& mesh = *sol.disc.mesh;
    FeField wf = sol.vorticity();
    int deg = 2 * sol.disc.Z->degree() + 4;
    CellLoop loop(mesh, deg);
    const int nq = loop.tq.size();
    std::vector<double> wvals(nq);
    std::vector<Vec2> wgrads(nq);
    double w2 = 0.0, gw2 = 0.0;
    loop.run([&](int c, const std::vector<Vec2>& pts, double jac) {
        wf.eval_scalar(c, pts.data(), nq, wvals.data(), wgrads.data());
        for (int q = 0; q < nq; ++q) {
            double w = jac * loop.tq.weights[q];
            w2 += w * wvals[q] * wvals[q];
            gw2 += w * dot(wgrads[q], wgrads[q]);
        }
    });
    FlowDiagnostics d;
    d.enstrophy = w2 / (2.0 * nu);
    d.palinstrophy = gw2 / (2.0 * nu);
    d.enstrophy_rescaled = d.enstrophy / nu;
    d.palinstrophy_rescaled = d.palinstrophy / nu;
    return d;
}

std::vector<ProfileSample> midline_profiles(const SolutionTriple& sol, Vec2 a, Vec2 b, int n) {
    std::vector<ProfileSample> out;
    if (n <= 0) return out;
    const Mesh& mesh = *sol.disc.mesh;
    FeField uf = sol.velocity();
    FeField wf = sol.vorticity();
    FeField pf = sol.pressure();
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.5 : double(i) / (n - 1);
        Vec2 x = a + t * (b - a);
        int c = mesh.find_cell(x);
        if (c < 0)
            throw std::runtime_error("PointOutsideDomain: profile point not in the mesh");
        ProfileSample s;
        s.point = x;
        uf.eval_vector(c, &x, 1, &s.velocity);
        wf.eval_scalar(c, &x, 1, &s.vorticity);
        pf.eval_scalar(c, &x, 1, &s.pressure);
        out.push_back(s);
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_error_table(std::ostream& out, const std::vector<ErrorReport>& rows, Scheme scheme) {
    out << "h,dofs,err_u,rate_u,err_w,rate_w,err_p,rate_p,div_linf";
    if (scheme == Scheme::Dg) out << ",err_A,rate_A";
    out << "\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const ErrorReport& r = rows[i];
        auto rate = [&](double prev, double cur) {
            return i == 0 ? std::string() : fmt(std::log2(prev / cur));
        };
        out << fmt(r.h) << "," << r.dofs;
        out << "," << fmt(r.err_u_Hdiv) << ","
            << (i ? rate(rows[i - 1].err_u_Hdiv, r.err_u_Hdiv) : "");
        out << "," << fmt(r.err_w_Z) << "," << (i ? rate(rows[i - 1].err_w_Z, r.err_w_Z) : "");
        out << "," << fmt(r.err_p_L2) << ","
            << (i ? rate(rows[i - 1].err_p_L2, r.err_p_L2) : "");
        out << "," << fmt(r.div_linf);
        if (scheme == Scheme::Dg) {
            out << "," << fmt(r.err_A_seminorm) << ","
                << (i ? rate(rows[i - 1].err_A_seminorm, r.err_A_seminorm) : "");
        }
        out << "\n";
    }
}

void write_transient_csv(std::ostream& out, const std::vector<StepDiagnostics>& steps) {
    out << "t,E,P,E_rescaled,P_rescaled,div_linf\n";
    for (const StepDiagnostics& s : steps)
        out << fmt(s.t) << "," << fmt(s.enstrophy) << "," << fmt(s.palinstrophy) << ","
            << fmt(s.enstrophy_rescaled) << "," << fmt(s.palinstrophy_rescaled) << ","
            << fmt(s.div_linf) << "\n";
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileSample>& samples) {
    out << "x,y,u1,u2,omega,pressure\n";
    for (const ProfileSample& s : samples)
        out << fmt(s.point.x) << "," << fmt(s.point.y) << "," << fmt(s.velocity.x) << ","
            << fmt(s.velocity.y) << "," << fmt(s.vorticity) << "," << fmt(s.pressure) << "\n";
}

}  // namespace oseen
