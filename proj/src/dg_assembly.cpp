#include "oseen/dg_assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "oseen/parallel.hpp"
#include "oseen/quadrature.hpp"

namespace oseen {

namespace {

constexpr int kChunk = 256;

std::vector<Triplet> concat(std::vector<std::vector<Triplet>>& per_chunk) {
    size_t total = 0;
    for (const auto& v : per_chunk) total += v.size();
    std::vector<Triplet> out;
    out.reserve(total);
    for (auto& v : per_chunk) out.insert(out.end(), v.begin(), v.end());
    return out;
}

int n_chunks_of(int n) { return (n + kChunk - 1) / kChunk; }

bool is_interior(BoundaryTag tag) {
    return tag == BoundaryTag::Interior || tag == BoundaryTag::PeriodicMaster;
}

/// Traces of a space on both sides of a facet; minus side empty on boundary.
struct FacetTraces {
    std::vector<int> dofs[2];
    std::vector<Vec2> vvals[2];
    std::vector<double> svals[2];
    int nloc = 0;

    void setup(const FESpace& space, const FacetContext& fc, bool vector) {
        nloc = space.n_cell_dofs();
        const int nq = static_cast<int>(fc.points.size());
        int nsides = fc.two_sided() ? 2 : 1;
        for (int s = 0; s < nsides; ++s) {
            int cell = s == 0 ? fc.cell_plus : fc.cell_minus;
            const Vec2* pts = s == 0 ? fc.points.data() : fc.points_minus.data();
            space.cell_dofs(cell, dofs[s]);
            if (vector) {
                vvals[s].resize(static_cast<size_t>(nloc) * nq);
                space.evaluator(cell).eval_vector(pts, nq, vvals[s].data());
            } else {
                svals[s].resize(static_cast<size_t>(nloc) * nq);
                space.evaluator(cell).eval_scalar(pts, nq, svals[s].data());
            }
        }
    }
};

int scheme_order(const FESpace& Hdg) { return Hdg.degree() - 1; }

}  // namespace

int facet_quadrature_points(const FESpace& Hdg) {
    // ceil((2(k+1)+2)/2) = k+2 points, exact through trace-product degree
    return scheme_order(Hdg) + 2;
}

FacetContext make_facet_context(const Mesh& mesh, int facet, const OseenParams& p,
                                int n_points) {
    const Facet& fac = mesh.facet(facet);
    if (fac.tag == BoundaryTag::PeriodicSlave)
        throw std::runtime_error("make_facet_context: slave facets are merged into masters");
    FacetContext fc;
    fc.facet = facet;
    fc.tag = fac.tag;
    fc.cell_plus = fac.cells[0];
    fc.cell_minus = fac.cells[1];
    fc.normal = fac.normal;
    Vec2 p0 = mesh.vertex(fac.v0), p1 = mesh.vertex(fac.v1);
    fc.length = norm(p1 - p0);

    const GaussLegendre& gl = GaussLegendre::with_points(n_points);
    fc.points.resize(n_points);
    fc.weights.resize(n_points);
    for (int q = 0; q < n_points; ++q) {
        fc.points[q] = p0 + gl.points[q] * (p1 - p0);
        fc.weights[q] = gl.weights[q] * fc.length;
    }
    if (fc.two_sided()) {
        fc.points_minus = fc.points;
        if (fac.tag == BoundaryTag::PeriodicMaster)
            for (Vec2& x : fc.points_minus) x += fac.shift;
    }

    // Stabilisation weights from the facet diameter h_e: 1/h_e for the
    // velocity penalties, h_e for the pressure penalty.
    fc.C11 = p.c11 / fc.length;
    fc.A11 = p.a11 / fc.length;
    fc.D11 = p.d11 * fc.length;
    return fc;
}

namespace {

/// Volume integrals shared by the primal/IPP variants:
///   mode 0:  (curl th, u)   rows Z, cols H
///   mode 1:  (curl u, th)   rows Z, cols H
///   mode 2:  (p, div v)     rows Q, cols H (no sign)
///   mode 3:  (v, grad p)    rows Q, cols H
std::vector<Triplet> dg_volume(const FESpace& H, const FESpace& S, int mode, double factor) {
    const Mesh& mesh = H.mesh();
    const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
    const int nq = tq.size(), nh = H.n_cell_dofs(), ns = S.n_cell_dofs();
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        std::vector<Vec2> pts(nq);
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<double> hdiv, hcurl;
        std::vector<double> sv(static_cast<size_t>(ns) * nq);
        std::vector<Vec2> sg;
        if (mode == 2) hdiv.resize(static_cast<size_t>(nh) * nq);
        if (mode == 1) hcurl.resize(static_cast<size_t>(nh) * nq);
        if (mode == 0 || mode == 3) sg.resize(static_cast<size_t>(ns) * nq);
        std::vector<int> hdofs, sdofs;
        for (int c = begin; c < end; ++c) {
            const auto& cell = mesh.cell(c);
            for (int q = 0; q < nq; ++q)
                pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                                   mesh.vertex(cell[2]));
            double jac = 2.0 * mesh.cell_area(c);
            H.evaluator(c).eval_vector(pts.data(), nq, hv.data(),
                                       mode == 2 ? hdiv.data() : nullptr,
                                       mode == 1 ? hcurl.data() : nullptr);
            S.evaluator(c).eval_scalar(pts.data(), nq, sv.data(),
                                       sg.empty() ? nullptr : sg.data());
            H.cell_dofs(c, hdofs);
            S.cell_dofs(c, sdofs);
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < nh; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q) {
                        double w = tq.weights[q];
                        switch (mode) {
                            case 0: {
                                const Vec2& g = sg[i * nq + q];
                                const Vec2& v = hv[j * nq + q];
                                acc += w * (g.y * v.x - g.x * v.y);
                                break;
                            }
                            case 1:
                                acc += w * sv[i * nq + q] * hcurl[j * nq + q];
                                break;
                            case 2:
                                acc += w * sv[i * nq + q] * hdiv[j * nq + q];
                                break;
                            case 3:
                                acc += w * dot(sg[i * nq + q], hv[j * nq + q]);
                                break;
                        }
                    }
                    out.push_back({sdofs[i], hdofs[j], factor * jac * acc});
                }
        }
    });
    return concat(chunks);
}

enum class FacetSet { InteriorGamma, InteriorSigma };

bool in_set(BoundaryTag tag, FacetSet set) {
    if (is_interior(tag)) return true;
    if (set == FacetSet::InteriorGamma) return tag == BoundaryTag::Gamma;
    return tag == BoundaryTag::Sigma;
}

/// Facet terms coupling the scalar space S against the vector space H:
///   mode 0: <{u}, [th]_T>   (E u Gamma)   primal b1~ term
///   mode 1: <[u]_T, {th}>   (E u Sigma)   IPP b1~ term
///   mode 2: <{p}, [v]_N>    (E u Gamma)   primal b2~ term
///   mode 3: <{v}, [p]>      (E u Sigma)   IPP b2~ term (enters with -1)
std::vector<Triplet> dg_facet_mixed(const FESpace& H, const FESpace& S, int mode,
                                    double factor, const OseenParams& params) {
    const Mesh& mesh = H.mesh();
    const int npts = facet_quadrature_points(H);
    FacetSet set = (mode == 0 || mode == 2) ? FacetSet::InteriorGamma : FacetSet::InteriorSigma;
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_facets()));
    for_chunks(mesh.n_facets(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        FacetTraces hu, ss;
        for (int f = begin; f < end; ++f) {
            const Facet& fac = mesh.facet(f);
            if (fac.tag == BoundaryTag::PeriodicSlave || !in_set(fac.tag, set)) continue;
            FacetContext fc = make_facet_context(mesh, f, params, npts);
            hu.setup(H, fc, true);
            ss.setup(S, fc, false);
            const int nq = static_cast<int>(fc.points.size());
            const int nsides = fc.two_sided() ? 2 : 1;
            const double avg = fc.two_sided() ? 0.5 : 1.0;
            for (int si = 0; si < nsides; ++si) {      // scalar side
                Vec2 n_si = si == 0 ? fc.normal : -fc.normal;
                for (int sj = 0; sj < nsides; ++sj) {  // vector side
                    Vec2 n_sj = sj == 0 ? fc.normal : -fc.normal;
                    for (int i = 0; i < ss.nloc; ++i)
                        for (int j = 0; j < hu.nloc; ++j) {
                            double acc = 0.0;
                            for (int q = 0; q < nq; ++q) {
                                double th = ss.svals[si][i * nq + q];
                                const Vec2& u = hu.vvals[sj][j * nq + q];
                                double w = fc.weights[q];
                                switch (mode) {
                                    case 0:
                                        // {u} . [th]_T, [th]_T = th (-n.y, n.x)
                                        acc += w * avg * th *
                                               dot(u, scalar_cross_n(1.0, n_si));
                                        break;
                                    case 1:
                                        // [u]_T {th}, [u]_T = u x n (scalar)
                                        acc += w * avg * th * cross(u, n_sj);
                                        break;
                                    case 2:
                                        // {p} [v]_N
                                        acc += w * avg * th * dot(u, n_sj);
                                        break;
                                    case 3:
                                        // {v} . [p], [p] = p n
                                        acc += w * avg * th * dot(u, n_si);
                                        break;
                                }
                            }
                            out.push_back({ss.dofs[si][i], hu.dofs[sj][j], factor * acc});
                        }
                }
            }
        }
    });
    return concat(chunks);
}

}  // namespace

SparseMatrix assemble_b1_dg(const FESpace& Hdg, const FESpace& Zdg, double nu) {
    double sq = std::sqrt(nu);
    OseenParams dummy;
    auto trips = dg_volume(Hdg, Zdg, 0, sq);
    auto facet = dg_facet_mixed(Hdg, Zdg, 0, sq, dummy);
    trips.insert(trips.end(), facet.begin(), facet.end());
    return SparseMatrix::from_triplets(Zdg.n_dofs(), Hdg.n_dofs(), std::move(trips));
}

SparseMatrix assemble_b1_dg_ipp(const FESpace& Hdg, const FESpace& Zdg, double nu) {
    double sq = std::sqrt(nu);
    OseenParams dummy;
    auto trips = dg_volume(Hdg, Zdg, 1, sq);
    auto facet = dg_facet_mixed(Hdg, Zdg, 1, sq, dummy);
    trips.insert(trips.end(), facet.begin(), facet.end());
    return SparseMatrix::from_triplets(Zdg.n_dofs(), Hdg.n_dofs(), std::move(trips));
}

SparseMatrix assemble_b2_dg(const FESpace& Hdg, const FESpace& Qdg) {
    OseenParams dummy;
    auto trips = dg_volume(Hdg, Qdg, 2, -1.0);
    auto facet = dg_facet_mixed(Hdg, Qdg, 2, 1.0, dummy);
    trips.insert(trips.end(), facet.begin(), facet.end());
    return SparseMatrix::from_triplets(Qdg.n_dofs(), Hdg.n_dofs(), std::move(trips));
}

SparseMatrix assemble_b2_dg_ipp(const FESpace& Hdg, const FESpace& Qdg) {
    OseenParams dummy;
    auto trips = dg_volume(Hdg, Qdg, 3, 1.0);
    auto facet = dg_facet_mixed(Hdg, Qdg, 3, -1.0, dummy);
    trips.insert(trips.end(), facet.begin(), facet.end());
    return SparseMatrix::from_triplets(Qdg.n_dofs(), Hdg.n_dofs(), std::move(trips));
}

SparseMatrix assemble_j(const FESpace& Hdg, const OseenParams& p) {
    const Mesh& mesh = Hdg.mesh();
    const int npts = facet_quadrature_points(Hdg);
    const double sqnu = std::sqrt(p.nu);
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_facets()));
    for_chunks(mesh.n_facets(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        FacetTraces hu;
        for (int f = begin; f < end; ++f) {
            const Facet& fac = mesh.facet(f);
            if (fac.tag == BoundaryTag::PeriodicSlave) continue;
            bool c_term = in_set(fac.tag, FacetSet::InteriorSigma);  // C11 tangential
            bool a_term = in_set(fac.tag, FacetSet::InteriorGamma);  // A11 normal
            if (!c_term && !a_term) continue;
            FacetContext fc = make_facet_context(mesh, f, p, npts);
            hu.setup(Hdg, fc, true);
            const int nq = static_cast<int>(fc.points.size());
            const int nsides = fc.two_sided() ? 2 : 1;
            for (int si = 0; si < nsides; ++si) {
                Vec2 n_si = si == 0 ? fc.normal : -fc.normal;
                for (int sj = 0; sj < nsides; ++sj) {
                    Vec2 n_sj = sj == 0 ? fc.normal : -fc.normal;
                    for (int i = 0; i < hu.nloc; ++i)
                        for (int j = 0; j < hu.nloc; ++j) {
                            double acc = 0.0;
                            for (int q = 0; q < nq; ++q) {
                                const Vec2& vi = hu.vvals[si][i * nq + q];
                                const Vec2& vj = hu.vvals[sj][j * nq + q];
                                double w = fc.weights[q];
                                if (c_term)
                                    acc += w * sqnu * fc.C11 * cross(vi, n_si) *
                                           cross(vj, n_sj);
                                if (a_term)
                                    acc += w * fc.A11 * dot(vi, n_si) * dot(vj, n_sj);
                            }
                            out.push_back({hu.dofs[si][i], hu.dofs[sj][j], acc});
                        }
                }
            }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(Hdg.n_dofs(), Hdg.n_dofs(), std::move(trips));
}

SparseMatrix assemble_e(const FESpace& Qdg, const OseenParams& p) {
    const Mesh& mesh = Qdg.mesh();
    const int npts = Qdg.degree() + 2;
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_facets()));
    for_chunks(mesh.n_facets(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        FacetTraces qs;
        for (int f = begin; f < end; ++f) {
            const Facet& fac = mesh.facet(f);
            if (fac.tag == BoundaryTag::PeriodicSlave ||
                !in_set(fac.tag, FacetSet::InteriorSigma))
                continue;
            FacetContext fc = make_facet_context(mesh, f, p, npts);
            qs.setup(Qdg, fc, false);
            const int nq = static_cast<int>(fc.points.size());
            const int nsides = fc.two_sided() ? 2 : 1;
            for (int si = 0; si < nsides; ++si) {
                Vec2 n_si = si == 0 ? fc.normal : -fc.normal;
                for (int sj = 0; sj < nsides; ++sj) {
                    Vec2 n_sj = sj == 0 ? fc.normal : -fc.normal;
                    double orient = dot(n_si, n_sj);  // +1 same side, -1 across
                    for (int i = 0; i < qs.nloc; ++i)
                        for (int j = 0; j < qs.nloc; ++j) {
                            double acc = 0.0;
                            for (int q = 0; q < nq; ++q)
                                acc += fc.weights[q] * fc.D11 * orient *
                                       qs.svals[si][i * nq + q] * qs.svals[sj][j * nq + q];
                            out.push_back({qs.dofs[si][i], qs.dofs[sj][j], acc});
                        }
                }
            }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(Qdg.n_dofs(), Qdg.n_dofs(), std::move(trips));
}

Eigen::VectorXd assemble_dg_rhs(const OseenParams& p, const SchemeSpaces& spaces,
                                const GammaData& gamma) {
    const FESpace& H = *spaces.H;
    const FESpace& Z = *spaces.Z;
    const FESpace& Q = *spaces.Q;
    const Mesh& mesh = H.mesh();
    const int n = H.n_dofs() + Z.n_dofs() + Q.n_dofs();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    const double sqnu = std::sqrt(p.nu);

    if ((p.p_sigma || p.u_sigma) && !mesh.has_sigma())
        throw std::runtime_error("SigmaDataOnGamma: Sigma boundary data but no Sigma facets");

    if (p.f) {
        const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
        const int nq = tq.size(), nh = H.n_cell_dofs();
        std::vector<Vec2> pts(nq);
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<int> hdofs;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto& cell = mesh.cell(c);
            for (int q = 0; q < nq; ++q)
                pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                                   mesh.vertex(cell[2]));
            double jac = 2.0 * mesh.cell_area(c);
            H.evaluator(c).eval_vector(pts.data(), nq, hv.data());
            H.cell_dofs(c, hdofs);
            for (int i = 0; i < nh; ++i) {
                double acc = 0.0;
                for (int q = 0; q < nq; ++q)
                    acc += tq.weights[q] * dot(p.f(pts[q]), hv[i * nq + q]);
                rhs[hdofs[i]] += jac * acc;
            }
        }
    }

    const int npts = facet_quadrature_points(H);
    const int nh = H.n_cell_dofs(), nz = Z.n_cell_dofs(), nqd = Q.n_cell_dofs();
    std::vector<Vec2> hv(static_cast<size_t>(nh) * npts);
    std::vector<double> zv(static_cast<size_t>(nz) * npts);
    std::vector<double> qv(static_cast<size_t>(nqd) * npts);
    std::vector<int> dofs;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        const Facet& fac = mesh.facet(f);
        if (fac.tag == BoundaryTag::Sigma && (p.p_sigma || p.u_sigma)) {
            FacetContext fc = make_facet_context(mesh, f, p, npts);
            int c = fc.cell_plus;
            H.evaluator(c).eval_vector(fc.points.data(), npts, hv.data());
            H.cell_dofs(c, dofs);
            for (int i = 0; i < nh; ++i) {
                double acc = 0.0;
                for (int q = 0; q < npts; ++q) {
                    const Vec2& v = hv[i * npts + q];
                    double ps = p.p_sigma ? p.p_sigma(fc.points[q]) : 0.0;
                    double us = p.u_sigma ? p.u_sigma(fc.points[q]) : 0.0;
                    acc += fc.weights[q] *
                           (-ps * dot(v, fc.normal) + sqnu * fc.C11 * us * cross(v, fc.normal));
                }
                rhs[dofs[i]] += acc;
            }
            if (p.u_sigma) {
                Z.evaluator(c).eval_scalar(fc.points.data(), npts, zv.data());
                Z.cell_dofs(c, dofs);
                for (int i = 0; i < nz; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < npts; ++q)
                        acc -= fc.weights[q] * sqnu * p.u_sigma(fc.points[q]) *
                               zv[i * npts + q];
                    rhs[H.n_dofs() + dofs[i]] += acc;
                }
            }
            if (p.p_sigma) {
                Q.evaluator(c).eval_scalar(fc.points.data(), npts, qv.data());
                Q.cell_dofs(c, dofs);
                for (int i = 0; i < nqd; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < npts; ++q)
                        acc += fc.weights[q] * fc.D11 * p.p_sigma(fc.points[q]) *
                               qv[i * npts + q];
                    rhs[H.n_dofs() + Z.n_dofs() + dofs[i]] += acc;
                }
            }
        }
        if (fac.tag == BoundaryTag::Gamma && (gamma.vorticity || gamma.u_normal)) {
            // Gamma data lifting: the vorticity flux w^ = w_Gamma enters the
            // momentum row, the normal flux u^p.n = g enters the A11 penalty
            // and the continuity row.
            FacetContext fc = make_facet_context(mesh, f, p, npts);
            int c = fc.cell_plus;
            H.evaluator(c).eval_vector(fc.points.data(), npts, hv.data());
            H.cell_dofs(c, dofs);
            for (int i = 0; i < nh; ++i) {
                double acc = 0.0;
                for (int q = 0; q < npts; ++q) {
                    const Vec2& v = hv[i * npts + q];
                    double wg = gamma.vorticity ? gamma.vorticity(fc.points[q]) : 0.0;
                    double gn = gamma.u_normal ? gamma.u_normal(fc.points[q]) : 0.0;
                    acc += fc.weights[q] *
                           (-sqnu * wg * cross(v, fc.normal) + fc.A11 * gn * dot(v, fc.normal));
                }
                rhs[dofs[i]] += acc;
            }
            if (gamma.u_normal) {
                Q.evaluator(c).eval_scalar(fc.points.data(), npts, qv.data());
                Q.cell_dofs(c, dofs);
                for (int i = 0; i < nqd; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < npts; ++q)
                        acc -= fc.weights[q] * gamma.u_normal(fc.points[q]) * qv[i * npts + q];
                    rhs[H.n_dofs() + Z.n_dofs() + dofs[i]] += acc;
                }
            }
        }
    }
    return rhs;
}

SaddleSystem assemble_dg_system(const OseenParams& p, const SchemeSpaces& spaces,
                                const GammaData& gamma, bool zero_mean) {
    p.validate();
    const FESpace& H = *spaces.H;
    const FESpace& Z = *spaces.Z;
    const FESpace& Q = *spaces.Q;
    if (&H.mesh() != &Z.mesh() || &H.mesh() != &Q.mesh())
        throw std::runtime_error("InconsistentSpaces: spaces on different meshes");
    if (H.kind() != SpaceKind::VectorPkDisc || Z.kind() != SpaceKind::PkDisc ||
        Q.kind() != SpaceKind::PkDisc || Z.degree() != H.degree() - 1 ||
        Q.degree() != H.degree() - 1)
        throw std::runtime_error(
            "InconsistentSpaces: DG scheme needs vector P_{k+1} / P_k / P_k, all discontinuous");
    if (p.c11 <= 0.0 || p.a11 <= 0.0 || p.d11 <= 0.0)
        throw std::runtime_error("assemble_dg_system: stabilisation constants must be positive");
    if (!H.mesh().has_sigma() && !zero_mean)
        throw std::runtime_error(
            "NoPressureGauge: Sigma is empty and the zero-mean multiplier is off");

    SaddleSystem sys;
    sys.n_u = H.n_dofs();
    sys.n_w = Z.n_dofs();
    sys.n_p = Q.n_dofs();
    sys.has_multiplier = zero_mean;
    const int n = sys.size();

    SparseMatrix A = assemble_a(H, p.sigma);
    SparseMatrix J = assemble_j(H, p);
    SparseMatrix B1 = assemble_b1_dg(H, Z, p.nu);
    SparseMatrix B2 = assemble_b2_dg(H, Q);
    SparseMatrix K = assemble_c(Z, H, p.nu, p.beta, &sys.beta_inf);
    SparseMatrix D = assemble_d(Z);
    SparseMatrix E = assemble_e(Q, p);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs.head(n - (zero_mean ? 1 : 0)) = assemble_dg_rhs(p, spaces, gamma);

    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(A.nnz()) + J.nnz() + 2 * B1.nnz() + 2 * B2.nnz() +
                  K.nnz() + D.nnz() + E.nnz() + 2 * Q.n_dofs());
    const int ou = sys.offset_u(), ow = sys.offset_w(), op = sys.offset_p();
    auto scatter = [&](const SparseMatrix& B, int roff, int coff, double sign, bool transpose) {
        for (int r = 0; r < B.rows; ++r)
            for (int kk = B.row_offsets[r]; kk < B.row_offsets[r + 1]; ++kk) {
                int c = B.col_indices[kk];
                if (transpose)
                    trips.push_back({coff + c, roff + r, sign * B.values[kk]});
                else
                    trips.push_back({roff + r, coff + c, sign * B.values[kk]});
            }
    };
    scatter(A, ou, ou, 1.0, false);
    scatter(J, ou, ou, 1.0, false);
    scatter(B1, ow, ou, 1.0, true);    // +b1~(v, w) in the u-row
    scatter(B2, op, ou, 1.0, true);    // +b2~(v, p) in the u-row
    scatter(K, ou, ow, 1.0, false);    // +c(w, v) in the u-row
    scatter(B1, ow, ou, -1.0, false);  // -b1~(u, th) in the w-row
    scatter(D, ow, ow, 1.0, false);
    scatter(B2, op, ou, -1.0, false);  // -b2~(u, q) in the p-row
    scatter(E, op, op, 1.0, false);

    if (zero_mean) {
        Eigen::VectorXd w = Q.basis_integrals();
        for (int i = 0; i < Q.n_dofs(); ++i) {
            trips.push_back({n - 1, op + i, w[i]});
            trips.push_back({op + i, n - 1, w[i]});
        }
        rhs[n - 1] = 0.0;
    }

    sys.matrix = SparseMatrix::from_triplets(n, n, std::move(trips));
    sys.rhs = std::move(rhs);
    return sys;
}

}  // namespace oseen
