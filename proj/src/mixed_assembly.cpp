#include "oseen/mixed_assembly.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "oseen/parallel.hpp"
#include "oseen/quadrature.hpp"

namespace oseen {

namespace {

constexpr int kChunk = 256;

struct CellPoints {
    std::vector<Vec2> pts;
    double jac = 0.0;

    void setup(const Mesh& mesh, int c, const TriangleQuadrature& tq) {
        const auto& cell = mesh.cell(c);
        pts.resize(tq.size());
        for (int q = 0; q < tq.size(); ++q)
            pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                               mesh.vertex(cell[2]));
        jac = 2.0 * mesh.cell_area(c);
    }
};

std::vector<Triplet> concat(std::vector<std::vector<Triplet>>& per_chunk) {
    size_t total = 0;
    for (const auto& v : per_chunk) total += v.size();
    std::vector<Triplet> out;
    out.reserve(total);
    for (auto& v : per_chunk) out.insert(out.end(), v.begin(), v.end());
    return out;
}

int n_chunks_of(int n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

void OseenParams::validate() const {
    // sigma = 0 is allowed only for the Stokes initialisation solve
    if (sigma < 0.0) throw std::runtime_error("OseenParams: sigma must be nonnegative");
    if (nu <= 0.0) throw std::runtime_error("OseenParams: nu must be positive");
}

int form_quadrature_degree(const FESpace& H) {
    int poly_degree = H.kind() == SpaceKind::RTk ? H.degree() + 1 : H.degree();
    return 2 * poly_degree + 2;
}

SparseMatrix assemble_a(const FESpace& H, double sigma) {
    const Mesh& mesh = H.mesh();
    const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
    const int nq = tq.size(), nloc = H.n_cell_dofs();
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        CellPoints cp;
        std::vector<Vec2> vals(static_cast<size_t>(nloc) * nq);
        std::vector<int> dofs;
        for (int c = begin; c < end; ++c) {
            cp.setup(mesh, c, tq);
            H.evaluator(c).eval_vector(cp.pts.data(), nq, vals.data());
            H.cell_dofs(c, dofs);
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q)
                        acc += tq.weights[q] * dot(vals[i * nq + q], vals[j * nq + q]);
                    out.push_back({dofs[i], dofs[j], sigma * cp.jac * acc});
                }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(H.n_dofs(), H.n_dofs(), std::move(trips));
}

SparseMatrix assemble_b1(const FESpace& H, const FESpace& Z, double nu) {
    if (&H.mesh() != &Z.mesh()) throw std::runtime_error("InconsistentSpaces: different meshes");
    const Mesh& mesh = H.mesh();
    const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
    const int nq = tq.size(), nh = H.n_cell_dofs(), nz = Z.n_cell_dofs();
    const double sqnu = std::sqrt(nu);
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        CellPoints cp;
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<double> zv(static_cast<size_t>(nz) * nq);
        std::vector<Vec2> zg(static_cast<size_t>(nz) * nq);
        std::vector<int> hdofs, zdofs;
        for (int c = begin; c < end; ++c) {
            cp.setup(mesh, c, tq);
            H.evaluator(c).eval_vector(cp.pts.data(), nq, hv.data());
            Z.evaluator(c).eval_scalar(cp.pts.data(), nq, zv.data(), zg.data());
            H.cell_dofs(c, hdofs);
            Z.cell_dofs(c, zdofs);
            for (int i = 0; i < nz; ++i)
                for (int j = 0; j < nh; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q) {
                        // curl of a scalar is the rotated gradient (d_y, -d_x)
                        const Vec2& g = zg[i * nq + q];
                        const Vec2& v = hv[j * nq + q];
                        acc += tq.weights[q] * (g.y * v.x - g.x * v.y);
                    }
                    out.push_back({zdofs[i], hdofs[j], sqnu * cp.jac * acc});
                }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(Z.n_dofs(), H.n_dofs(), std::move(trips));
}

SparseMatrix assemble_b2(const FESpace& H, const FESpace& Q) {
    if (&H.mesh() != &Q.mesh()) throw std::runtime_error("InconsistentSpaces: different meshes");
    const Mesh& mesh = H.mesh();
    const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
    const int nq = tq.size(), nh = H.n_cell_dofs(), nqd = Q.n_cell_dofs();
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        CellPoints cp;
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<double> hdiv(static_cast<size_t>(nh) * nq);
        std::vector<double> qv(static_cast<size_t>(nqd) * nq);
        std::vector<int> hdofs, qdofs;
        for (int c = begin; c < end; ++c) {
            cp.setup(mesh, c, tq);
            H.evaluator(c).eval_vector(cp.pts.data(), nq, hv.data(), hdiv.data());
            Q.evaluator(c).eval_scalar(cp.pts.data(), nq, qv.data());
            H.cell_dofs(c, hdofs);
            Q.cell_dofs(c, qdofs);
            for (int i = 0; i < nqd; ++i)
                for (int j = 0; j < nh; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q)
                        acc += tq.weights[q] * qv[i * nq + q] * hdiv[j * nq + q];
                    out.push_back({qdofs[i], hdofs[j], -cp.jac * acc});
                }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(Q.n_dofs(), H.n_dofs(), std::move(trips));
}

SparseMatrix assemble_c(const FESpace& Z, const FESpace& H, double nu,
                        const ConvectiveField& beta, double* beta_inf) {
    if (&H.mesh() != &Z.mesh()) throw std::runtime_error("InconsistentSpaces: different meshes");
    const Mesh& mesh = H.mesh();
    const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
    const int nq = tq.size(), nh = H.n_cell_dofs(), nz = Z.n_cell_dofs();
    const double inv_sqnu = 1.0 / std::sqrt(nu);
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    std::vector<double> chunk_max(n_chunks_of(mesh.n_cells()), 0.0);
    FeField beta_field;
    if (beta.is_discrete()) beta_field = FeField(*beta.space, beta.coeffs);
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        CellPoints cp;
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<double> zv(static_cast<size_t>(nz) * nq);
        std::vector<Vec2> bvals(nq);
        std::vector<int> hdofs, zdofs;
        double local_max = 0.0;
        for (int c = begin; c < end; ++c) {
            cp.setup(mesh, c, tq);
            H.evaluator(c).eval_vector(cp.pts.data(), nq, hv.data());
            Z.evaluator(c).eval_scalar(cp.pts.data(), nq, zv.data());
            if (beta.is_discrete())
                beta_field.eval_vector(c, cp.pts.data(), nq, bvals.data());
            else
                for (int q = 0; q < nq; ++q) bvals[q] = beta.analytic(cp.pts[q]);
            for (int q = 0; q < nq; ++q) local_max = std::max(local_max, norm(bvals[q]));
            H.cell_dofs(c, hdofs);
            Z.cell_dofs(c, zdofs);
            for (int i = 0; i < nh; ++i)
                for (int j = 0; j < nz; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q) {
                        // (theta x beta) . v = theta * (beta x v)_z
                        acc += tq.weights[q] * zv[j * nq + q] *
                               cross(bvals[q], hv[i * nq + q]);
                    }
                    out.push_back({hdofs[i], zdofs[j], inv_sqnu * cp.jac * acc});
                }
        }
        chunk_max[ci] = std::max(chunk_max[ci], local_max);
    });
    if (beta_inf) {
        double m = 0.0;
        for (double v : chunk_max) m = std::max(m, v);
        *beta_inf = m;
    }
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(H.n_dofs(), Z.n_dofs(), std::move(trips));
}

SparseMatrix assemble_d(const FESpace& Z) {
    const Mesh& mesh = Z.mesh();
    int qd = Z.kind() == SpaceKind::LagrangeCont ? 2 * Z.degree() + 2
                                                 : form_quadrature_degree(Z);
    const auto& tq = TriangleQuadrature::of_degree(qd);
    const int nq = tq.size(), nz = Z.n_cell_dofs();
    std::vector<std::vector<Triplet>> chunks(n_chunks_of(mesh.n_cells()));
    for_chunks(mesh.n_cells(), kChunk, [&](int ci, int begin, int end) {
        auto& out = chunks[ci];
        CellPoints cp;
        std::vector<double> zv(static_cast<size_t>(nz) * nq);
        std::vector<int> zdofs;
        for (int c = begin; c < end; ++c) {
            cp.setup(mesh, c, tq);
            Z.evaluator(c).eval_scalar(cp.pts.data(), nq, zv.data());
            Z.cell_dofs(c, zdofs);
            for (int i = 0; i < nz; ++i)
                for (int j = 0; j < nz; ++j) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q)
                        acc += tq.weights[q] * zv[i * nq + q] * zv[j * nq + q];
                    out.push_back({zdofs[i], zdofs[j], cp.jac * acc});
                }
        }
    });
    auto trips = concat(chunks);
    return SparseMatrix::from_triplets(Z.n_dofs(), Z.n_dofs(), std::move(trips));
}

Eigen::VectorXd assemble_rhs(const OseenParams& p, const SchemeSpaces& spaces) {
    const FESpace& H = *spaces.H;
    const FESpace& Z = *spaces.Z;
    const Mesh& mesh = H.mesh();
    const int n = H.n_dofs() + Z.n_dofs() + spaces.Q->n_dofs();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    if ((p.p_sigma || p.u_sigma) && !mesh.has_sigma())
        throw std::runtime_error("SigmaDataOnGamma: Sigma boundary data but no Sigma facets");

    if (p.f) {
        const auto& tq = TriangleQuadrature::of_degree(form_quadrature_degree(H));
        const int nq = tq.size(), nh = H.n_cell_dofs();
        CellPoints cp;
        std::vector<Vec2> hv(static_cast<size_t>(nh) * nq);
        std::vector<int> hdofs;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            cp.setup(mesh, c, tq);
            H.evaluator(c).eval_vector(cp.pts.data(), nq, hv.data());
            H.cell_dofs(c, hdofs);
            for (int i = 0; i < nh; ++i) {
                double acc = 0.0;
                for (int q = 0; q < nq; ++q)
                    acc += tq.weights[q] * dot(p.f(cp.pts[q]), hv[i * nq + q]);
                rhs[hdofs[i]] += cp.jac * acc;
            }
        }
    }

    if (p.p_sigma || p.u_sigma) {
        const double sqnu = std::sqrt(p.nu);
        int k = H.kind() == SpaceKind::RTk ? H.degree() : H.degree() - 1;
        const auto& gl = GaussLegendre::with_points(std::max(k + 2, 4));
        const int nh = H.n_cell_dofs(), nz = Z.n_cell_dofs();
        std::vector<Vec2> pts(gl.points.size());
        std::vector<Vec2> hv(static_cast<size_t>(nh) * pts.size());
        std::vector<double> zv(static_cast<size_t>(nz) * pts.size());
        std::vector<int> hdofs, zdofs;
        for (int f : mesh.sigma_facets()) {
            const Facet& fac = mesh.facet(f);
            int c = fac.cells[0];
            Vec2 p0 = mesh.vertex(fac.v0), p1 = mesh.vertex(fac.v1);
            double len = norm(p1 - p0);
            const int nq = static_cast<int>(gl.points.size());
            for (int q = 0; q < nq; ++q) pts[q] = p0 + gl.points[q] * (p1 - p0);
            if (p.p_sigma) {
                H.evaluator(c).eval_vector(pts.data(), nq, hv.data());
                H.cell_dofs(c, hdofs);
                for (int i = 0; i < nh; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q)
                        acc += gl.weights[q] * p.p_sigma(pts[q]) *
                               dot(hv[i * nq + q], fac.normal);
                    rhs[hdofs[i]] -= len * acc;
                }
            }
            if (p.u_sigma) {
                Z.evaluator(c).eval_scalar(pts.data(), nq, zv.data());
                Z.cell_dofs(c, zdofs);
                for (int i = 0; i < nz; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q)
                        acc += gl.weights[q] * p.u_sigma(pts[q]) * zv[i * nq + q];
                    rhs[H.n_dofs() + zdofs[i]] -= sqnu * len * acc;
                }
            }
        }
    }
    return rhs;
}

void mixed_gamma_constraints(const SchemeSpaces& spaces, const GammaData& gamma,
                             std::vector<int>& dofs, std::vector<double>& values) {
    const FESpace& H = *spaces.H;
    const FESpace& Z = *spaces.Z;
    const Mesh& mesh = H.mesh();
    const int k = H.degree();
    const int d = Z.degree();
    std::map<int, double> constraint;  // system dof -> value

    const auto& gl = GaussLegendre::with_points(std::max(k + 2, 4));
    for (int f : mesh.gamma_facets()) {
        const Facet& fac = mesh.facet(f);
        Vec2 p0 = mesh.vertex(fac.v0), p1 = mesh.vertex(fac.v1);
        // RT facet moments of the prescribed normal trace
        int base = H.facet_dof_base(f);
        for (int m = 0; m <= k; ++m) {
            double val = 0.0;
            if (gamma.u_normal) {
                for (size_t q = 0; q < gl.points.size(); ++q) {
                    Vec2 x = p0 + gl.points[q] * (p1 - p0);
                    val += gl.weights[q] * gamma.u_normal(x) *
                           shifted_legendre(m, gl.points[q]);
                }
            }
            constraint[base + m] = val;
        }
        // Vorticity nodes on the facet: endpoints and edge slots
        for (int v : {fac.v0, fac.v1}) {
            int dof = Z.vertex_dof(mesh.canonical_vertex(v));
            constraint[H.n_dofs() + dof] =
                gamma.vorticity ? gamma.vorticity(mesh.vertex(v)) : 0.0;
        }
        int zbase = Z.facet_dof_base(f);
        for (int s = 0; s < d - 1; ++s) {
            Vec2 x = Z.facet_node_position(f, s);
            constraint[H.n_dofs() + zbase + s] = gamma.vorticity ? gamma.vorticity(x) : 0.0;
        }
    }
    dofs.clear();
    values.clear();
    for (const auto& [dof, val] : constraint) {
        dofs.push_back(dof);
        values.push_back(val);
    }
}

namespace {

void scatter_block(const SparseMatrix& B, int roff, int coff, double sign, bool transpose,
                   const std::vector<char>& mask, const std::vector<double>& cval,
                   std::vector<Triplet>& out, Eigen::VectorXd& rhs) {
    for (int r = 0; r < B.rows; ++r) {
        for (int kk = B.row_offsets[r]; kk < B.row_offsets[r + 1]; ++kk) {
            int c = B.col_indices[kk];
            double v = sign * B.values[kk];
            int R = transpose ? coff + c : roff + r;
            int C = transpose ? roff + r : coff + c;
            if (mask[R]) continue;
            if (mask[C])
                rhs[R] -= v * cval[C];
            else
                out.push_back({R, C, v});
        }
    }
}

}  // namespace

SaddleSystem assemble_mixed_system(const OseenParams& p, const SchemeSpaces& spaces,
                                   const GammaData& gamma, bool zero_mean) {
    p.validate();
    const FESpace& H = *spaces.H;
    const FESpace& Z = *spaces.Z;
    const FESpace& Q = *spaces.Q;
    if (&H.mesh() != &Z.mesh() || &H.mesh() != &Q.mesh())
        throw std::runtime_error("InconsistentSpaces: spaces on different meshes");
    if (H.kind() != SpaceKind::RTk || Z.kind() != SpaceKind::LagrangeCont ||
        Q.kind() != SpaceKind::PkDisc || Z.degree() != H.degree() + 1 ||
        Q.degree() != H.degree())
        throw std::runtime_error(
            "InconsistentSpaces: mixed scheme needs RT_k / P_{k+1} cont / P_k disc");
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
    SparseMatrix B1 = assemble_b1(H, Z, p.nu);
    SparseMatrix B2 = assemble_b2(H, Q);
    SparseMatrix K = assemble_c(Z, H, p.nu, p.beta, &sys.beta_inf);
    SparseMatrix D = assemble_d(Z);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs.head(sys.n_u + sys.n_w + sys.n_p) = assemble_rhs(p, spaces);

    std::vector<int> cdofs;
    std::vector<double> cvals;
    mixed_gamma_constraints(spaces, gamma, cdofs, cvals);
    sys.constrained = cdofs;
    std::vector<char> mask(n, 0);
    std::vector<double> cval(n, 0.0);
    for (size_t i = 0; i < cdofs.size(); ++i) {
        mask[cdofs[i]] = 1;
        cval[cdofs[i]] = cvals[i];
    }

    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(A.nnz()) + 2 * B1.nnz() + 2 * B2.nnz() + K.nnz() +
                  D.nnz() + 2 * Q.n_dofs() + cdofs.size());
    const int ou = sys.offset_u(), ow = sys.offset_w(), op = sys.offset_p();
    scatter_block(A, ou, ou, 1.0, false, mask, cval, trips, rhs);
    scatter_block(B1, ow, ou, 1.0, true, mask, cval, trips, rhs);   // b1(v, w) in u-row
    scatter_block(B2, op, ou, 1.0, true, mask, cval, trips, rhs);   // b2(v, p) in u-row
    scatter_block(K, ou, ow, 1.0, false, mask, cval, trips, rhs);   // c(w, v) in u-row
    scatter_block(B1, ow, ou, 1.0, false, mask, cval, trips, rhs);  // b1(u, th) in w-row
    scatter_block(D, ow, ow, -1.0, false, mask, cval, trips, rhs);
    scatter_block(B2, op, ou, 1.0, false, mask, cval, trips, rhs);  // b2(u, q) in p-row

    for (size_t i = 0; i < cdofs.size(); ++i) {
        trips.push_back({cdofs[i], cdofs[i], 1.0});
        rhs[cdofs[i]] = cvals[i];
    }

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
