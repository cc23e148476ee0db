#include "oseen/fespace.hpp"

#include <Eigen/Sparse>
#include <map>
#include <mutex>
#include <stdexcept>

namespace oseen {

namespace {

struct Mono {
    int a = 0, b = 0;  // x^a y^b
};

std::vector<Mono> monomials_up_to(int d) {
    std::vector<Mono> m;
    for (int total = 0; total <= d; ++total)
        for (int a = total; a >= 0; --a) m.push_back({a, total - a});
    return m;
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

double mono_eval(const Mono& m, const Vec2& p) { return ipow(p.x, m.a) * ipow(p.y, m.b); }

Vec2 mono_grad(const Mono& m, const Vec2& p) {
    double gx = m.a == 0 ? 0.0 : m.a * ipow(p.x, m.a - 1) * ipow(p.y, m.b);
    double gy = m.b == 0 ? 0.0 : m.b * ipow(p.x, m.a) * ipow(p.y, m.b - 1);
    return {gx, gy};
}

/// Reference lattice nodes: vertices, then edge nodes in local edge order,
/// then interior nodes. Degree 0 uses the centroid.
std::vector<Vec2> lattice_nodes(int d) {
    if (d == 0) return {Vec2{1.0 / 3.0, 1.0 / 3.0}};
    std::vector<Vec2> nodes = {{0, 0}, {1, 0}, {0, 1}};
    for (int j = 1; j < d; ++j) nodes.push_back({double(j) / d, 0.0});
    for (int j = 1; j < d; ++j) nodes.push_back({1.0 - double(j) / d, double(j) / d});
    for (int j = 1; j < d; ++j) nodes.push_back({0.0, 1.0 - double(j) / d});
    for (int i = 1; i < d; ++i)
        for (int j = 1; i + j <= d - 1; ++j) nodes.push_back({double(i) / d, double(j) / d});
    return nodes;
}

struct RefNodal {
    int degree = 0;
    std::vector<Mono> monos;
    std::vector<Vec2> nodes;
    Eigen::MatrixXd coef;  // nmono x nnodes; phi_i = sum_j coef(j, i) mono_j
};

const RefNodal& ref_nodal(int degree) {
    static std::map<int, RefNodal> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        RefNodal r;
        r.degree = degree;
        r.monos = monomials_up_to(degree);
        r.nodes = lattice_nodes(degree);
        const int n = static_cast<int>(r.nodes.size());
        if (static_cast<int>(r.monos.size()) != n)
            throw std::logic_error("ref_nodal: node/monomial count mismatch");
        Eigen::MatrixXd V(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) V(i, j) = mono_eval(r.monos[j], r.nodes[i]);
        r.coef = V.fullPivLu().inverse();
        it = cache.emplace(degree, std::move(r)).first;
    }
    return it->second;
}

int scalar_nodal_size(int d) { return (d + 1) * (d + 2) / 2; }

// Raw basis of RT_k on a physical cell, in shifted-scaled coordinates
// x' = (x - shift)/scale:  {mono e1, mono e2 : deg <= k}  +  {x' htilde_t(x')}.
struct RtRaw {
    int k = 0;
    std::vector<Mono> monos;  // degree <= k
    int dim() const { return 2 * static_cast<int>(monos.size()) + (k + 1); }

    Vec2 value(int j, const Vec2& xp) const {
        const int np = static_cast<int>(monos.size());
        if (j < 2 * np) {
            double v = mono_eval(monos[j / 2], xp);
            return j % 2 == 0 ? Vec2{v, 0} : Vec2{0, v};
        }
        int t = j - 2 * np;
        double h = ipow(xp.x, k - t) * ipow(xp.y, t);
        return {xp.x * h, xp.y * h};
    }

    double divergence(int j, const Vec2& xp, double scale) const {
        const int np = static_cast<int>(monos.size());
        if (j < 2 * np) {
            Vec2 g = mono_grad(monos[j / 2], xp);
            return (j % 2 == 0 ? g.x : g.y) / scale;
        }
        int t = j - 2 * np;
        double h = ipow(xp.x, k - t) * ipow(xp.y, t);
        return (k + 2) * h / scale;  // Euler identity for homogeneous h
    }

    double curl(int j, const Vec2& xp, double scale) const {
        const int np = static_cast<int>(monos.size());
        if (j < 2 * np) {
            Vec2 g = mono_grad(monos[j / 2], xp);
            return (j % 2 == 0 ? -g.y : g.x) / scale;
        }
        int t = j - 2 * np;
        Mono h{k - t, t};
        Vec2 g = mono_grad(h, xp);
        return (xp.y * g.x - xp.x * g.y) / scale;
    }
};

void check_degree(SpaceKind kind, int degree) {
    int lo = 0, hi = 2;
    if (kind == SpaceKind::LagrangeCont || kind == SpaceKind::VectorPkDisc) {
        lo = 1;
        hi = 3;
    }
    if (degree < lo || degree > hi)
        throw std::runtime_error("UnsupportedDegree: degree " + std::to_string(degree) +
                                 " not supported for this space kind");
}

}  // namespace

double shifted_legendre(int m, double s) {
    switch (m) {
        case 0: return 1.0;
        case 1: return 2.0 * s - 1.0;
        case 2: return 6.0 * s * s - 6.0 * s + 1.0;
        default: throw std::runtime_error("shifted_legendre: moment order > 2");
    }
}

FESpace::FESpace(const Mesh& mesh, SpaceKind kind, int degree)
    : mesh_(&mesh), kind_(kind), degree_(degree) {
    check_degree(kind, degree);
    const int nc = mesh.n_cells();
    const int nf = mesh.n_facets();

    auto assign_facet_bases = [&](int per_facet) {
        facet_base_.assign(nf, -1);
        facet_dof_total_ = 0;
        for (int f = 0; f < nf; ++f) {
            if (mesh.facet(f).tag == BoundaryTag::PeriodicSlave) continue;
            facet_base_[f] = facet_dof_total_;
            facet_dof_total_ += per_facet;
        }
        for (int f = 0; f < nf; ++f)
            if (mesh.facet(f).tag == BoundaryTag::PeriodicSlave)
                facet_base_[f] = facet_base_[mesh.facet(f).partner];
    };

    switch (kind) {
        case SpaceKind::RTk: {
            const int k = degree;
            n_facet_dofs_ = k + 1;
            assign_facet_bases(k + 1);
            n_cell_dofs_ = (k + 1) * (k + 3);
            n_dofs_ = facet_dof_total_ + nc * k * (k + 1);
            break;
        }
        case SpaceKind::LagrangeCont: {
            const int d = degree;
            vertex_dof_.assign(mesh.n_vertices(), -1);
            vertex_dof_total_ = 0;
            for (int v = 0; v < mesh.n_vertices(); ++v)
                if (mesh.canonical_vertex(v) == v) vertex_dof_[v] = vertex_dof_total_++;
            for (int v = 0; v < mesh.n_vertices(); ++v)
                if (vertex_dof_[v] < 0) vertex_dof_[v] = vertex_dof_[mesh.canonical_vertex(v)];
            n_facet_dofs_ = d - 1;
            assign_facet_bases(d - 1);
            const int interior = (d - 1) * (d - 2) / 2;
            n_cell_dofs_ = scalar_nodal_size(d);
            n_dofs_ = vertex_dof_total_ + facet_dof_total_ + nc * interior;
            break;
        }
        case SpaceKind::PkDisc:
            n_cell_dofs_ = scalar_nodal_size(degree);
            n_dofs_ = nc * n_cell_dofs_;
            break;
        case SpaceKind::VectorPkDisc:
            n_cell_dofs_ = 2 * scalar_nodal_size(degree);
            n_dofs_ = nc * n_cell_dofs_;
            break;
    }
}

int FESpace::facet_dof_base(int f) const {
    if (facet_base_.empty()) return -1;
    int base = facet_base_[f];
    if (kind_ == SpaceKind::LagrangeCont) return base < 0 ? -1 : vertex_dof_total_ + base;
    return base;
}

int FESpace::vertex_dof(int v) const {
    if (kind_ != SpaceKind::LagrangeCont) return -1;
    return vertex_dof_[v];
}

Vec2 FESpace::facet_node_position(int f, int slot) const {
    const Facet& fac = mesh_->facet(mesh_->canonical_facet(f));
    double t = double(slot + 1) / degree_;
    return mesh_->vertex(fac.v0) + t * (mesh_->vertex(fac.v1) - mesh_->vertex(fac.v0));
}

void FESpace::cell_dofs(int c, std::vector<int>& out) const {
    out.clear();
    out.reserve(n_cell_dofs_);
    const auto& cell = mesh_->cell(c);
    switch (kind_) {
        case SpaceKind::RTk: {
            const int k = degree_;
            for (int lf = 0; lf < 3; ++lf) {
                int base = facet_base_[mesh_->cell_facet(c, lf)];
                for (int m = 0; m <= k; ++m) out.push_back(base + m);
            }
            int ibase = facet_dof_total_ + c * k * (k + 1);
            for (int i = 0; i < k * (k + 1); ++i) out.push_back(ibase + i);
            break;
        }
        case SpaceKind::LagrangeCont: {
            const int d = degree_;
            for (int lv = 0; lv < 3; ++lv)
                out.push_back(vertex_dof_[mesh_->canonical_vertex(cell[lv])]);
            for (int lf = 0; lf < 3; ++lf) {
                int f = mesh_->cell_facet(c, lf);
                int base = vertex_dof_total_ + facet_base_[f];
                const Facet& fac = mesh_->facet(mesh_->canonical_facet(f));
                int p = mesh_->canonical_vertex(cell[lf]);
                bool forward = (p == fac.v0);
                for (int j = 0; j < d - 1; ++j) out.push_back(base + (forward ? j : d - 2 - j));
            }
            const int interior = (d - 1) * (d - 2) / 2;
            int ibase = vertex_dof_total_ + facet_dof_total_ + c * interior;
            for (int i = 0; i < interior; ++i) out.push_back(ibase + i);
            break;
        }
        case SpaceKind::PkDisc:
        case SpaceKind::VectorPkDisc: {
            int base = c * n_cell_dofs_;
            for (int i = 0; i < n_cell_dofs_; ++i) out.push_back(base + i);
            break;
        }
    }
}

CellEval FESpace::evaluator(int c) const {
    CellEval ev;
    ev.space_ = this;
    ev.cell_ = c;
    ev.ndof_ = n_cell_dofs_;
    const auto& cell = mesh_->cell(c);
    const Vec2 &v0 = mesh_->vertex(cell[0]), &v1 = mesh_->vertex(cell[1]),
               &v2 = mesh_->vertex(cell[2]);

    if (kind_ == SpaceKind::RTk) {
        const int k = degree_;
        ev.shift_ = (v0 + v1 + v2) / 3.0;
        ev.scale_ = mesh_->cell_diameter(c);
        RtRaw raw{k, monomials_up_to(k)};
        const int dim = raw.dim();
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(dim, dim);
        int row = 0;
        const GaussLegendre& gl = GaussLegendre::with_points(k + 2);
        for (int lf = 0; lf < 3; ++lf) {
            int f = mesh_->cell_facet(c, lf);
            Vec2 p0, p1;
            mesh_->facet_endpoints_for_cell(f, c, p0, p1);
            Vec2 n = mesh_->facet(mesh_->canonical_facet(f)).normal;
            for (int m = 0; m <= k; ++m, ++row) {
                for (int q = 0; q < static_cast<int>(gl.points.size()); ++q) {
                    double s = gl.points[q];
                    Vec2 x = p0 + s * (p1 - p0);
                    Vec2 xp = (x - ev.shift_) / ev.scale_;
                    double leg = shifted_legendre(m, s);
                    for (int j = 0; j < dim; ++j)
                        V(row, j) += gl.weights[q] * dot(raw.value(j, xp), n) * leg;
                }
            }
        }
        if (k >= 1) {
            auto inner = monomials_up_to(k - 1);
            const TriangleQuadrature& tq = TriangleQuadrature::of_degree(2 * k + 2);
            for (const Mono& mono : inner) {
                for (int comp = 0; comp < 2; ++comp, ++row) {
                    for (int q = 0; q < tq.size(); ++q) {
                        Vec2 x = tq.map_to(q, v0, v1, v2);
                        Vec2 xp = (x - ev.shift_) / ev.scale_;
                        double w = 2.0 * tq.weights[q];  // (1/area) * |J| = 2
                        double mval = mono_eval(mono, xp);
                        for (int j = 0; j < dim; ++j) {
                            Vec2 val = raw.value(j, xp);
                            V(row, j) += w * mval * (comp == 0 ? val.x : val.y);
                        }
                    }
                }
            }
        }
        ev.coef_ = V.fullPivLu().inverse();
        return ev;
    }

    // Reference-mapped nodal kinds.
    int d = degree_;
    const RefNodal& ref = ref_nodal(d);
    ev.coef_ = ref.coef;
    ev.map_origin_ = v0;
    double j00 = v1.x - v0.x, j01 = v2.x - v0.x;
    double j10 = v1.y - v0.y, j11 = v2.y - v0.y;
    double det = j00 * j11 - j01 * j10;
    ev.inv_jac_[0] = j11 / det;
    ev.inv_jac_[1] = -j01 / det;
    ev.inv_jac_[2] = -j10 / det;
    ev.inv_jac_[3] = j00 / det;
    return ev;
}

namespace {

/// Scalar nodal basis values/gradients in physical coordinates.
void eval_ref_nodal(const Eigen::MatrixXd& coef, int degree, const Vec2& origin,
                    const double inv_jac[4], const Vec2* pts, int n, double* vals, Vec2* grads) {
    auto monos = monomials_up_to(degree);
    const int nm = static_cast<int>(monos.size());
    const int nb = static_cast<int>(coef.cols());
    std::vector<double> mv(nm);
    std::vector<Vec2> mg(grads ? nm : 0);
    for (int q = 0; q < n; ++q) {
        Vec2 rel = pts[q] - origin;
        Vec2 xr{inv_jac[0] * rel.x + inv_jac[1] * rel.y, inv_jac[2] * rel.x + inv_jac[3] * rel.y};
        for (int j = 0; j < nm; ++j) mv[j] = mono_eval(monos[j], xr);
        if (grads)
            for (int j = 0; j < nm; ++j) mg[j] = mono_grad(monos[j], xr);
        for (int i = 0; i < nb; ++i) {
            double v = 0.0;
            for (int j = 0; j < nm; ++j) v += coef(j, i) * mv[j];
            vals[i * n + q] = v;
            if (grads) {
                Vec2 gr{0, 0};
                for (int j = 0; j < nm; ++j) gr += coef(j, i) * mg[j];
                // grad_phys = J^{-T} grad_ref
                grads[i * n + q] = {inv_jac[0] * gr.x + inv_jac[2] * gr.y,
                                    inv_jac[1] * gr.x + inv_jac[3] * gr.y};
            }
        }
    }
}

}  // namespace

void CellEval::eval_scalar(const Vec2* pts, int n, double* vals, Vec2* grads) const {
    SpaceKind kind = space_->kind();
    if (kind != SpaceKind::LagrangeCont && kind != SpaceKind::PkDisc)
        throw std::runtime_error("eval_scalar called on a vector-valued space");
    eval_ref_nodal(coef_, space_->degree(), map_origin_, inv_jac_, pts, n, vals, grads);
}

void CellEval::eval_vector(const Vec2* pts, int n, Vec2* vals, double* divs,
                           double* curls) const {
    SpaceKind kind = space_->kind();
    if (kind == SpaceKind::RTk) {
        const int k = space_->degree();
        RtRaw raw{k, monomials_up_to(k)};
        const int dim = raw.dim();
        std::vector<Vec2> rv(dim);
        std::vector<double> rdiv(divs ? dim : 0), rcurl(curls ? dim : 0);
        for (int q = 0; q < n; ++q) {
            Vec2 xp = (pts[q] - shift_) / scale_;
            for (int j = 0; j < dim; ++j) {
                rv[j] = raw.value(j, xp);
                if (divs) rdiv[j] = raw.divergence(j, xp, scale_);
                if (curls) rcurl[j] = raw.curl(j, xp, scale_);
            }
            for (int i = 0; i < dim; ++i) {
                Vec2 v{0, 0};
                double dv = 0, cl = 0;
                for (int j = 0; j < dim; ++j) {
                    v += coef_(j, i) * rv[j];
                    if (divs) dv += coef_(j, i) * rdiv[j];
                    if (curls) cl += coef_(j, i) * rcurl[j];
                }
                vals[i * n + q] = v;
                if (divs) divs[i * n + q] = dv;
                if (curls) curls[i * n + q] = cl;
            }
        }
        return;
    }
    if (kind != SpaceKind::VectorPkDisc)
        throw std::runtime_error("eval_vector called on a scalar space");

    const int nsc = ndof_ / 2;
    std::vector<double> sv(static_cast<size_t>(nsc) * n);
    std::vector<Vec2> sg(static_cast<size_t>(nsc) * n);
    eval_ref_nodal(coef_, space_->degree(), map_origin_, inv_jac_, pts, n, sv.data(), sg.data());
    for (int i = 0; i < nsc; ++i) {
        for (int q = 0; q < n; ++q) {
            double v = sv[i * n + q];
            Vec2 g = sg[i * n + q];
            int d0 = (2 * i) * n + q, d1 = (2 * i + 1) * n + q;
            vals[d0] = {v, 0};
            vals[d1] = {0, v};
            if (divs) {
                divs[d0] = g.x;
                divs[d1] = g.y;
            }
            if (curls) {
                curls[d0] = -g.y;
                curls[d1] = g.x;
            }
        }
    }
}

Eigen::VectorXd interpolate_rt(const FESpace& rt, const VectorField& v) {
    if (rt.kind() != SpaceKind::RTk) throw std::runtime_error("interpolate_rt: not an RT space");
    const Mesh& mesh = rt.mesh();
    const int k = rt.degree();
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(rt.n_dofs());
    const GaussLegendre& gl = GaussLegendre::with_points(std::max(k + 2, 8));
    for (int f = 0; f < mesh.n_facets(); ++f) {
        if (mesh.facet(f).tag == BoundaryTag::PeriodicSlave) continue;
        const Facet& fac = mesh.facet(f);
        Vec2 p0 = mesh.vertex(fac.v0), p1 = mesh.vertex(fac.v1);
        int base = rt.facet_dof_base(f);
        for (int m = 0; m <= k; ++m) {
            double val = 0.0;
            for (size_t q = 0; q < gl.points.size(); ++q) {
                double s = gl.points[q];
                Vec2 x = p0 + s * (p1 - p0);
                val += gl.weights[q] * dot(v(x), fac.normal) * shifted_legendre(m, s);
            }
            dofs[base + m] = val;
        }
    }
    if (k >= 1) {
        auto inner = monomials_up_to(k - 1);
        const TriangleQuadrature& tq = TriangleQuadrature::of_degree(2 * k + 8);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            const auto& cell = mesh.cell(c);
            Vec2 centroid =
                (mesh.vertex(cell[0]) + mesh.vertex(cell[1]) + mesh.vertex(cell[2])) / 3.0;
            double h = mesh.cell_diameter(c);
            int ibase = rt.n_dofs() - mesh.n_cells() * k * (k + 1) + c * k * (k + 1);
            int idx = 0;
            for (const Mono& mono : inner) {
                for (int comp = 0; comp < 2; ++comp, ++idx) {
                    double val = 0.0;
                    for (int q = 0; q < tq.size(); ++q) {
                        Vec2 x = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                                           mesh.vertex(cell[2]));
                        Vec2 xp = (x - centroid) / h;
                        Vec2 vv = v(x);
                        val += 2.0 * tq.weights[q] * mono_eval(mono, xp) *
                               (comp == 0 ? vv.x : vv.y);
                    }
                    dofs[ibase + idx] = val;
                }
            }
        }
    }
    return dofs;
}

namespace {

template <typename CellRhs>
Eigen::VectorXd project_disc(const FESpace& space, int extra_degree, const CellRhs& rhs_term) {
    const Mesh& mesh = space.mesh();
    const int nloc = space.n_cell_dofs();
    const bool vec = space.vector_valued();
    Eigen::VectorXd out(space.n_dofs());
    const TriangleQuadrature& tq =
        TriangleQuadrature::of_degree(2 * space.degree() + extra_degree);
    const int nq = tq.size();
    std::vector<double> svals(vec ? 0 : static_cast<size_t>(nloc) * nq);
    std::vector<Vec2> vvals(vec ? static_cast<size_t>(nloc) * nq : 0);
    std::vector<int> dofs;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        CellEval ev = space.evaluator(c);
        const auto& cell = mesh.cell(c);
        std::vector<Vec2> pts(nq);
        for (int q = 0; q < nq; ++q)
            pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                               mesh.vertex(cell[2]));
        if (vec)
            ev.eval_vector(pts.data(), nq, vvals.data());
        else
            ev.eval_scalar(pts.data(), nq, svals.data());
        double jac = 2.0 * mesh.cell_area(c);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nloc, nloc);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nloc);
        for (int q = 0; q < nq; ++q) {
            double w = jac * tq.weights[q];
            for (int i = 0; i < nloc; ++i) {
                for (int j = 0; j <= i; ++j) {
                    double m = vec ? dot(vvals[i * nq + q], vvals[j * nq + q])
                                   : svals[i * nq + q] * svals[j * nq + q];
                    M(i, j) += w * m;
                }
                b[i] += w * rhs_term(c, pts[q], i, q, vec ? nullptr : svals.data(),
                                     vec ? vvals.data() : nullptr, nq);
            }
        }
        M = M.selfadjointView<Eigen::Lower>();
        Eigen::VectorXd x = M.ldlt().solve(b);
        space.cell_dofs(c, dofs);
        for (int i = 0; i < nloc; ++i) out[dofs[i]] = x[i];
    }
    return out;
}

Eigen::VectorXd project_global(const FESpace& space, int extra_degree, const ScalarField* fs,
                               const VectorField* fv) {
    const Mesh& mesh = space.mesh();
    const int nloc = space.n_cell_dofs();
    const bool vec = space.vector_valued();
    const TriangleQuadrature& tq =
        TriangleQuadrature::of_degree(2 * space.degree() + extra_degree);
    const int nq = tq.size();
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(space.n_dofs());
    std::vector<double> svals(vec ? 0 : static_cast<size_t>(nloc) * nq);
    std::vector<Vec2> vvals(vec ? static_cast<size_t>(nloc) * nq : 0);
    std::vector<int> dofs;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        CellEval ev = space.evaluator(c);
        const auto& cell = mesh.cell(c);
        std::vector<Vec2> pts(nq);
        for (int q = 0; q < nq; ++q)
            pts[q] = tq.map_to(q, mesh.vertex(cell[0]), mesh.vertex(cell[1]),
                               mesh.vertex(cell[2]));
        if (vec)
            ev.eval_vector(pts.data(), nq, vvals.data());
        else
            ev.eval_scalar(pts.data(), nq, svals.data());
        double jac = 2.0 * mesh.cell_area(c);
        space.cell_dofs(c, dofs);
        for (int q = 0; q < nq; ++q) {
            double w = jac * tq.weights[q];
            for (int i = 0; i < nloc; ++i) {
                for (int j = 0; j < nloc; ++j) {
                    double m = vec ? dot(vvals[i * nq + q], vvals[j * nq + q])
                                   : svals[i * nq + q] * svals[j * nq + q];
                    trips.emplace_back(dofs[i], dofs[j], w * m);
                }
                b[dofs[i]] += w * (vec ? dot((*fv)(pts[q]), vvals[i * nq + q])
                                       : (*fs)(pts[q]) * svals[i * nq + q]);
            }
        }
    }
    Eigen::SparseMatrix<double> M(space.n_dofs(), space.n_dofs());
    M.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("project_l2: mass factorisation failed");
    return solver.solve(b);
}

}  // namespace

Eigen::VectorXd project_l2(const FESpace& space, const ScalarField& f, int extra_degree) {
    if (space.vector_valued())
        throw std::runtime_error("project_l2: scalar field into vector space");
    if (space.kind() == SpaceKind::PkDisc) {
        return project_disc(space, extra_degree,
                            [&](int, const Vec2& x, int i, int q, const double* sv, const Vec2*,
                                int nq) { return f(x) * sv[i * nq + q]; });
    }
    return project_global(space, extra_degree, &f, nullptr);
}

Eigen::VectorXd project_l2_vector(const FESpace& space, const VectorField& f, int extra_degree) {
    if (!space.vector_valued())
        throw std::runtime_error("project_l2_vector: vector field into scalar space");
    if (space.kind() == SpaceKind::VectorPkDisc) {
        return project_disc(space, extra_degree,
                            [&](int, const Vec2& x, int i, int q, const double*, const Vec2* vv,
                                int nq) { return dot(f(x), vv[i * nq + q]); });
    }
    return project_global(space, extra_degree, nullptr, &f);
}

Eigen::VectorXd interpolate_nodal(const FESpace& space, const ScalarField& f) {
    if (space.kind() != SpaceKind::LagrangeCont && space.kind() != SpaceKind::PkDisc)
        throw std::runtime_error("interpolate_nodal: nodal kinds only");
    const Mesh& mesh = space.mesh();
    const auto nodes = lattice_nodes(space.degree());
    Eigen::VectorXd out(space.n_dofs());
    std::vector<int> dofs;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        const Vec2 &a = mesh.vertex(cell[0]), &b = mesh.vertex(cell[1]), &d = mesh.vertex(cell[2]);
        space.cell_dofs(c, dofs);
        for (size_t i = 0; i < nodes.size(); ++i) {
            Vec2 x = a + nodes[i].x * (b - a) + nodes[i].y * (d - a);
            out[dofs[i]] = f(x);
        }
    }
    return out;
}

Eigen::VectorXd FESpace::basis_integrals() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_dofs_);
    const TriangleQuadrature& tq = TriangleQuadrature::of_degree(degree_ + 1);
    const int nq = tq.size();
    std::vector<int> dofs;
    if (vector_valued()) throw std::runtime_error("basis_integrals: scalar spaces only");
    std::vector<double> vals(static_cast<size_t>(n_cell_dofs_) * nq);
    for (int c = 0; c < mesh_->n_cells(); ++c) {
        CellEval ev = evaluator(c);
        const auto& cell = mesh_->cell(c);
        std::vector<Vec2> pts(nq);
        for (int q = 0; q < nq; ++q)
            pts[q] = tq.map_to(q, mesh_->vertex(cell[0]), mesh_->vertex(cell[1]),
                               mesh_->vertex(cell[2]));
        ev.eval_scalar(pts.data(), nq, vals.data());
        cell_dofs(c, dofs);
        double jac = 2.0 * mesh_->cell_area(c);
        for (int i = 0; i < n_cell_dofs_; ++i) {
            double acc = 0.0;
            for (int q = 0; q < nq; ++q) acc += tq.weights[q] * vals[i * nq + q];
            out[dofs[i]] += jac * acc;
        }
    }
    return out;
}

void FeField::eval_scalar(int cell, const Vec2* pts, int n, double* vals, Vec2* grads) const {
    const int nloc = space->n_cell_dofs();
    std::vector<double> bv(static_cast<size_t>(nloc) * n);
    std::vector<Vec2> bg(grads ? static_cast<size_t>(nloc) * n : 0);
    CellEval ev = space->evaluator(cell);
    ev.eval_scalar(pts, n, bv.data(), grads ? bg.data() : nullptr);
    std::vector<int> dofs;
    space->cell_dofs(cell, dofs);
    for (int q = 0; q < n; ++q) {
        double v = 0.0;
        Vec2 g{0, 0};
        for (int i = 0; i < nloc; ++i) {
            v += coeffs[dofs[i]] * bv[i * n + q];
            if (grads) g += coeffs[dofs[i]] * bg[i * n + q];
        }
        vals[q] = v;
        if (grads) grads[q] = g;
    }
}

void FeField::eval_vector(int cell, const Vec2* pts, int n, Vec2* vals, double* divs,
                          double* curls) const {
    const int nloc = space->n_cell_dofs();
    std::vector<Vec2> bv(static_cast<size_t>(nloc) * n);
    std::vector<double> bd(divs ? static_cast<size_t>(nloc) * n : 0);
    std::vector<double> bc(curls ? static_cast<size_t>(nloc) * n : 0);
    CellEval ev = space->evaluator(cell);
    ev.eval_vector(pts, n, bv.data(), divs ? bd.data() : nullptr, curls ? bc.data() : nullptr);
    std::vector<int> dofs;
    space->cell_dofs(cell, dofs);
    for (int q = 0; q < n; ++q) {
        Vec2 v{0, 0};
        double dv = 0, cl = 0;
        for (int i = 0; i < nloc; ++i) {
            double coef = coeffs[dofs[i]];
            v += coef * bv[i * n + q];
            if (divs) dv += coef * bd[i * n + q];
            if (curls) cl += coef * bc[i * n + q];
        }
        vals[q] = v;
        if (divs) divs[q] = dv;
        if (curls) curls[q] = cl;
    }
}

}  // namespace oseen
