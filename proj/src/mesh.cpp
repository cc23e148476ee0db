#include "oseen/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace oseen {

namespace {

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

}  // namespace

Mesh Mesh::from_arrays(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.cells_ = std::move(cells);
    m.build_topology();
    m.check_geometry();
    return m;
}

Mesh Mesh::structured(int nx, int ny, Vec2 lo, Vec2 hi) {
    if (nx < 1 || ny < 1) throw std::runtime_error("structured: nx, ny must be >= 1");
    return masked(nx, ny, lo, hi, [](const Vec2&) { return true; });
}

Mesh Mesh::masked(int nx, int ny, Vec2 lo, Vec2 hi, const PointPredicate& keep) {
    if (nx < 1 || ny < 1) throw std::runtime_error("masked: nx, ny must be >= 1");
    const double dx = (hi.x - lo.x) / nx;
    const double dy = (hi.y - lo.y) / ny;
    auto grid_vertex = [&](int i, int j) { return Vec2{lo.x + i * dx, lo.y + j * dy}; };

    std::vector<int> vmap(static_cast<size_t>(nx + 1) * (ny + 1), -1);
    std::vector<Vec2> verts;
    std::vector<std::array<int, 3>> cells;
    auto use_vertex = [&](int i, int j) {
        int& id = vmap[static_cast<size_t>(j) * (nx + 1) + i];
        if (id < 0) {
            id = static_cast<int>(verts.size());
            verts.push_back(grid_vertex(i, j));
        }
        return id;
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Vec2 centroid{lo.x + (i + 0.5) * dx, lo.y + (j + 0.5) * dy};
            if (!keep(centroid)) continue;
            int v00 = use_vertex(i, j);
            int v10 = use_vertex(i + 1, j);
            int v11 = use_vertex(i + 1, j + 1);
            int v01 = use_vertex(i, j + 1);
            cells.push_back({v00, v10, v11});
            cells.push_back({v00, v11, v01});
        }
    }
    if (cells.empty()) throw std::runtime_error("masked: predicate kept no cells");
    return from_arrays(std::move(verts), std::move(cells));
}

void Mesh::build_topology() {
    const int nc = n_cells();
    facets_.clear();
    cell_facets_.assign(nc, {-1, -1, -1});
    vertex_alias_.resize(n_vertices());
    for (int v = 0; v < n_vertices(); ++v) vertex_alias_[v] = v;

    std::map<std::pair<int, int>, int> index;
    for (int c = 0; c < nc; ++c) {
        const auto& cell = cells_[c];
        for (int lf = 0; lf < 3; ++lf) {
            int a = cell[lf], b = cell[(lf + 1) % 3];
            auto key = std::minmax(a, b);
            auto it = index.find(key);
            if (it == index.end()) {
                Facet f;
                f.v0 = key.first;
                f.v1 = key.second;
                f.cells[0] = c;
                index.emplace(key, static_cast<int>(facets_.size()));
                cell_facets_[c][lf] = static_cast<int>(facets_.size());
                facets_.push_back(f);
            } else {
                Facet& f = facets_[it->second];
                if (f.cells[1] >= 0)
                    throw std::runtime_error("Mesh: facet shared by more than two cells");
                f.cells[1] = c;
                if (f.cells[1] < f.cells[0]) std::swap(f.cells[0], f.cells[1]);
                cell_facets_[c][lf] = it->second;
            }
        }
    }

    // Normals point from cells[0] into cells[1] (outward on the boundary).
    for (Facet& f : facets_) {
        Vec2 t = vertices_[f.v1] - vertices_[f.v0];
        double len = norm(t);
        Vec2 n{t.y / len, -t.x / len};
        const auto& cell = cells_[f.cells[0]];
        Vec2 centroid = (vertices_[cell[0]] + vertices_[cell[1]] + vertices_[cell[2]]) / 3.0;
        Vec2 mid = 0.5 * (vertices_[f.v0] + vertices_[f.v1]);
        if (dot(n, mid - centroid) < 0) n = -n;
        f.normal = n;
    }

    areas_.resize(nc);
    diameters_.resize(nc);
    total_area_ = 0.0;
    for (int c = 0; c < nc; ++c) {
        const auto& cell = cells_[c];
        const Vec2 &a = vertices_[cell[0]], &b = vertices_[cell[1]], &d = vertices_[cell[2]];
        areas_[c] = triangle_area(a, b, d);
        double e0 = norm(b - a), e1 = norm(d - b), e2 = norm(a - d);
        diameters_[c] = std::max({e0, e1, e2});
        total_area_ += areas_[c];
    }
}

void Mesh::check_geometry() const {
    for (int c = 0; c < n_cells(); ++c)
        if (areas_[c] <= 0.0)
            throw std::runtime_error("Mesh: cell " + std::to_string(c) +
                                     " is degenerate or not counter-clockwise");
}

double Mesh::mesh_size() const {
    if (n_cells() == 0) throw std::runtime_error("mesh_size: empty mesh");
    double h = 0.0;
    for (double d : diameters_) h = std::max(h, d);
    return h;
}

double Mesh::facet_length(int f) const {
    return norm(vertices_[facets_[f].v1] - vertices_[facets_[f].v0]);
}

Vec2 Mesh::facet_midpoint(int f) const {
    return 0.5 * (vertices_[facets_[f].v0] + vertices_[facets_[f].v1]);
}

Vec2 Mesh::outward_normal(int c, int lf) const {
    const Facet& f = facets_[cell_facet(c, lf)];
    if (f.tag == BoundaryTag::PeriodicSlave) {
        // Slave side acts as the minus cell of the merged master facet.
        return -facets_[f.partner].normal;
    }
    return f.cells[0] == c ? f.normal : -f.normal;
}

void Mesh::facet_endpoints_for_cell(int f, int c, Vec2& p0, Vec2& p1) const {
    const Facet& fac = facets_[f];
    if (fac.tag == BoundaryTag::PeriodicSlave) {
        const Facet& master = facets_[fac.partner];
        p0 = vertices_[master.v0] + master.shift;
        p1 = vertices_[master.v1] + master.shift;
        return;
    }
    (void)c;
    p0 = vertices_[fac.v0];
    p1 = vertices_[fac.v1];
}

void Mesh::tag_boundary(const PointPredicate& gamma_pred, const PointPredicate& sigma_pred,
                        std::optional<Vec2> periodic) {
    const double tol = 1e-9 * std::max(1.0, mesh_size());

    std::vector<int> boundary;
    for (int f = 0; f < n_facets(); ++f) {
        facets_[f].tag = BoundaryTag::Interior;
        facets_[f].partner = -1;
        if (facets_[f].cells[1] < 0) boundary.push_back(f);
    }
    for (int v = 0; v < n_vertices(); ++v) vertex_alias_[v] = v;

    if (periodic) {
        const Vec2 t = *periodic;
        std::vector<char> paired(n_facets(), 0);
        int n_pairs = 0;
        for (int f : boundary) {
            if (paired[f]) continue;
            Vec2 target = facet_midpoint(f) + t;
            for (int g : boundary) {
                if (g == f || paired[g]) continue;
                if (norm(facet_midpoint(g) - target) < tol) {
                    if (std::abs(facet_length(f) - facet_length(g)) > tol)
                        throw std::runtime_error("PeriodicMismatch: paired facets not congruent");
                    Facet& mf = facets_[f];
                    Facet& sf = facets_[g];
                    mf.tag = BoundaryTag::PeriodicMaster;
                    sf.tag = BoundaryTag::PeriodicSlave;
                    mf.partner = g;
                    sf.partner = f;
                    mf.shift = t;
                    mf.cells[1] = sf.cells[0];  // merged facet couples both cells
                    paired[f] = paired[g] = 1;
                    ++n_pairs;
                    // Identify slave vertices with the master's.
                    for (int sv : {sf.v0, sf.v1}) {
                        Vec2 src = vertices_[sv] - t;
                        int match = -1;
                        for (int mv : {mf.v0, mf.v1})
                            if (norm(vertices_[mv] - src) < tol) match = mv;
                        if (match < 0)
                            throw std::runtime_error("PeriodicMismatch: vertex pairing failed");
                        vertex_alias_[sv] = match;
                    }
                    break;
                }
            }
        }
        // Every facet that could pair must have paired: a facet whose
        // translated or back-translated midpoint lies on the boundary.
        for (int f : boundary) {
            if (paired[f]) continue;
            Vec2 mid = facet_midpoint(f);
            for (int g : boundary)
                if (norm(facet_midpoint(g) - (mid + t)) < tol ||
                    norm(facet_midpoint(g) - (mid - t)) < tol)
                    throw std::runtime_error("PeriodicMismatch: unpaired periodic facet");
        }
        if (periodic && n_pairs == 0)
            throw std::runtime_error("PeriodicMismatch: no facet pairs found");
    }

    for (int f : boundary) {
        Facet& fac = facets_[f];
        if (fac.tag != BoundaryTag::Interior) continue;
        Vec2 mid = facet_midpoint(f);
        if (gamma_pred && gamma_pred(mid))
            fac.tag = BoundaryTag::Gamma;
        else if (sigma_pred && sigma_pred(mid))
            fac.tag = BoundaryTag::Sigma;
        else {
            std::ostringstream os;
            os << "UntaggedFacet: boundary facet midpoint (" << mid.x << ", " << mid.y
               << ") matches neither predicate";
            throw std::runtime_error(os.str());
        }
    }
}

void Mesh::tag_all_gamma() {
    tag_boundary([](const Vec2&) { return true; }, [](const Vec2&) { return false; });
}

int Mesh::find_cell(const Vec2& p) const {
    const double tol = 1e-12;
    for (int c = 0; c < n_cells(); ++c) {
        const auto& cell = cells_[c];
        const Vec2 &a = vertices_[cell[0]], &b = vertices_[cell[1]], &d = vertices_[cell[2]];
        double inv = 1.0 / (2.0 * areas_[c]);
        double w1 = 2.0 * triangle_area(p, d, a) * inv;
        double w2 = 2.0 * triangle_area(a, b, p) * inv;
        double w0 = 1.0 - w1 - w2;
        if (w0 >= -tol && w1 >= -tol && w2 >= -tol) return c;
    }
    return -1;
}

std::vector<int> Mesh::gamma_facets() const {
    std::vector<int> out;
    for (int f = 0; f < n_facets(); ++f)
        if (facets_[f].tag == BoundaryTag::Gamma) out.push_back(f);
    return out;
}

std::vector<int> Mesh::sigma_facets() const {
    std::vector<int> out;
    for (int f = 0; f < n_facets(); ++f)
        if (facets_[f].tag == BoundaryTag::Sigma) out.push_back(f);
    return out;
}

bool Mesh::has_sigma() const {
    for (const Facet& f : facets_)
        if (f.tag == BoundaryTag::Sigma) return true;
    return false;
}

Mesh Mesh::read_text(std::istream& in) {
    auto expect_count = [&](const char* word) {
        std::string key;
        long n = -1;
        if (!(in >> key >> n) || key != word || n < 0)
            throw std::runtime_error(std::string("Mesh::read_text: expected '") + word + " N'");
        return n;
    };
    long nv = expect_count("vertices");
    long nc = expect_count("cells");
    long nf = expect_count("facets");

    std::vector<Vec2> verts(nv);
    for (long i = 0; i < nv; ++i)
        if (!(in >> verts[i].x >> verts[i].y))
            throw std::runtime_error("Mesh::read_text: bad vertex line");
    std::vector<std::array<int, 3>> cells(nc);
    for (long i = 0; i < nc; ++i)
        if (!(in >> cells[i][0] >> cells[i][1] >> cells[i][2]))
            throw std::runtime_error("Mesh::read_text: bad cell line");

    Mesh m = from_arrays(std::move(verts), std::move(cells));

    std::map<std::pair<int, int>, int> index;
    for (int f = 0; f < m.n_facets(); ++f)
        index.emplace(std::make_pair(m.facets_[f].v0, m.facets_[f].v1), f);

    std::vector<int> masters, slaves;
    for (long i = 0; i < nf; ++i) {
        int a, b, tag;
        if (!(in >> a >> b >> tag)) throw std::runtime_error("Mesh::read_text: bad facet line");
        auto key = std::minmax(a, b);
        auto it = index.find(key);
        if (it == index.end())
            throw std::runtime_error("Mesh::read_text: facet line does not match any mesh edge");
        if (tag < 0 || tag > 4) throw std::runtime_error("Mesh::read_text: unknown tag");
        m.facets_[it->second].tag = static_cast<BoundaryTag>(tag);
        if (tag == 3) masters.push_back(it->second);
        if (tag == 4) slaves.push_back(it->second);
    }
    for (const Facet& f : m.facets_)
        if (f.cells[1] < 0 && f.tag == BoundaryTag::Interior)
            throw std::runtime_error("UntaggedFacet: boundary facet tagged Interior in file");

    if (!masters.empty() || !slaves.empty()) {
        if (masters.size() != slaves.size())
            throw std::runtime_error("PeriodicMismatch: master/slave counts differ");
        // Infer the translation from the lexicographically smallest midpoints.
        auto mid_less = [&](int a, int b) {
            Vec2 ma = m.facet_midpoint(a), mb = m.facet_midpoint(b);
            return ma.x != mb.x ? ma.x < mb.x : ma.y < mb.y;
        };
        int m0 = *std::min_element(masters.begin(), masters.end(), mid_less);
        int s0 = *std::min_element(slaves.begin(), slaves.end(), mid_less);
        Vec2 t = m.facet_midpoint(s0) - m.facet_midpoint(m0);
        const double tol = 1e-9 * std::max(1.0, m.mesh_size());
        for (int f : masters) {
            Vec2 target = m.facet_midpoint(f) + t;
            int match = -1;
            for (int g : slaves)
                if (norm(m.facet_midpoint(g) - target) < tol) match = g;
            if (match < 0) throw std::runtime_error("PeriodicMismatch: inferred translation fails");
            Facet& mf = m.facets_[f];
            Facet& sf = m.facets_[match];
            mf.partner = match;
            sf.partner = f;
            mf.shift = t;
            mf.cells[1] = sf.cells[0];
            for (int sv : {sf.v0, sf.v1}) {
                Vec2 src = m.vertices_[sv] - t;
                int vmatch = -1;
                for (int mv : {mf.v0, mf.v1})
                    if (norm(m.vertices_[mv] - src) < tol) vmatch = mv;
                if (vmatch < 0) throw std::runtime_error("PeriodicMismatch: vertex pairing failed");
                m.vertex_alias_[sv] = vmatch;
            }
        }
    }
    return m;
}

Mesh Mesh::read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Mesh::read_text_file: cannot open " + path);
    return read_text(in);
}

void Mesh::write_text(std::ostream& out) const {
    out.precision(17);
    out << "vertices " << n_vertices() << "\n";
    out << "cells " << n_cells() << "\n";
    out << "facets " << n_facets() << "\n";
    for (const Vec2& v : vertices_) out << v.x << " " << v.y << "\n";
    for (const auto& c : cells_) out << c[0] << " " << c[1] << " " << c[2] << "\n";
    for (const Facet& f : facets_)
        out << f.v0 << " " << f.v1 << " " << static_cast<int>(f.tag) << "\n";
}

}  // namespace oseen
