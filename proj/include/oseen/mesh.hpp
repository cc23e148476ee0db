#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oseen/geometry.hpp"

namespace oseen {

enum class BoundaryTag : int {
    Interior = 0,
    Gamma = 1,
    Sigma = 2,
    PeriodicMaster = 3,
    PeriodicSlave = 4,
};

using PointPredicate = std::function<bool(const Vec2&)>;

struct Facet {
    int v0 = -1, v1 = -1;      // canonical endpoints, v0 < v1 by vertex index
    int cells[2] = {-1, -1};   // incident cells; boundary facets have cells[1] = -1
    Vec2 normal;               // unit, outward from cells[0]
    BoundaryTag tag = BoundaryTag::Interior;
    int partner = -1;          // periodic partner facet, -1 otherwise
    Vec2 shift;                // master facets: translation to the slave location

    bool is_boundary() const { return cells[1] < 0 && partner < 0; }
    bool couples_two_cells() const { return cells[1] >= 0; }
};

/// Conforming triangle mesh with oriented facets and boundary tags.
/// Immutable after construction/tagging; all queries are const.
class Mesh {
  public:
    static Mesh from_arrays(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

    /// Uniform nx x ny grid of squares on the rectangle [lo, hi], each split
    /// into two triangles by the lower-left to upper-right diagonal.
    static Mesh structured(int nx, int ny, Vec2 lo = {0, 0}, Vec2 hi = {1, 1});

    /// Structured grid restricted to the squares whose centroid satisfies
    /// `keep`; unused vertices are dropped.
    static Mesh masked(int nx, int ny, Vec2 lo, Vec2 hi, const PointPredicate& keep);

    static Mesh read_text(std::istream& in);
    static Mesh read_text_file(const std::string& path);
    void write_text(std::ostream& out) const;

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_cells() const { return static_cast<int>(cells_.size()); }
    int n_facets() const { return static_cast<int>(facets_.size()); }

    const Vec2& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& cell(int c) const { return cells_[c]; }
    const Facet& facet(int f) const { return facets_[f]; }

    /// Global facet index of local facet lf of cell c; local facets of cell
    /// (a,b,c) are (a,b), (b,c), (c,a).
    int cell_facet(int c, int lf) const { return cell_facets_[c][lf]; }

    double cell_area(int c) const { return areas_[c]; }
    double cell_diameter(int c) const { return diameters_[c]; }
    double total_area() const { return total_area_; }
    double mesh_size() const;
    double facet_length(int f) const;
    Vec2 facet_midpoint(int f) const;

    /// Outward unit normal of cell c on its local facet lf.
    Vec2 outward_normal(int c, int lf) const;

    /// Canonical representatives under periodic identification.
    int canonical_vertex(int v) const { return vertex_alias_[v]; }
    int canonical_facet(int f) const {
        return facets_[f].tag == BoundaryTag::PeriodicSlave ? facets_[f].partner : f;
    }

    /// Endpoints of the canonical facet seen from cell c (periodic slave
    /// cells see the master endpoints translated into their own frame).
    void facet_endpoints_for_cell(int f, int c, Vec2& p0, Vec2& p1) const;

    /// Tag every boundary facet. Periodic facets are paired first under the
    /// given translation; remaining midpoints go through gamma_pred, then
    /// sigma_pred. Throws UntaggedFacet / PeriodicMismatch.
    void tag_boundary(const PointPredicate& gamma_pred, const PointPredicate& sigma_pred,
                      std::optional<Vec2> periodic = std::nullopt);

    /// Convenience: whole boundary tagged Gamma.
    void tag_all_gamma();

    /// Cell containing p (barycentric test with tolerance), or -1.
    int find_cell(const Vec2& p) const;

    std::vector<int> gamma_facets() const;
    std::vector<int> sigma_facets() const;
    bool has_sigma() const;

  private:
    void build_topology();
    void check_geometry() const;

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<Facet> facets_;
    std::vector<std::array<int, 3>> cell_facets_;
    std::vector<int> vertex_alias_;
    std::vector<double> areas_;
    std::vector<double> diameters_;
    double total_area_ = 0.0;
};

}  // namespace oseen
