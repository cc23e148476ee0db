#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "oseen/mesh.hpp"
#include "oseen/quadrature.hpp"

namespace oseen {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

enum class SpaceKind {
    RTk,           // H(div)-conforming Raviart-Thomas, degree k
    LagrangeCont,  // globally continuous Lagrange (vorticity space)
    PkDisc,        // discontinuous scalar, nodal per cell (pressure, DG vorticity)
    VectorPkDisc,  // discontinuous vector, nodal per cell (DG velocity)
};

class FESpace;

/// Per-cell basis evaluator at arbitrary physical points inside the cell.
/// RT bases are built per cell in physical coordinates (moment-dual to facet
/// normal moments against the global facet orientation); the nodal families
/// are mapped affinely from the reference element.
class CellEval {
  public:
    int ndof() const { return ndof_; }

    /// Scalar kinds: vals[i*n + q]; grads optional.
    void eval_scalar(const Vec2* pts, int n, double* vals, Vec2* grads = nullptr) const;

    /// Vector kinds: vals[i*n + q]; divs/curls optional.
    void eval_vector(const Vec2* pts, int n, Vec2* vals, double* divs = nullptr,
                     double* curls = nullptr) const;

  private:
    friend class FESpace;
    const FESpace* space_ = nullptr;
    int cell_ = -1;
    int ndof_ = 0;
    Vec2 shift_;             // cell centroid (RT raw basis shift)
    double scale_ = 1.0;     // cell diameter (RT raw basis scale)
    Eigen::MatrixXd coef_;   // RT: raw-to-nodal coefficients, column per dof
    Vec2 map_origin_;        // affine inverse for reference-based kinds
    double inv_jac_[4] = {0, 0, 0, 0};
};

class FESpace {
  public:
    FESpace(const Mesh& mesh, SpaceKind kind, int degree);

    const Mesh& mesh() const { return *mesh_; }
    SpaceKind kind() const { return kind_; }
    int degree() const { return degree_; }
    int n_dofs() const { return n_dofs_; }
    bool vector_valued() const {
        return kind_ == SpaceKind::RTk || kind_ == SpaceKind::VectorPkDisc;
    }

    int n_cell_dofs() const { return n_cell_dofs_; }
    void cell_dofs(int c, std::vector<int>& out) const;

    CellEval evaluator(int c) const;

    /// Facet-attached global dofs (RT normal moments / Lagrange edge slots).
    int n_facet_dofs() const { return n_facet_dofs_; }
    int facet_dof_base(int f) const;
    /// Lagrange vertex dof (canonical vertex), -1 for other kinds.
    int vertex_dof(int v) const;

    /// Physical position of facet-slot node `slot` on canonical facet f
    /// (Lagrange only).
    Vec2 facet_node_position(int f, int slot) const;

    /// Integrals of all basis functions (used by the zero-mean gauge row).
    Eigen::VectorXd basis_integrals() const;

  private:
    friend class CellEval;
    const Mesh* mesh_;
    SpaceKind kind_;
    int degree_;
    int n_dofs_ = 0;
    int n_cell_dofs_ = 0;
    int n_facet_dofs_ = 0;
    int facet_dof_total_ = 0;
    int vertex_dof_total_ = 0;
    std::vector<int> facet_base_;   // per canonical facet
    std::vector<int> vertex_dof_;   // Lagrange, canonical vertices
};

/// Raviart-Thomas interpolation Pi_h: facet normal moments (and interior
/// moments for k >= 1) of an analytic field.
Eigen::VectorXd interpolate_rt(const FESpace& rt, const VectorField& v);

/// L2 projection; mass systems are solved per cell for discontinuous kinds
/// and globally otherwise.
Eigen::VectorXd project_l2(const FESpace& space, const ScalarField& f, int extra_degree = 4);
Eigen::VectorXd project_l2_vector(const FESpace& space, const VectorField& f,
                                  int extra_degree = 4);

/// Nodal interpolation for the nodal families (LagrangeCont, PkDisc).
Eigen::VectorXd interpolate_nodal(const FESpace& space, const ScalarField& f);

/// Discrete field: coefficient vector over a space.
struct FeField {
    const FESpace* space = nullptr;
    Eigen::VectorXd coeffs;

    FeField() = default;
    FeField(const FESpace& s, Eigen::VectorXd c) : space(&s), coeffs(std::move(c)) {}

    void eval_scalar(int cell, const Vec2* pts, int n, double* vals,
                     Vec2* grads = nullptr) const;
    void eval_vector(int cell, const Vec2* pts, int n, Vec2* vals, double* divs = nullptr,
                     double* curls = nullptr) const;
};

/// Shifted Legendre polynomial P_m on [0,1] (facet moment weights).
double shifted_legendre(int m, double s);

}  // namespace oseen
