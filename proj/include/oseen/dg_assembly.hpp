#pragma once

#include "oseen/mixed_assembly.hpp"

namespace oseen {

/// Facet trace context for the DG forms: two-sided quadrature points (the
/// minus side is translated on periodic facets), the plus-side normal, and
/// the stabilisation weights C11/A11/D11 of the facet.
struct FacetContext {
    int facet = -1;
    int cell_plus = -1;
    int cell_minus = -1;  // -1 on boundary facets
    BoundaryTag tag = BoundaryTag::Interior;
    Vec2 normal;  // outward from cell_plus
    double length = 0.0;
    double C11 = 0.0, A11 = 0.0, D11 = 0.0;
    std::vector<Vec2> points;        // plus-side quadrature points
    std::vector<Vec2> points_minus;  // minus-side (shifted on periodic facets)
    std::vector<double> weights;     // include the facet length

    bool two_sided() const { return cell_minus >= 0; }
};

FacetContext make_facet_context(const Mesh& mesh, int facet, const OseenParams& p,
                                int n_points);

/// Number of Gauss points per facet for a DG scheme with velocity space H.
int facet_quadrature_points(const FESpace& Hdg);

// b1~: sqrt(nu) sum_T (curl th, u)_T + sqrt(nu) sum_{E u Gamma} <{u}, [th]_T>,
// rows Z, cols H.  The _ipp variant is the integrated-by-parts form
// sqrt(nu) sum_T (curl u, th)_T + sqrt(nu) sum_{E u Sigma} <[u]_T, {th}>;
// the two agree entrywise up to rounding.
SparseMatrix assemble_b1_dg(const FESpace& Hdg, const FESpace& Zdg, double nu);
SparseMatrix assemble_b1_dg_ipp(const FESpace& Hdg, const FESpace& Zdg, double nu);

// b2~: -sum_T (p, div v)_T + sum_{E u Gamma} <{p}, [v]_N>, rows Q, cols H,
// and its integrated-by-parts form sum_T (v, grad p)_T - sum_{E u Sigma} <{v}, [p]>.
SparseMatrix assemble_b2_dg(const FESpace& Hdg, const FESpace& Qdg);
SparseMatrix assemble_b2_dg_ipp(const FESpace& Hdg, const FESpace& Qdg);

/// Velocity jump stabilisation: sqrt(nu) C11 tangential jumps on E u Sigma
/// plus A11 normal jumps on E u Gamma. Symmetric positive semidefinite.
SparseMatrix assemble_j(const FESpace& Hdg, const OseenParams& p);

/// Pressure jump stabilisation on E u Sigma. Symmetric positive semidefinite.
SparseMatrix assemble_e(const FESpace& Qdg, const OseenParams& p);

/// [F~; G~; L~] with the Sigma data terms of the paper and the Gamma data
/// lifting (vorticity trace and normal velocity) used by the test problems.
Eigen::VectorXd assemble_dg_rhs(const OseenParams& p, const SchemeSpaces& spaces,
                                const GammaData& gamma);

SaddleSystem assemble_dg_system(const OseenParams& p, const SchemeSpaces& spaces,
                                const GammaData& gamma, bool zero_mean);

}  // namespace oseen
