#pragma once

#include <Eigen/Dense>

#include "oseen/fespace.hpp"
#include "oseen/sparse.hpp"

namespace oseen {

/// Convective field beta: an analytic callable, or a discrete velocity from
/// a previous solve (time stepping) evaluated cellwise at quadrature points.
struct ConvectiveField {
    VectorField analytic;            // used when space == nullptr
    const FESpace* space = nullptr;  // discrete representation
    Eigen::VectorXd coeffs;

    static ConvectiveField zero() {
        return {[](const Vec2&) { return Vec2{0, 0}; }, nullptr, {}};
    }
    static ConvectiveField from_function(VectorField f) { return {std::move(f), nullptr, {}}; }
    static ConvectiveField from_field(const FESpace& s, Eigen::VectorXd c) {
        return {nullptr, &s, std::move(c)};
    }
    bool is_discrete() const { return space != nullptr; }
};

struct OseenParams {
    double sigma = 1.0;  // reaction coefficient, 1/dt when time stepping
    double nu = 1.0;     // kinematic viscosity
    ConvectiveField beta = ConvectiveField::zero();
    VectorField f;        // volume force (null = zero)
    ScalarField p_sigma;  // Bernoulli pressure datum on Sigma (null = zero)
    ScalarField u_sigma;  // tangential velocity datum on Sigma (null = zero)
    double c11 = 1.0, a11 = 1.0, d11 = 1.0;  // DG stabilisation constants

    double solvability_indicator(double beta_inf) const {
        return 2.0 * beta_inf * beta_inf / (nu * sigma);
    }
    void validate() const;
};

/// Velocity/vorticity/pressure space triple of one scheme.
struct SchemeSpaces {
    const FESpace* H = nullptr;
    const FESpace* Z = nullptr;
    const FESpace* Q = nullptr;
};

/// Boundary data on Gamma: normal velocity trace (essential for the mixed
/// scheme, flux data for DG) and the scaled vorticity trace.
struct GammaData {
    ScalarField u_normal;   // u.n on Gamma (null = 0)
    ScalarField vorticity;  // omega on Gamma (null = 0)
};

struct SaddleSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    int n_u = 0, n_w = 0, n_p = 0;
    bool has_multiplier = false;
    double beta_inf = 0.0;          // max |beta| over assembly quadrature points
    std::vector<int> constrained;   // eliminated essential dofs (mixed scheme)

    int offset_u() const { return 0; }
    int offset_w() const { return n_u; }
    int offset_p() const { return n_u + n_w; }
    int size() const { return n_u + n_w + n_p + (has_multiplier ? 1 : 0); }
};

/// Quadrature degree used for every form of a scheme with velocity space H
/// (2(k+1)+2 in terms of the scheme order k).
int form_quadrature_degree(const FESpace& H);

// The bilinear forms of the conforming scheme, as blocks.
// Row/column spaces follow the form's (trial from H/Z, test) signature:
//   a:  sigma (u, v)           rows H, cols H
//   b1: sqrt(nu) (curl th, v)  rows Z, cols H
//   b2: -(q, div v)            rows Q, cols H
//   c:  1/sqrt(nu) (th x beta, v)  rows H, cols Z
//   d:  (w, th)                rows Z, cols Z
SparseMatrix assemble_a(const FESpace& H, double sigma);
SparseMatrix assemble_b1(const FESpace& H, const FESpace& Z, double nu);
SparseMatrix assemble_b2(const FESpace& H, const FESpace& Q);
SparseMatrix assemble_c(const FESpace& Z, const FESpace& H, double nu,
                        const ConvectiveField& beta, double* beta_inf = nullptr);
SparseMatrix assemble_d(const FESpace& Z);

/// Right-hand side [F; G; 0]: F(v) = (f, v) - <v.n, p_sigma>_Sigma and
/// G(th) = -sqrt(nu) <u_sigma, th>_Sigma. Throws SigmaDataOnGamma when
/// boundary data is given but the mesh has no Sigma facets.
Eigen::VectorXd assemble_rhs(const OseenParams& p, const SchemeSpaces& spaces);

/// Full conforming mixed system with essential Gamma constraints applied by
/// symmetric elimination and an optional zero-mean pressure multiplier.
SaddleSystem assemble_mixed_system(const OseenParams& p, const SchemeSpaces& spaces,
                                   const GammaData& gamma, bool zero_mean);

/// Essential Gamma constraint values for the mixed scheme: RT facet moments
/// of gamma.u_normal and Lagrange node values of gamma.vorticity.
void mixed_gamma_constraints(const SchemeSpaces& spaces, const GammaData& gamma,
                             std::vector<int>& dofs, std::vector<double>& values);

}  // namespace oseen
