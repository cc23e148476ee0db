#pragma once

#include <iosfwd>

#include "oseen/driver.hpp"

namespace oseen {

struct ErrorReport {
    double h = 0.0;
    int dofs = 0;
    double err_u_Hdiv = 0.0;
    double err_w_Z = 0.0;
    double err_p_L2 = 0.0;
    double err_A_seminorm = 0.0;  // DG energy seminorm of the error
    double div_linf = 0.0;
};

/// Error norms against a manufactured solution: H(div) for the velocity,
/// the viscosity-weighted Z-norm for the vorticity, L2 for the pressure.
/// Divergences/curls are broken (elementwise) for DG solutions.
ErrorReport error_norms(const SolutionTriple& sol, const ManufacturedSolution& exact);

/// DG energy seminorm of the error triple:
/// sigma |e_u|^2 + |e_w|^2 + |e_u|_j^2 + |e_p|_e^2.
double dg_seminorm(const SolutionTriple& sol, const ManufacturedSolution& exact,
                   const OseenParams& params);

/// Max |coefficient| of the divergence projected into the pressure space
/// (nodal values; exact projection since div maps into P_k cellwise).
double divergence_linf(const SolutionTriple& sol);

/// Observed convergence rates log2(err[i-1]/err[i]) for a halving-h family.
/// Throws DegenerateError when an error vanishes.
std::vector<double> fit_rates(const std::vector<double>& errors);

struct FlowDiagnostics {
    double enstrophy = 0.0;
    double palinstrophy = 0.0;
    double enstrophy_rescaled = 0.0;   // field rescaled by 1/sqrt(nu) first
    double palinstrophy_rescaled = 0.0;
};

/// E = |w|^2/(2 nu), P = |grad w|^2/(2 nu) with the broken gradient; the
/// rescaled pair applies the 1/sqrt(nu) vorticity rescaling before the
/// formula (both conventions are emitted).
FlowDiagnostics enstrophy_palinstrophy(const SolutionTriple& sol, double nu);

struct ProfileSample {
    Vec2 point;
    Vec2 velocity;
    double vorticity = 0.0;
    double pressure = 0.0;
};

/// Field samples at n uniform points on the segment [a, b].
/// Throws PointOutsideDomain when a sample point is not in the mesh.
std::vector<ProfileSample> midline_profiles(const SolutionTriple& sol, Vec2 a, Vec2 b, int n);

/// CSV writers (fixed formatting so identical runs are byte-identical).
void write_error_table(std::ostream& out, const std::vector<ErrorReport>& rows, Scheme scheme);
void write_transient_csv(std::ostream& out, const std::vector<StepDiagnostics>& steps);
void write_profile_csv(std::ostream& out, const std::vector<ProfileSample>& samples);

}  // namespace oseen
