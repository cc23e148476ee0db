#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "oseen/dg_assembly.hpp"
#include "oseen/solver.hpp"

namespace oseen {

enum class Scheme { Mixed, Dg };

/// Closed-form solution fields of a manufactured scenario; the vorticity is
/// the scaled unknown omega = sqrt(nu) curl u.
struct ManufacturedSolution {
    VectorField velocity;
    ScalarField vorticity;
    VectorField vorticity_grad;
    ScalarField pressure;
    ScalarField velocity_div;  // null = divergence-free
};

struct Scenario {
    std::string name;
    double nu = 1.0;
    double sigma = 1.0;
    double c11 = 0.0, a11 = 0.0, d11 = 0.0;  // <= 0: defaults c11=a11=sigma, d11=nu
    PointPredicate gamma_pred, sigma_pred;
    std::optional<Vec2> periodic;
    GammaData gamma;              // Gamma boundary data
    ScalarField p_sigma, u_sigma; // Sigma boundary data
    VectorField forcing;          // steady volume force
    VectorField initial_velocity; // transient initial state
    ConvectiveField beta = ConvectiveField::zero();
    std::optional<ManufacturedSolution> exact;

    OseenParams params() const;
    void apply_tags(Mesh& mesh) const;
    std::shared_ptr<Mesh> make_structured_mesh(int n) const;
};

Scenario scenario_test1(double nu = 0.1, double sigma = 10.0);
Scenario scenario_zero(double nu = 0.1, double sigma = 10.0);
Scenario scenario_cavity();
Scenario scenario_kh();
Scenario scenario_by_name(const std::string& name);

/// Initial velocity of the Kelvin-Helmholtz mixing layer (Test 4 data).
Vec2 kh_initial_velocity(const Vec2& p);

/// Masked multi-block approximation of the open-cavity geometry:
/// main chamber (0,1.2)x(0,1), inlet (0.25,0.45)x(-0.1,0),
/// outlet (1.2,1.3)x(0.7,0.9). refine=1 gives pitch 0.05.
Mesh cavity_mesh(int refine = 1);

/// One scheme's mesh + space triple (shared ownership so solutions remain
/// valid after the builder goes out of scope).
struct Discretisation {
    std::shared_ptr<Mesh> mesh;
    std::shared_ptr<FESpace> H, Z, Q;
    Scheme scheme = Scheme::Mixed;
    int k = 0;

    SchemeSpaces spaces() const { return {H.get(), Z.get(), Q.get()}; }
    static Discretisation make(std::shared_ptr<Mesh> mesh, Scheme scheme, int k);
};

struct SolutionTriple {
    Discretisation disc;
    Eigen::VectorXd u, w, p;
    double multiplier = 0.0;
    SolveReport report;
    double nu = 1.0, sigma = 1.0;
    double beta_inf = 0.0;
    double solvability = 0.0;  // 2 |beta|_inf^2 / (nu sigma)

    FeField velocity() const { return FeField(*disc.H, u); }
    FeField vorticity() const { return FeField(*disc.Z, w); }
    FeField pressure() const { return FeField(*disc.Q, p); }
};

/// Steady Oseen solve. Warns (does not abort) when the solvability
/// indicator reaches 1. zero_mean defaults to "Sigma empty".
SolutionTriple solve_steady(const Scenario& sc, const Discretisation& disc,
                            std::optional<bool> zero_mean = std::nullopt);

struct TimeLoopConfig {
    double dt = 0.1;
    int n_steps = 0;
    Scheme scheme = Scheme::Mixed;
    int k = 0;
    enum class Init { FromField, StokesSolve };
    Init initial_condition = Init::FromField;
    bool update_beta = true;      // beta <- previous velocity each step
    bool couple_previous = true;  // f <- sigma * previous velocity + forcing

    double sigma() const { return 1.0 / dt; }
};

struct StepDiagnostics {
    int step = 0;
    double t = 0.0;
    double enstrophy = 0.0, palinstrophy = 0.0;
    double enstrophy_rescaled = 0.0, palinstrophy_rescaled = 0.0;
    double div_linf = 0.0;
    double solvability = 0.0;
};

struct TransientResult {
    std::vector<StepDiagnostics> steps;  // includes the t=0 state
    SolutionTriple final;
};

using SnapshotCallback = std::function<void(int step, double t, const SolutionTriple&)>;

TransientResult run_transient(const TimeLoopConfig& cfg, const Scenario& sc,
                              const Discretisation& disc,
                              const SnapshotCallback& on_snapshot = {});

}  // namespace oseen
