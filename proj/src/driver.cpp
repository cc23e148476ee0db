#include "oseen/driver.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "oseen/diagnostics.hpp"

namespace oseen {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Manufactured fields of Test 1 on the unit square (beta = exact velocity):
///   u = (sin^2(pi x) sin^2(pi y) cos(pi y), -sin(2 pi x) sin^3(pi y)/3)
///   p = x^4 - y^4,  omega = sqrt(nu) curl u.
struct Test1Fields {
    double nu, sigma;

    Vec2 velocity(const Vec2& pt) const {
        double s = std::sin(kPi * pt.x), S = std::sin(kPi * pt.y), C = std::cos(kPi * pt.y);
        return {s * s * S * S * C, -std::sin(2 * kPi * pt.x) * S * S * S / 3.0};
    }

    double curl_u(const Vec2& pt) const {
        double s = std::sin(kPi * pt.x), S = std::sin(kPi * pt.y), C = std::cos(kPi * pt.y);
        return -(2 * kPi / 3.0) * std::cos(2 * kPi * pt.x) * S * S * S -
               kPi * s * s * (2 * S * C * C - S * S * S);
    }

    Vec2 curl_u_grad(const Vec2& pt) const {
        double s = std::sin(kPi * pt.x), S = std::sin(kPi * pt.y), C = std::cos(kPi * pt.y);
        double s2x = std::sin(2 * kPi * pt.x), c2x = std::cos(2 * kPi * pt.x);
        double wx = (4 * kPi * kPi / 3.0) * s2x * S * S * S -
                    kPi * kPi * s2x * (2 * S * C * C - S * S * S);
        double wy = -2 * kPi * kPi * c2x * S * S * C -
                    kPi * kPi * s * s * (2 * C * C * C - 7 * S * S * C);
        return {wx, wy};
    }

    double pressure(const Vec2& pt) const {
        return pt.x * pt.x * pt.x * pt.x - pt.y * pt.y * pt.y * pt.y;
    }

    Vec2 forcing(const Vec2& pt) const {
        // sigma u + sqrt(nu) curl omega + (omega x beta)/sqrt(nu) + grad p
        // with omega = sqrt(nu) w, beta = u:
        //   f = sigma u + nu rot(w) + w (-u2, u1) + grad p
        Vec2 u = velocity(pt);
        double w = curl_u(pt);
        Vec2 gw = curl_u_grad(pt);
        return {sigma * u.x + nu * gw.y - w * u.y + 4 * pt.x * pt.x * pt.x,
                sigma * u.y - nu * gw.x + w * u.x - 4 * pt.y * pt.y * pt.y};
    }
};

bool always(const Vec2&) { return true; }
bool never(const Vec2&) { return false; }

}  // namespace

OseenParams Scenario::params() const {
    OseenParams p;
    p.nu = nu;
    p.sigma = sigma;
    p.beta = beta;
    p.f = forcing;
    p.p_sigma = p_sigma;
    p.u_sigma = u_sigma;
    p.c11 = c11 > 0 ? c11 : sigma;
    p.a11 = a11 > 0 ? a11 : sigma;
    p.d11 = d11 > 0 ? d11 : nu;
    return p;
}

void Scenario::apply_tags(Mesh& mesh) const {
    mesh.tag_boundary(gamma_pred ? gamma_pred : always, sigma_pred ? sigma_pred : never,
                      periodic);
}

std::shared_ptr<Mesh> Scenario::make_structured_mesh(int n) const {
    auto mesh = std::make_shared<Mesh>(Mesh::structured(n, n));
    apply_tags(*mesh);
    return mesh;
}

Scenario scenario_test1(double nu, double sigma) {
    Test1Fields fields{nu, sigma};
    Scenario sc;
    sc.name = "test1";
    sc.nu = nu;
    sc.sigma = sigma;
    sc.gamma_pred = always;
    double sqnu = std::sqrt(nu);
    sc.gamma.vorticity = [fields, sqnu](const Vec2& p) { return sqnu * fields.curl_u(p); };
    sc.forcing = [fields](const Vec2& p) { return fields.forcing(p); };
    sc.initial_velocity = [fields](const Vec2& p) { return fields.velocity(p); };
    sc.beta = ConvectiveField::from_function(
        [fields](const Vec2& p) { return fields.velocity(p); });
    ManufacturedSolution exact;
    exact.velocity = [fields](const Vec2& p) { return fields.velocity(p); };
    exact.vorticity = [fields, sqnu](const Vec2& p) { return sqnu * fields.curl_u(p); };
    exact.vorticity_grad = [fields, sqnu](const Vec2& p) {
        return sqnu * fields.curl_u_grad(p);
    };
    exact.pressure = [fields](const Vec2& p) { return fields.pressure(p); };
    sc.exact = std::move(exact);
    return sc;
}

Scenario scenario_zero(double nu, double sigma) {
    Scenario sc;
    sc.name = "zero";
    sc.nu = nu;
    sc.sigma = sigma;
    sc.gamma_pred = always;
    sc.initial_velocity = [](const Vec2&) { return Vec2{0, 0}; };
    ManufacturedSolution exact;
    exact.velocity = [](const Vec2&) { return Vec2{0, 0}; };
    exact.vorticity = [](const Vec2&) { return 0.0; };
    exact.vorticity_grad = [](const Vec2&) { return Vec2{0, 0}; };
    exact.pressure = [](const Vec2&) { return 0.0; };
    sc.exact = std::move(exact);
    return sc;
}

Mesh cavity_mesh(int refine) {
    if (refine < 1) throw std::runtime_error("cavity_mesh: refine must be >= 1");
    auto inside = [](const Vec2& p) {
        bool main_box = p.x > 0.0 && p.x < 1.2 && p.y > 0.0 && p.y < 1.0;
        bool inlet = p.x > 0.25 && p.x < 0.45 && p.y > -0.1 && p.y < 0.0;
        bool outlet = p.x > 1.2 && p.x < 1.3 && p.y > 0.7 && p.y < 0.9;
        return main_box || inlet || outlet;
    };
    return Mesh::masked(26 * refine, 22 * refine, {0.0, -0.1}, {1.3, 1.0}, inside);
}

Scenario scenario_cavity() {
    Scenario sc;
    sc.name = "open-cavity";
    sc.nu = 0.001;
    sc.sigma = 10.0;
    sc.gamma_pred = always;
    const double sqnu = std::sqrt(sc.nu);
    const double eps = 1e-9;
    // parabolic inlet (bottom of the inlet channel) and outlet (right wall
    // of the outlet channel), slip elsewhere
    sc.gamma.u_normal = [eps](const Vec2& p) {
        if (p.y < -0.1 + eps) return -75.0 * (p.x - 0.25) * (0.45 - p.x);
        if (p.x > 1.3 - eps) return 75.0 * (p.y - 0.7) * (0.9 - p.y);
        return 0.0;
    };
    sc.gamma.vorticity = [eps, sqnu](const Vec2& p) {
        if (p.y < -0.1 + eps) return 75.0 * sqnu * (0.7 - 2.0 * p.x);
        if (p.x > 1.3 - eps) return -75.0 * sqnu * (1.6 - 2.0 * p.y);
        return 0.0;
    };
    sc.initial_velocity = [](const Vec2& p) {
        double sx = std::sin(kPi / 1.3 * p.x);
        double sy = std::sin(kPi / 1.1 * (p.y + 0.1));
        double cy = std::cos(kPi / 1.1 * (p.y + 0.1));
        return Vec2{sx * sx * sy * sy * cy,
                    -std::sin(2.0 / 1.3 * kPi * p.x) * sy * sy * sy / 3.0};
    };
    sc.beta = ConvectiveField::from_function(sc.initial_velocity);
    return sc;
}

Vec2 kh_initial_velocity(const Vec2& p) {
    const double cn = 0.001, u_inf = 1.0, delta0 = 1.0 / 28.0;
    const double wa = 8.0 * kPi, wb = 20.0 * kPi;
    double dy = p.y - 0.5;
    double gauss = std::exp(-dy * dy / (delta0 * delta0));
    double cosx = std::cos(wa * p.x) + std::cos(wb * p.x);
    double u1 = u_inf * std::tanh((2.0 * p.y - 1.0) / delta0) -
                cn * u_inf * cosx * (2.0 * p.y - 1.0) / (delta0 * delta0) * gauss;
    double u2 = cn * u_inf * gauss * (wa * std::sin(wa * p.x) + wb * std::sin(wb * p.x));
    return {u1, u2};
}

Scenario scenario_kh() {
    Scenario sc;
    sc.name = "kh";
    const double u_inf = 1.0, delta0 = 1.0 / 28.0, reynolds = 10000.0;
    sc.nu = delta0 * u_inf / reynolds;
    const double t_bar = delta0 / u_inf;
    sc.sigma = 1.0 / (t_bar / 20.0);  // dt = t_bar/20
    const double eps = 1e-9;
    sc.gamma_pred = [eps](const Vec2& p) { return p.y < eps || p.y > 1.0 - eps; };
    sc.periodic = Vec2{1.0, 0.0};
    sc.initial_velocity = kh_initial_velocity;
    sc.beta = ConvectiveField::from_function(kh_initial_velocity);
    return sc;
}

Scenario scenario_by_name(const std::string& name) {
    if (name == "test1") return scenario_test1();
    if (name == "zero") return scenario_zero();
    if (name == "open-cavity" || name == "cavity") return scenario_cavity();
    if (name == "kh") return scenario_kh();
    throw std::runtime_error("unknown scenario: " + name);
}

Discretisation Discretisation::make(std::shared_ptr<Mesh> mesh, Scheme scheme, int k) {
    if (k < 0 || k > 2)
        throw std::runtime_error("UnsupportedDegree: scheme order k must be 0, 1, or 2");
    Discretisation d;
    d.mesh = std::move(mesh);
    d.scheme = scheme;
    d.k = k;
    if (scheme == Scheme::Mixed) {
        d.H = std::make_shared<FESpace>(*d.mesh, SpaceKind::RTk, k);
        d.Z = std::make_shared<FESpace>(*d.mesh, SpaceKind::LagrangeCont, k + 1);
    } else {
        d.H = std::make_shared<FESpace>(*d.mesh, SpaceKind::VectorPkDisc, k + 1);
        d.Z = std::make_shared<FESpace>(*d.mesh, SpaceKind::PkDisc, k);
    }
    d.Q = std::make_shared<FESpace>(*d.mesh, SpaceKind::PkDisc, k);
    return d;
}

namespace {

SolutionTriple finish_solve(const Discretisation& disc, const SaddleSystem& sys,
                            const Eigen::VectorXd& x, const SolveReport& report) {
    SolutionTriple sol;
    sol.disc = disc;
    sol.u = x.segment(sys.offset_u(), sys.n_u);
    sol.w = x.segment(sys.offset_w(), sys.n_w);
    sol.p = x.segment(sys.offset_p(), sys.n_p);
    if (sys.has_multiplier) sol.multiplier = x[sys.size() - 1];
    sol.report = report;
    sol.beta_inf = sys.beta_inf;
    return sol;
}

void warn_solvability(const OseenParams& p, double beta_inf, const std::string& what) {
    double ind = p.solvability_indicator(beta_inf);
    if (ind >= 1.0)
        std::cerr << "warning: " << what << ": solvability indicator 2|beta|^2/(nu sigma) = "
                  << ind << " >= 1 (continuing)\n";
}

SaddleSystem assemble_for(const Discretisation& disc, const OseenParams& p,
                          const GammaData& gamma, bool zero_mean) {
    if (disc.scheme == Scheme::Mixed)
        return assemble_mixed_system(p, disc.spaces(), gamma, zero_mean);
    return assemble_dg_system(p, disc.spaces(), gamma, zero_mean);
}

}  // namespace

SolutionTriple solve_steady(const Scenario& sc, const Discretisation& disc,
                            std::optional<bool> zero_mean) {
    OseenParams p = sc.params();
    bool gauge = zero_mean.value_or(!disc.mesh->has_sigma());
    SaddleSystem sys = assemble_for(disc, p, sc.gamma, gauge);
    warn_solvability(p, sys.beta_inf, "solve_steady(" + sc.name + ")");
    SolveReport report;
    Eigen::VectorXd x = lu_solve(sys.matrix, sys.rhs, &report);
    SolutionTriple sol = finish_solve(disc, sys, x, report);
    sol.nu = p.nu;
    sol.sigma = p.sigma;
    sol.solvability = p.solvability_indicator(sys.beta_inf);
    return sol;
}

namespace {

/// omega_h compatible with a velocity: the discrete-curl mass solve
/// d(w, th) = b1(u_h, th) of the scheme at hand.
Eigen::VectorXd discrete_vorticity(const Discretisation& disc, const Eigen::VectorXd& u,
                                   double nu) {
    SparseMatrix B1 = disc.scheme == Scheme::Mixed
                          ? assemble_b1(*disc.H, *disc.Z, nu)
                          : assemble_b1_dg(*disc.H, *disc.Z, nu);
    SparseMatrix D = assemble_d(*disc.Z);
    return lu_solve(D, B1.apply(u));
}

}  // namespace

TransientResult run_transient(const TimeLoopConfig& cfg, const Scenario& sc,
                              const Discretisation& disc, const SnapshotCallback& on_snapshot) {
    if (cfg.dt <= 0.0) throw std::runtime_error("run_transient: dt must be positive");
    if (cfg.n_steps < 0) throw std::runtime_error("run_transient: n_steps must be >= 0");

    const double sigma = cfg.sigma();
    OseenParams base = sc.params();
    base.sigma = sigma;
    if (sc.c11 <= 0) base.c11 = sigma;
    if (sc.a11 <= 0) base.a11 = sigma;

    // Initial velocity coefficients in the scheme's own space.
    Eigen::VectorXd u_prev;
    if (cfg.initial_condition == TimeLoopConfig::Init::StokesSolve) {
        OseenParams stokes = base;
        stokes.sigma = 0.0;
        stokes.beta = ConvectiveField::zero();
        SaddleSystem sys = assemble_for(disc, stokes, sc.gamma, !disc.mesh->has_sigma());
        Eigen::VectorXd x = lu_solve(sys.matrix, sys.rhs);
        u_prev = x.segment(0, sys.n_u);
    } else {
        if (!sc.initial_velocity)
            throw std::runtime_error("run_transient: scenario has no initial velocity");
        u_prev = disc.scheme == Scheme::Mixed
                     ? interpolate_rt(*disc.H, sc.initial_velocity)
                     : project_l2_vector(*disc.H, sc.initial_velocity);
    }

    TransientResult result;
    // State at t = 0: compatible vorticity, no pressure.
    {
        SolutionTriple init;
        init.disc = disc;
        init.nu = base.nu;
        init.sigma = sigma;
        init.u = u_prev;
        init.w = discrete_vorticity(disc, u_prev, base.nu);
        init.p = Eigen::VectorXd::Zero(disc.Q->n_dofs());
        FlowDiagnostics fd = enstrophy_palinstrophy(init, base.nu);
        StepDiagnostics d0;
        d0.step = 0;
        d0.t = 0.0;
        d0.enstrophy = fd.enstrophy;
        d0.palinstrophy = fd.palinstrophy;
        d0.enstrophy_rescaled = fd.enstrophy_rescaled;
        d0.palinstrophy_rescaled = fd.palinstrophy_rescaled;
        d0.div_linf = divergence_linf(init);
        result.steps.push_back(d0);
        result.final = init;
        if (on_snapshot) on_snapshot(0, 0.0, init);
    }

    // sigma * (u_prev, v) enters the load exactly through the velocity mass
    // matrix; eliminated essential rows keep their boundary values.
    SparseMatrix mass_sigma = assemble_a(*disc.H, sigma);
    std::unique_ptr<LuFactorisation> lu;
    bool gauge = !disc.mesh->has_sigma();
    bool warned = false;

    for (int step = 1; step <= cfg.n_steps; ++step) {
        OseenParams p = base;
        if (cfg.update_beta)
            p.beta = ConvectiveField::from_field(*disc.H, u_prev);
        SaddleSystem sys = assemble_for(disc, p, sc.gamma, gauge);
        if (cfg.couple_previous) {
            Eigen::VectorXd load = mass_sigma.apply(u_prev);
            for (int dof : sys.constrained)
                if (dof < sys.n_u) load[dof] = 0.0;
            sys.rhs.segment(0, sys.n_u) += load;
        }
        if (!warned && p.solvability_indicator(sys.beta_inf) >= 1.0) {
            warn_solvability(p, sys.beta_inf, "run_transient(" + sc.name + ")");
            warned = true;
        }
        if (!lu)
            lu = std::make_unique<LuFactorisation>(sys.matrix);
        else
            lu->refactorize(sys.matrix);
        SolveReport report;
        Eigen::VectorXd x = lu->solve(sys.rhs, &report);
        SolutionTriple sol = finish_solve(disc, sys, x, report);
        sol.nu = p.nu;
        sol.sigma = p.sigma;
        sol.solvability = p.solvability_indicator(sys.beta_inf);

        FlowDiagnostics fd = enstrophy_palinstrophy(sol, base.nu);
        StepDiagnostics d;
        d.step = step;
        d.t = step * cfg.dt;
        d.enstrophy = fd.enstrophy;
        d.palinstrophy = fd.palinstrophy;
        d.enstrophy_rescaled = fd.enstrophy_rescaled;
        d.palinstrophy_rescaled = fd.palinstrophy_rescaled;
        d.div_linf = divergence_linf(sol);
        d.solvability = sol.solvability;
        result.steps.push_back(d);

        if (on_snapshot) on_snapshot(step, d.t, sol);
        u_prev = sol.u;
        result.final = std::move(sol);
    }
    return result;
}

}  // namespace oseen
