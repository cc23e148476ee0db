#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "oseen/diagnostics.hpp"
#include "oseen/driver.hpp"
#include "oseen/selftest.hpp"
#include "oseen/vtk_io.hpp"

using namespace oseen;

namespace {

struct RunConfig {
    std::string command;
    std::string scheme = "mixed";
    int k = 0;
    int levels = 5;
    std::string mesh_file;
    int mesh_n = 0;  // structured n x n when no mesh file is given
    std::string scenario = "test1";
    int steps = 0;
    double dt = 0.0;
    double nu = 0.0, sigma = 0.0;          // 0: scenario defaults
    double c11 = 0.0, a11 = 0.0, d11 = 0.0;  // 0: scenario defaults
    std::string out_dir;
    std::string dump_matrix;
    std::string profile;  // "x0,y0,x1,y1,n"
    int snap_every = 1;
};

Scheme parse_scheme(const std::string& s) {
    if (s == "mixed") return Scheme::Mixed;
    if (s == "dg") return Scheme::Dg;
    throw CLI::ValidationError("--scheme", "must be 'mixed' or 'dg'");
}

Scenario configure_scenario(const RunConfig& cfg) {
    Scenario sc = scenario_by_name(cfg.scenario);
    if (cfg.nu > 0) sc.nu = cfg.nu;
    if (cfg.sigma > 0) sc.sigma = cfg.sigma;
    if (cfg.c11 != 0) sc.c11 = cfg.c11;
    if (cfg.a11 != 0) sc.a11 = cfg.a11;
    if (cfg.d11 != 0) sc.d11 = cfg.d11;
    return sc;
}

std::shared_ptr<Mesh> configure_mesh(const RunConfig& cfg, const Scenario& sc) {
    std::shared_ptr<Mesh> mesh;
    if (!cfg.mesh_file.empty()) {
        mesh = std::make_shared<Mesh>(Mesh::read_text_file(cfg.mesh_file));
        return mesh;  // tags come from the file
    }
    if (sc.name == "open-cavity") {
        mesh = std::make_shared<Mesh>(cavity_mesh(cfg.mesh_n > 0 ? cfg.mesh_n : 2));
    } else {
        int n = cfg.mesh_n > 0 ? cfg.mesh_n : 64;
        mesh = std::make_shared<Mesh>(Mesh::structured(n, n));
    }
    sc.apply_tags(*mesh);
    return mesh;
}

void ensure_out_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

void maybe_write_profile(const RunConfig& cfg, const SolutionTriple& sol) {
    if (cfg.profile.empty()) return;
    std::istringstream is(cfg.profile);
    double x0, y0, x1, y1;
    int n;
    char comma;
    if (!(is >> x0 >> comma >> y0 >> comma >> x1 >> comma >> y1 >> comma >> n))
        throw std::runtime_error("bad --profile spec, expected x0,y0,x1,y1,n");
    auto samples = midline_profiles(sol, {x0, y0}, {x1, y1}, n);
    std::string path =
        cfg.out_dir.empty() ? "profile.csv" : cfg.out_dir + "/profile.csv";
    std::ofstream out(path);
    write_profile_csv(out, samples);
    std::printf("wrote %s\n", path.c_str());
}

int cmd_converge(const RunConfig& cfg) {
    if (cfg.levels < 2) {
        std::fprintf(stderr, "converge: --levels must be >= 2\n");
        return 1;
    }
    Scenario sc = configure_scenario(cfg);
    if (!sc.exact) {
        std::fprintf(stderr, "converge: scenario '%s' has no manufactured solution\n",
                     sc.name.c_str());
        return 1;
    }
    Scheme scheme = parse_scheme(cfg.scheme);
    OseenParams params = sc.params();
    std::vector<ErrorReport> rows;
    for (int level = 0; level < cfg.levels; ++level) {
        int n = 2 << level;
        auto mesh = sc.make_structured_mesh(n);
        auto disc = Discretisation::make(mesh, scheme, cfg.k);
        SolutionTriple sol = solve_steady(sc, disc);
        ErrorReport row = error_norms(sol, *sc.exact);
        if (scheme == Scheme::Dg) row.err_A_seminorm = dg_seminorm(sol, *sc.exact, params);
        rows.push_back(row);
    }
    // non-nested families are rejected upstream: the structured family halves
    // h exactly, which fit_rates relies on
    std::ostringstream csv;
    write_error_table(csv, rows, scheme);
    std::fputs(csv.str().c_str(), stdout);
    if (!cfg.out_dir.empty()) {
        ensure_out_dir(cfg.out_dir);
        std::ofstream out(cfg.out_dir + "/error_table.csv");
        out << csv.str();
    }

    auto last_rate = [&](auto field) {
        std::vector<double> errs;
        for (const auto& r : rows) errs.push_back(field(r));
        return fit_rates(errs).back();
    };
    double target = cfg.k + 1;
    bool ok;
    if (scheme == Scheme::Mixed) {
        ok = std::abs(last_rate([](const ErrorReport& r) { return r.err_u_Hdiv; }) - target) <=
                 0.15 &&
             std::abs(last_rate([](const ErrorReport& r) { return r.err_w_Z; }) - target) <=
                 0.15 &&
             std::abs(last_rate([](const ErrorReport& r) { return r.err_p_L2; }) - target) <=
                 0.15;
    } else {
        ok = std::abs(last_rate([](const ErrorReport& r) { return r.err_A_seminorm; }) -
                      target) <= 0.15 &&
             std::abs(last_rate([](const ErrorReport& r) { return r.err_p_L2; }) - target) <=
                 0.15;
    }
    std::printf("final-level rates %s the O(h^%d) target\n", ok ? "meet" : "MISS", cfg.k + 1);
    return ok ? 0 : 2;
}

int cmd_transient(const RunConfig& cfg) {
    Scenario sc = configure_scenario(cfg);
    Scheme scheme = parse_scheme(cfg.scheme);
    auto mesh = configure_mesh(cfg, sc);
    auto disc = Discretisation::make(mesh, scheme, cfg.k);

    TimeLoopConfig tl;
    tl.scheme = scheme;
    tl.k = cfg.k;
    tl.n_steps = cfg.steps;
    tl.dt = cfg.dt > 0 ? cfg.dt : 1.0 / sc.sigma;

    ensure_out_dir(cfg.out_dir);
    SnapshotCallback snap;
    if (!cfg.out_dir.empty() && cfg.snap_every > 0) {
        snap = [&](int step, double t, const SolutionTriple& sol) {
            if (step % cfg.snap_every != 0) return;
            char name[64];
            std::snprintf(name, sizeof(name), "/fields_%04d.vtk", step);
            std::ostringstream title;
            title << sc.name << " t=" << t;
            write_vtk_file(cfg.out_dir + name, sol, title.str());
        };
    }
    TransientResult result = run_transient(tl, sc, disc, snap);

    std::ostringstream csv;
    write_transient_csv(csv, result.steps);
    std::fputs(csv.str().c_str(), stdout);
    if (!cfg.out_dir.empty()) {
        std::ofstream out(cfg.out_dir + "/diagnostics.csv");
        out << csv.str();
    }
    maybe_write_profile(cfg, result.final);
    return 0;
}

int cmd_solve(const RunConfig& cfg) {
    Scenario sc = configure_scenario(cfg);
    Scheme scheme = parse_scheme(cfg.scheme);
    auto mesh = configure_mesh(cfg, sc);
    auto disc = Discretisation::make(mesh, scheme, cfg.k);
    SolutionTriple sol = solve_steady(sc, disc);
    std::printf("solved %s scheme=%s k=%d dofs=%d residual=%.3e div_linf=%.3e\n",
                sc.name.c_str(), cfg.scheme.c_str(), cfg.k,
                disc.H->n_dofs() + disc.Z->n_dofs() + disc.Q->n_dofs(),
                sol.report.relative_residual, divergence_linf(sol));
    if (sc.exact) {
        ErrorReport r = error_norms(sol, *sc.exact);
        std::printf("errors: u=%.6e w=%.6e p=%.6e\n", r.err_u_Hdiv, r.err_w_Z, r.err_p_L2);
    }
    if (!cfg.out_dir.empty()) {
        ensure_out_dir(cfg.out_dir);
        write_vtk_file(cfg.out_dir + "/fields.vtk", sol, sc.name);
        std::printf("wrote %s/fields.vtk\n", cfg.out_dir.c_str());
    }
    if (!cfg.dump_matrix.empty()) {
        OseenParams p = sc.params();
        SaddleSystem sys = scheme == Scheme::Mixed
                               ? assemble_mixed_system(p, disc.spaces(), sc.gamma,
                                                       !mesh->has_sigma())
                               : assemble_dg_system(p, disc.spaces(), sc.gamma,
                                                    !mesh->has_sigma());
        std::ofstream out(cfg.dump_matrix);
        sys.matrix.write_coordinate(out);
        std::printf("wrote %s\n", cfg.dump_matrix.c_str());
    }
    maybe_write_profile(cfg, sol);
    return 0;
}

int cmd_selftest(const RunConfig& cfg) {
    OseenParams p;
    p.nu = cfg.nu > 0 ? cfg.nu : 0.1;
    p.sigma = cfg.sigma > 0 ? cfg.sigma : 10.0;
    p.c11 = cfg.c11 != 0 ? cfg.c11 : p.sigma;
    p.a11 = cfg.a11 != 0 ? cfg.a11 : p.sigma;
    p.d11 = cfg.d11 != 0 ? cfg.d11 : p.nu;
    auto results = run_selftest(p);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("selftest: %zu checks, %s\n", results.size(), all ? "all passed" : "FAILURES");
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Oseen velocity-vorticity-pressure solver (mixed and DG schemes)"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.add_option("command", cfg.command, "converge | transient | solve | selftest")
        ->required();
    app.add_option("--scheme", cfg.scheme, "mixed | dg");
    app.add_option("--k", cfg.k, "polynomial order (0, 1, or 2)")
        ->check(CLI::Range(0, 2));
    app.add_option("--levels", cfg.levels, "refinement levels for converge");
    app.add_option("--mesh", cfg.mesh_file, "mesh text file (overrides --mesh-n)");
    app.add_option("--mesh-n", cfg.mesh_n, "structured mesh subdivisions per side");
    app.add_option("--scenario", cfg.scenario, "test1 | zero | open-cavity | kh");
    app.add_option("--steps", cfg.steps, "number of time steps");
    app.add_option("--dt", cfg.dt, "time step (default 1/sigma)");
    app.add_option("--nu", cfg.nu, "viscosity override");
    app.add_option("--sigma", cfg.sigma, "reaction coefficient override");
    app.add_option("--c11", cfg.c11, "DG stabilisation constant c11");
    app.add_option("--a11", cfg.a11, "DG stabilisation constant a11");
    app.add_option("--d11", cfg.d11, "DG stabilisation constant d11");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--dump-matrix", cfg.dump_matrix, "write the system in i j value format");
    app.add_option("--profile", cfg.profile, "sample a segment: x0,y0,x1,y1,n");
    app.add_option("--snap-every", cfg.snap_every, "snapshot stride for transient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (cfg.command == "converge") return cmd_converge(cfg);
        if (cfg.command == "transient") return cmd_transient(cfg);
        if (cfg.command == "solve") return cmd_solve(cfg);
        if (cfg.command == "selftest") return cmd_selftest(cfg);
        std::fprintf(stderr, "unknown command '%s'\n", cfg.command.c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
