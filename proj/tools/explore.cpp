// scratch driver for manual checks during development
#include <cstdio>
#include <cstring>

#include "oseen/diagnostics.hpp"
#include "oseen/driver.hpp"

using namespace oseen;

int main(int argc, char** argv) {
    const char* mode = argc > 1 ? argv[1] : "mixed";
    int k = argc > 2 ? std::atoi(argv[2]) : 0;
    int nmax = argc > 3 ? std::atoi(argv[3]) : 32;
    Scenario sc = scenario_test1();
    Scheme scheme = std::strcmp(mode, "dg") == 0 ? Scheme::Dg : Scheme::Mixed;
    std::printf("== %s k=%d\n", mode, k);
    std::vector<double> eu, ew, ep, ea;
    for (int n = 2; n <= nmax; n *= 2) {
        auto mesh = sc.make_structured_mesh(n);
        auto disc = Discretisation::make(mesh, scheme, k);
        SolutionTriple sol = solve_steady(sc, disc);
        ErrorReport r = error_norms(sol, *sc.exact);
        double ea_val =
            scheme == Scheme::Dg ? dg_seminorm(sol, *sc.exact, sc.params()) : 0.0;
        eu.push_back(r.err_u_Hdiv);
        ew.push_back(r.err_w_Z);
        ep.push_back(r.err_p_L2);
        ea.push_back(ea_val);
        std::printf(
            "n=%3d dofs=%7d h=%.4f err_u=%.4e err_w=%.4e err_p=%.4e errA=%.4e div=%.2e "
            "resid=%.2e\n",
            n, r.dofs, r.h, r.err_u_Hdiv, r.err_w_Z, r.err_p_L2, ea_val, r.div_linf,
            sol.report.relative_residual);
        std::fflush(stdout);
    }
    auto ru = fit_rates(eu), rw = fit_rates(ew), rp = fit_rates(ep);
    for (size_t i = 0; i < ru.size(); ++i) {
        if (scheme == Scheme::Dg) {
            auto ra = fit_rates(ea);
            std::printf("rates: A=%.4f p=%.4f\n", ra[i], rp[i]);
        } else {
            std::printf("rates: u=%.4f w=%.4f p=%.4f\n", ru[i], rw[i], rp[i]);
        }
    }
    return 0;
}
