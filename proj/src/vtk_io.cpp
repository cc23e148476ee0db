#include "oseen/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace oseen {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

void write_vtk(std::ostream& out, const SolutionTriple& sol, const std::string& title) {
    const Mesh& mesh = *sol.disc.mesh;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (int v = 0; v < mesh.n_vertices(); ++v)
        out << fmt(mesh.vertex(v).x) << " " << fmt(mesh.vertex(v).y) << " 0\n";
    out << "CELLS " << mesh.n_cells() << " " << 4 * mesh.n_cells() << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        out << "3 " << cell[0] << " " << cell[1] << " " << cell[2] << "\n";
    }
    out << "CELL_TYPES " << mesh.n_cells() << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << "5\n";

    FeField uf = sol.velocity();
    FeField wf = sol.vorticity();
    FeField pf = sol.pressure();
    std::vector<Vec2> uc(mesh.n_cells());
    std::vector<double> divc(mesh.n_cells()), wc(mesh.n_cells()), pc(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        Vec2 centroid = (mesh.vertex(cell[0]) + mesh.vertex(cell[1]) + mesh.vertex(cell[2])) / 3.0;
        uf.eval_vector(c, &centroid, 1, &uc[c], &divc[c]);
        wf.eval_scalar(c, &centroid, 1, &wc[c]);
        pf.eval_scalar(c, &centroid, 1, &pc[c]);
    }
    out << "CELL_DATA " << mesh.n_cells() << "\n";
    out << "VECTORS velocity double\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        out << fmt(uc[c].x) << " " << fmt(uc[c].y) << " 0\n";
    out << "SCALARS vorticity double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << fmt(wc[c]) << "\n";
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << fmt(pc[c]) << "\n";
    out << "SCALARS divergence double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << fmt(divc[c]) << "\n";
}

void write_vtk_file(const std::string& path, const SolutionTriple& sol,
                    const std::string& title) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_vtk_file: cannot open " + path);
    write_vtk(out, sol, title);
}

}  // namespace oseen
