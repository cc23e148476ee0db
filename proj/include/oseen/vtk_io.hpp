#pragma once

#include <iosfwd>
#include <string>

#include "oseen/driver.hpp"

namespace oseen {

/// Legacy ASCII VTK unstructured-grid snapshot: triangle mesh with
/// cell-centroid velocity/vorticity/pressure/divergence data.
void write_vtk(std::ostream& out, const SolutionTriple& sol, const std::string& title);
void write_vtk_file(const std::string& path, const SolutionTriple& sol,
                    const std::string& title);

}  // namespace oseen
