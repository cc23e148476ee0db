#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oseen/mesh.hpp"

using namespace oseen;

TEST_CASE("structured mesh counts and size") {
    SUBCASE("1x1 unit square") {
        Mesh m = Mesh::structured(1, 1);
        CHECK(m.n_cells() == 2);
        CHECK(m.n_vertices() == 4);
        CHECK(m.n_facets() == 5);
    }
    SUBCASE("2x2 unit square") {
        Mesh m = Mesh::structured(2, 2);
        CHECK(m.n_cells() == 8);
        CHECK(m.n_vertices() == 9);
        CHECK(m.n_facets() == 16);
        CHECK(m.mesh_size() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    }
    SUBCASE("4x4 area additivity") {
        Mesh m = Mesh::structured(4, 4);
        CHECK(m.n_cells() == 32);
        CHECK(std::abs(m.total_area() - 1.0) < 1e-12);
        CHECK(m.mesh_size() == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
    }
}

TEST_CASE("reference triangle diameter") {
    Mesh m = Mesh::from_arrays({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
    CHECK(m.mesh_size() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(m.n_facets() == 3);
}

TEST_CASE("refinement halves the mesh size exactly") {
    for (int n : {1, 2, 4, 8}) {
        Mesh coarse = Mesh::structured(n, n);
        Mesh fine = Mesh::structured(2 * n, 2 * n);
        CHECK(fine.mesh_size() == coarse.mesh_size() / 2.0);
    }
}

TEST_CASE("interior facet normals are consistent and Euler relation holds") {
    Mesh m = Mesh::structured(3, 4, {0, 0}, {1.5, 1.0});
    int interior = 0;
    for (int f = 0; f < m.n_facets(); ++f) {
        const Facet& fac = m.facet(f);
        if (fac.cells[1] < 0) continue;
        ++interior;
        // locate the facet locally in both cells and compare outward normals
        Vec2 nsum{0, 0};
        for (int side = 0; side < 2; ++side) {
            int c = fac.cells[side];
            for (int lf = 0; lf < 3; ++lf)
                if (m.cell_facet(c, lf) == f) nsum += m.outward_normal(c, lf);
        }
        CHECK(norm(nsum) < 1e-14);
    }
    CHECK(interior > 0);
    // V - E + F = 1 for a simply-connected triangulation (outer face excluded)
    CHECK(m.n_vertices() - m.n_facets() + m.n_cells() == 1);
}

TEST_CASE("tag_boundary: all-gamma and untagged error") {
    Mesh m = Mesh::structured(2, 2);
    m.tag_all_gamma();
    int gamma = 0, sigma = 0;
    for (int f = 0; f < m.n_facets(); ++f) {
        if (m.facet(f).tag == BoundaryTag::Gamma) ++gamma;
        if (m.facet(f).tag == BoundaryTag::Sigma) ++sigma;
    }
    CHECK(gamma == 8);
    CHECK(sigma == 0);

    Mesh m2 = Mesh::structured(2, 2);
    CHECK_THROWS_WITH_AS(
        m2.tag_boundary([](const Vec2& p) { return p.x < 0.5; },
                        [](const Vec2&) { return false; }),
        doctest::Contains("UntaggedFacet"), std::runtime_error);
}

TEST_CASE("periodic pairing on the Kelvin-Helmholtz box") {
    const int n = 4;
    Mesh m = Mesh::structured(n, n);
    // top/bottom walls Gamma, left/right periodic with translation (1,0)
    m.tag_boundary([](const Vec2& p) { return p.y < 1e-12 || p.y > 1.0 - 1e-12; },
                   [](const Vec2&) { return false; }, Vec2{1.0, 0.0});
    int masters = 0, slaves = 0, gamma = 0;
    for (int f = 0; f < m.n_facets(); ++f) {
        switch (m.facet(f).tag) {
            case BoundaryTag::PeriodicMaster: ++masters; break;
            case BoundaryTag::PeriodicSlave: ++slaves; break;
            case BoundaryTag::Gamma: ++gamma; break;
            default: break;
        }
    }
    CHECK(masters == n);
    CHECK(slaves == n);
    CHECK(masters + slaves == 2 * n);
    CHECK(gamma == 2 * n);

    // merged master facets couple two cells; slave vertices alias to masters
    for (int f = 0; f < m.n_facets(); ++f) {
        const Facet& fac = m.facet(f);
        if (fac.tag == BoundaryTag::PeriodicMaster) {
            CHECK(fac.couples_two_cells());
            CHECK(fac.partner >= 0);
        }
        if (fac.tag == BoundaryTag::PeriodicSlave) {
            CHECK(m.canonical_vertex(fac.v0) != fac.v0);
            Vec2 master_pos = m.vertex(m.canonical_vertex(fac.v0));
            CHECK(norm(master_pos + Vec2{1, 0} - m.vertex(fac.v0)) < 1e-12);
        }
    }
}

TEST_CASE("periodic mismatch is reported") {
    Mesh m = Mesh::structured(2, 2);
    CHECK_THROWS_WITH_AS(m.tag_boundary([](const Vec2&) { return true; },
                                        [](const Vec2&) { return false; }, Vec2{0.77, 0.0}),
                         doctest::Contains("PeriodicMismatch"), std::runtime_error);
}

TEST_CASE("masked mesh drops outside cells") {
    // L-shaped domain: remove the top-right quadrant
    Mesh m = Mesh::masked(4, 4, {0, 0}, {1, 1},
                          [](const Vec2& p) { return !(p.x > 0.5 && p.y > 0.5); });
    CHECK(m.n_cells() == 24);
    CHECK(std::abs(m.total_area() - 0.75) < 1e-12);
    CHECK(m.n_vertices() - m.n_facets() + m.n_cells() == 1);
}

TEST_CASE("mesh text io round-trip") {
    Mesh m = Mesh::structured(3, 2);
    m.tag_boundary([](const Vec2& p) { return p.y < 1e-12 || p.y > 1.0 - 1e-12; },
                   [](const Vec2&) { return true; });
    std::stringstream ss;
    m.write_text(ss);
    Mesh r = Mesh::read_text(ss);
    CHECK(r.n_vertices() == m.n_vertices());
    CHECK(r.n_cells() == m.n_cells());
    CHECK(r.n_facets() == m.n_facets());
    for (int f = 0; f < m.n_facets(); ++f) CHECK(r.facet(f).tag == m.facet(f).tag);
    CHECK(r.mesh_size() == m.mesh_size());
}

TEST_CASE("find_cell locates points") {
    Mesh m = Mesh::structured(4, 4);
    int c = m.find_cell({0.1, 0.05});
    REQUIRE(c >= 0);
    CHECK(m.find_cell({1.5, 0.5}) == -1);
}
