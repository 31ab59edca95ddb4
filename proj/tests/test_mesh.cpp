#include <algorithm>
#include <set>
#include <tuple>

#include "doctest.h"
#include "torsionlab/errors.hpp"
#include "torsionlab/mesh.hpp"

using namespace tl;

namespace {

int double_edges(const MeshGraph& g) {
    int c = 0;
    for (const auto& e : g.edges()) c += e.multiplicity == 2;
    return c;
}

int cone_pi_count(const SquareTiledSurface& s) {
    int c = 0;
    for (const auto& vc : s.vertex_classes()) c += vc.is_cone() && vc.quarters == 2;
    return c;
}

std::vector<SurfaceSpec> constructors() {
    return {SurfaceSpec::rectangle(2, 3), SurfaceSpec::torus(2, 2),  SurfaceSpec::cylinder(3, 1),
            SurfaceSpec::lshape(),        SurfaceSpec::slit(),       SurfaceSpec::cone(1),
            SurfaceSpec::cone(3),         SurfaceSpec::cone(4),      SurfaceSpec::angle(5)};
}

// periods times n below 3 create parallel edges without any cone
bool small_period(const SurfaceSpec& s, int n) {
    using K = SurfaceSpec::Kind;
    if (s.kind == K::Torus) return s.a * n < 3 || s.b * n < 3;
    if (s.kind == K::Cylinder) return s.a * n < 3;
    return false;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("small examples") {
    auto g = discretize(build_surface(SurfaceSpec::rectangle(1, 1)), 2);
    CHECK(g.vertex_count() == 4);
    CHECK(g.edges().size() == 4);

    auto t = discretize(build_surface(SurfaceSpec::torus(1, 1)), 3);
    CHECK(t.vertex_count() == 9);
    CHECK(t.segments().size() == 18);
    for (int v = 0; v < 9; ++v) CHECK(t.degree(v) == 4);

    auto c = discretize(build_surface(SurfaceSpec::cone(1)), 2);
    CHECK(double_edges(c) == 1);
}

TEST_CASE("torus 1x1 at n=1 is a vertex with two loops") {
    auto g = discretize(build_surface(SurfaceSpec::torus(1, 1)), 1);
    CHECK(g.vertex_count() == 1);
    CHECK(g.segments().size() == 2);
    CHECK(g.edges().size() == 1);
    CHECK(g.edges()[0].multiplicity == 2);
}

TEST_CASE("vertex count, degrees and multiplicities") {
    for (const auto& spec : constructors()) {
        auto s = build_surface(spec);
        for (int n = 2; n <= 5; ++n) {
            auto g = discretize(s, n);
            CHECK(g.vertex_count() == s.tile_count() * n * n);
            int deg_sum = 0;
            for (int v = 0; v < g.vertex_count(); ++v) deg_sum += g.degree(v);
            CHECK(deg_sum == 2 * int(g.segments().size()));
            for (const auto& e : g.edges()) CHECK((e.multiplicity == 1 || e.multiplicity == 2));
            if (!small_period(spec, n)) {
                CHECK(double_edges(g) == cone_pi_count(s));
            }
            for (const auto& [p, set] : g.cone_neighbor_sets())
                CHECK(int(set.size()) == s.vertex_classes()[p].quarters);
        }
    }
}

TEST_CASE("small tori carry parallel edges without cones") {
    auto g = discretize(build_surface(SurfaceSpec::torus(1, 1)), 2);
    CHECK(double_edges(g) > 0);
    CHECK(cone_pi_count(g.surface()) == 0);
}

TEST_CASE("cone neighbour sets") {
    auto r = build_surface(SurfaceSpec::rectangle(1, 1));
    auto gr = discretize(r, 2);
    for (int p : r.singular_points()) CHECK(cone_neighbors(gr, p).size() == 1);

    auto c = build_surface(SurfaceSpec::cone(4));
    auto gc = discretize(c, 2);
    int found = 0;
    for (int p : c.singular_points())
        if (c.vertex_classes()[p].is_cone()) {
            CHECK(cone_neighbors(gc, p).size() == 8);
            ++found;
        }
    CHECK(found == 1);

    auto l = build_surface(SurfaceSpec::lshape());
    auto gl = discretize(l, 2);
    for (int p : l.singular_points())
        if (l.vertex_classes()[p].quarters == 3) CHECK(cone_neighbors(gl, p).size() == 3);

    int flat = -1;
    for (int i = 0; i < int(r.vertex_classes().size()); ++i)
        if (!r.vertex_classes()[i].is_corner()) flat = i;
    bool threw = false;
    try {
        cone_neighbors(discretize(build_surface(SurfaceSpec::rectangle(2, 2)), 2), 100);
    } catch (const Error& e) {
        threw = e.code() == ErrorCode::UnknownPoint;
    }
    CHECK(threw);
    (void)flat;
}

TEST_CASE("discretize(rescale(s, c), n) is isomorphic to discretize(s, c n)") {
    for (auto spec : {SurfaceSpec::lshape(), SurfaceSpec::cone(1), SurfaceSpec::cone(3), SurfaceSpec::torus(1, 2),
                      SurfaceSpec::cylinder(2, 1)}) {
        auto s = build_surface(spec);
        for (auto [c, n] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 1}}) {
            auto a = discretize(rescale(s, c), n);
            auto b = discretize(s, c * n);
            REQUIRE(a.vertex_count() == b.vertex_count());
            auto map = [&](int v) {
                const auto& mv = a.vertex(v);
                int t = mv.tile / (c * c), blk = mv.tile % (c * c);
                return b.vertex_id(t, (blk % c) * n + mv.i, (blk / c) * n + mv.j);
            };
            std::multiset<std::tuple<int, int, int>> ea, eb;
            for (const auto& e : a.edges()) {
                int u = map(e.u), v = map(e.v);
                ea.insert({std::min(u, v), std::max(u, v), e.multiplicity});
            }
            for (const auto& e : b.edges()) eb.insert({e.u, e.v, e.multiplicity});
            CHECK(ea == eb);
        }
    }
}

TEST_CASE("cone-free surfaces with large periods are simple graphs") {
    for (auto spec : {SurfaceSpec::rectangle(3, 2), SurfaceSpec::torus(3, 3), SurfaceSpec::cylinder(3, 2),
                      SurfaceSpec::lshape(), SurfaceSpec::slit()}) {
        auto g = discretize(build_surface(spec), 2);
        CHECK(double_edges(g) == 0);
    }
}

TEST_CASE("edge csv") {
    auto g = discretize(build_surface(SurfaceSpec::rectangle(2, 1)), 1);
    CHECK(g.edges_csv() == "u,v,multiplicity\n0:0:0,1:0:0,1\n");
}

}
