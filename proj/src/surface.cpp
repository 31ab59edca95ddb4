#include "torsionlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "torsionlab/errors.hpp"

namespace tl {

Side opposite(Side s) { return static_cast<Side>((s + 2) % 4); }

const char* side_name(Side s) {
    static const char* names[] = {"N", "E", "S", "W"};
    return names[s];
}

Side parse_side(const std::string& s) {
    if (s == "N") return N;
    if (s == "E") return E;
    if (s == "S") return S;
    if (s == "W") return W;
    throw Error(ErrorCode::InvalidGluing, "unknown side '" + s + "'");
}

std::array<int, 2> side_direction(Side s) {
    switch (s) {
        case N: return {0, 1};
        case E: return {1, 0};
        case S: return {0, -1};
        case W: return {-1, 0};
    }
    return {0, 0};
}

static Side side_of_direction(int dx, int dy) {
    if (dx == 1) return E;
    if (dx == -1) return W;
    return dy == 1 ? N : S;
}

std::array<int, 2> corner_coords(int corner) {
    static const int cs[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    return {cs[corner][0], cs[corner][1]};
}

int corner_index(int cx, int cy) {
    if (cx > 0) return cy > 0 ? 0 : 3;
    return cy > 0 ? 1 : 2;
}

SurfaceSpec SurfaceSpec::rectangle(int a, int b) {
    SurfaceSpec s;
    s.kind = Kind::Rectangle;
    s.a = a;
    s.b = b;
    return s;
}

SurfaceSpec SurfaceSpec::torus(int a, int b) {
    SurfaceSpec s = rectangle(a, b);
    s.kind = Kind::Torus;
    return s;
}

SurfaceSpec SurfaceSpec::cylinder(int circumference, int height) {
    SurfaceSpec s = rectangle(circumference, height);
    s.kind = Kind::Cylinder;
    return s;
}

SurfaceSpec SurfaceSpec::lshape() {
    SurfaceSpec s;
    s.kind = Kind::LShape;
    return s;
}

SurfaceSpec SurfaceSpec::slit() {
    SurfaceSpec s;
    s.kind = Kind::Slit;
    return s;
}

SurfaceSpec SurfaceSpec::cone(int k) {
    SurfaceSpec s;
    s.kind = Kind::Cone;
    s.k = k;
    return s;
}

SurfaceSpec SurfaceSpec::angle(int k) {
    SurfaceSpec s;
    s.kind = Kind::Angle;
    s.k = k;
    return s;
}

SquareTiledSurface::SquareTiledSurface(int tiles, const std::vector<Pairing>& pairings, std::string name)
    : tiles_(tiles), name_(std::move(name)) {
    if (tiles < 1) throw Error(ErrorCode::InvalidGluing, "surface needs at least one tile");
    slots_.assign(4 * static_cast<size_t>(tiles), std::nullopt);
    for (const auto& p : pairings) {
        for (const SideSlot& sl : {p.a, p.b}) {
            if (sl.tile < 0 || sl.tile >= tiles)
                throw Error(ErrorCode::InvalidGluing, "tile id " + std::to_string(sl.tile) + " out of range");
        }
        if (p.a == p.b) throw Error(ErrorCode::InvalidGluing, "side paired with itself");
        Gluing expected;
        if (p.b.side == opposite(p.a.side))
            expected = Gluing::Translation;
        else if (p.b.side == p.a.side)
            expected = Gluing::HalfTurn;
        else
            throw Error(ErrorCode::InvalidGluing, "sides " + std::string(side_name(p.a.side)) + "/" +
                                                      side_name(p.b.side) + " need a quarter turn");
        if (p.type != expected) throw Error(ErrorCode::InvalidGluing, "gluing type does not match sides");
        auto& sa = slots_[4 * p.a.tile + p.a.side];
        auto& sb = slots_[4 * p.b.tile + p.b.side];
        if (sa || sb) throw Error(ErrorCode::InvalidGluing, "side used by two pairings");
        sa = Partner{p.b, p.type};
        sb = Partner{p.a, p.type};
    }

    // connectivity of the tile graph
    std::vector<int> parent(tiles);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& p : pairings) parent[find(p.a.tile)] = find(p.b.tile);
    for (int t = 0; t < tiles; ++t)
        if (find(t) != find(0)) throw Error(ErrorCode::InvalidGluing, "surface is disconnected");

    compute_classes();
}

void SquareTiledSurface::compute_classes() {
    class_of_corner_.assign(4 * static_cast<size_t>(tiles_), -1);

    // one step around the point at corner c of tile t; returns false at the boundary
    auto step = [&](CornerRef& cur, bool ccw, Side& crossed) {
        auto [cx, cy] = corner_coords(cur.corner);
        int dx = ccw ? (cx + cy) / 2 : (cx - cy) / 2;
        int dy = ccw ? (cy - cx) / 2 : (cx + cy) / 2;
        crossed = side_of_direction(dx, dy);
        const auto& p = partner(cur.tile, crossed);
        if (!p) return false;
        int nx = cx - 2 * dx, ny = cy - 2 * dy;
        if (p->type == Gluing::HalfTurn) {
            nx = -nx;
            ny = -ny;
        }
        cur = CornerRef{p->slot.tile, corner_index(nx, ny)};
        return true;
    };

    for (int t = 0; t < tiles_; ++t) {
        for (int c = 0; c < 4; ++c) {
            if (class_of_corner_[4 * t + c] >= 0) continue;
            VertexClass vc;
            CornerRef start{t, c};
            CornerRef cur = start;
            std::vector<CornerRef> fwd{start};
            std::vector<Side> fwd_cross;
            bool closed = false;
            Side crossed;
            while (step(cur, true, crossed)) {
                fwd_cross.push_back(crossed);
                if (cur == start) {
                    closed = true;
                    break;
                }
                fwd.push_back(cur);
            }
            if (closed) {
                vc.boundary = false;
                vc.corners = fwd;
                vc.crossings = fwd_cross;
            } else {
                std::vector<CornerRef> back;
                cur = start;
                while (step(cur, false, crossed)) back.push_back(cur);
                vc.boundary = true;
                std::vector<CornerRef> all(back.rbegin(), back.rend());
                all.insert(all.end(), fwd.begin(), fwd.end());
                for (size_t m = 0; m + 1 < all.size(); ++m) {
                    CornerRef probe = all[m];
                    step(probe, true, crossed);
                    vc.crossings.push_back(crossed);
                }
                vc.corners = all;
            }
            vc.quarters = static_cast<int>(vc.corners.size());
            int id = static_cast<int>(classes_.size());
            for (const auto& cr : vc.corners) {
                int& slot = class_of_corner_[4 * cr.tile + cr.corner];
                if (slot >= 0 && slot != id)
                    throw Error(ErrorCode::InvalidGluing, "corner reached by two vertex classes");
                slot = id;
            }
            if (!vc.boundary && vc.quarters % 2 != 0)
                throw Error(ErrorCode::InvalidGluing, "interior link angle is not a multiple of pi");
            classes_.push_back(std::move(vc));
        }
    }
}

std::vector<SideSlot> SquareTiledSurface::boundary_sides() const {
    std::vector<SideSlot> out;
    for (int t = 0; t < tiles_; ++t)
        for (int s = 0; s < 4; ++s)
            if (!slots_[4 * t + s]) out.push_back(SideSlot{t, static_cast<Side>(s)});
    return out;
}

std::vector<Pairing> SquareTiledSurface::pairings() const {
    std::vector<Pairing> out;
    for (int t = 0; t < tiles_; ++t)
        for (int s = 0; s < 4; ++s) {
            const auto& p = slots_[4 * t + s];
            if (!p) continue;
            SideSlot here{t, static_cast<Side>(s)};
            int a = 4 * t + s, b = 4 * p->slot.tile + p->slot.side;
            if (a < b) out.push_back(Pairing{here, p->slot, p->type});
        }
    return out;
}

int SquareTiledSurface::euler_char() const {
    int v = static_cast<int>(classes_.size());
    int boundary = static_cast<int>(boundary_sides().size());
    int e = (4 * tiles_ - boundary) / 2 + boundary;
    return v - e + tiles_;
}

std::vector<int> SquareTiledSurface::singular_points() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(classes_.size()); ++i)
        if (classes_[i].is_cone() || classes_[i].is_corner()) out.push_back(i);
    return out;
}

namespace {

Pairing glue(int t1, Side s1, int t2, Side s2) {
    Gluing g = (s2 == s1) ? Gluing::HalfTurn : Gluing::Translation;
    return Pairing{SideSlot{t1, s1}, SideSlot{t2, s2}, g};
}

std::vector<Pairing> grid_pairings(int a, int b, bool wrap_x, bool wrap_y) {
    std::vector<Pairing> out;
    auto id = [a](int i, int j) { return i + a * j; };
    for (int j = 0; j < b; ++j)
        for (int i = 0; i < a; ++i) {
            if (i + 1 < a)
                out.push_back(glue(id(i, j), E, id(i + 1, j), W));
            else if (wrap_x)
                out.push_back(glue(id(i, j), E, id(0, j), W));
            if (j + 1 < b)
                out.push_back(glue(id(i, j), N, id(i, j + 1), S));
            else if (wrap_y)
                out.push_back(glue(id(i, j), N, id(i, 0), S));
        }
    return out;
}

// A chain of 2x2 quadrants turning counter-clockwise around a common point.
// Quadrant q has type q mod 4 (NE, NW, SW, SE) and tiles 4q + i + 2j.
std::vector<Pairing> quadrant_chain(int count, bool closed) {
    std::vector<Pairing> out;
    auto id = [](int q, int i, int j) { return 4 * q + i + 2 * j; };
    for (int q = 0; q < count; ++q) {
        for (int j = 0; j < 2; ++j) out.push_back(glue(id(q, 0, j), E, id(q, 1, j), W));
        for (int i = 0; i < 2; ++i) out.push_back(glue(id(q, i, 0), N, id(q, i, 1), S));
    }
    auto link = [&](int q, int r) {
        for (int m = 0; m < 2; ++m) {
            switch (q % 4) {
                case 0: out.push_back(glue(id(q, 0, m), W, id(r, 1, m), E)); break;
                case 1: out.push_back(glue(id(q, m, 0), S, id(r, m, 1), N)); break;
                case 2: out.push_back(glue(id(q, 1, m), E, id(r, 0, m), W)); break;
                case 3: out.push_back(glue(id(q, m, 1), N, id(r, m, 0), S)); break;
            }
        }
    };
    for (int q = 0; q + 1 < count; ++q) link(q, q + 1);
    if (closed) {
        if (count % 4 == 0) {
            link(count - 1, 0);
        } else {
            // last quadrant is NW; its lower row meets the first (NE) lower row by a half-turn
            for (int m = 0; m < 2; ++m) out.push_back(glue(id(count - 1, m, 0), S, id(0, 1 - m, 0), S));
        }
    }
    return out;
}

}  // namespace

SquareTiledSurface build_surface(const SurfaceSpec& spec) {
    using K = SurfaceSpec::Kind;
    auto need_positive = [](int v, const char* what) {
        if (v < 1) throw Error(ErrorCode::InvalidGluing, std::string(what) + " must be positive");
    };
    switch (spec.kind) {
        case K::Rectangle:
            need_positive(spec.a, "a");
            need_positive(spec.b, "b");
            return SquareTiledSurface(spec.a * spec.b, grid_pairings(spec.a, spec.b, false, false),
                                      "rectangle(" + std::to_string(spec.a) + "," + std::to_string(spec.b) + ")");
        case K::Torus:
            need_positive(spec.a, "a");
            need_positive(spec.b, "b");
            return SquareTiledSurface(spec.a * spec.b, grid_pairings(spec.a, spec.b, true, true),
                                      "torus(" + std::to_string(spec.a) + "," + std::to_string(spec.b) + ")");
        case K::Cylinder:
            need_positive(spec.a, "a");
            need_positive(spec.b, "b");
            return SquareTiledSurface(spec.a * spec.b, grid_pairings(spec.a, spec.b, true, false),
                                      "cylinder(" + std::to_string(spec.a) + "," + std::to_string(spec.b) + ")");
        case K::LShape: return SquareTiledSurface(12, quadrant_chain(3, false), "lshape");
        case K::Slit: return SquareTiledSurface(16, quadrant_chain(4, false), "slit");
        case K::Cone: {
            if (spec.k == 2) throw Error(ErrorCode::UnsupportedAngle, "cone angle 2pi is a flat point");
            if (spec.k < 1) throw Error(ErrorCode::UnsupportedAngle, "cone angle must be k*pi with k >= 1");
            int q = 2 * spec.k;
            return SquareTiledSurface(4 * q, quadrant_chain(q, true), "cone(" + std::to_string(spec.k) + "pi)");
        }
        case K::Angle: {
            if (spec.k < 3) throw Error(ErrorCode::UnsupportedAngle, "angle model needs k >= 3");
            return SquareTiledSurface(4 * spec.k, quadrant_chain(spec.k, false),
                                      "angle(" + std::to_string(spec.k) + "pi/2)");
        }
        case K::Raw: {
            std::vector<Pairing> ps;
            for (const auto& r : spec.pairings) {
                Pairing p = glue(r.t1, r.s1, r.t2, r.s2);
                if (r.s2 != r.s1 && r.s2 != opposite(r.s1))
                    throw Error(ErrorCode::InvalidGluing, "pairing needs a quarter turn");
                if (r.type && *r.type != p.type)
                    throw Error(ErrorCode::InvalidGluing, "declared gluing type contradicts the sides");
                ps.push_back(p);
            }
            return SquareTiledSurface(spec.tiles, ps, "raw");
        }
    }
    throw Error(ErrorCode::InvalidGluing, "unknown surface kind");
}

GeometrySummary geometry_summary(const SquareTiledSurface& s) {
    GeometrySummary g;
    g.area = s.tile_count();
    g.perimeter = static_cast<int>(s.boundary_sides().size());
    for (const auto& vc : s.vertex_classes()) {
        if (vc.is_cone()) g.cone_quarters.push_back(vc.quarters);
        if (vc.is_corner()) {
            g.corner_quarters.push_back(vc.quarters);
            if (vc.quarters == 1)
                ++g.right_angle_count;
            else
                g.nonright_quarters.push_back(vc.quarters);
        }
    }
    std::sort(g.cone_quarters.begin(), g.cone_quarters.end());
    std::sort(g.corner_quarters.begin(), g.corner_quarters.end());
    std::sort(g.nonright_quarters.begin(), g.nonright_quarters.end());
    g.euler_char = s.euler_char();
    return g;
}

bool gauss_bonnet_holds(const GeometrySummary& g) {
    int total = 0;
    for (int q : g.cone_quarters) total += 4 - q;
    for (int q : g.corner_quarters) total += 2 - q;
    return total == 4 * g.euler_char;
}

double quarters_to_radians(int q) { return q * std::numbers::pi / 2.0; }

int block_side_cell(int c, Side s, int p) {
    switch (s) {
        case N: return p + c * (c - 1);
        case S: return p;
        case E: return (c - 1) + c * p;
        case W: return c * p;
    }
    return 0;
}

SquareTiledSurface rescale(const SquareTiledSurface& s, int c) {
    if (c < 1) throw Error(ErrorCode::InvalidGluing, "rescale factor must be positive");
    const int cc = c * c;
    std::vector<Pairing> out;
    for (int t = 0; t < s.tile_count(); ++t)
        for (int bj = 0; bj < c; ++bj)
            for (int bi = 0; bi < c; ++bi) {
                int id = t * cc + bi + c * bj;
                if (bi + 1 < c) out.push_back(glue(id, E, id + 1, W));
                if (bj + 1 < c) out.push_back(glue(id, N, id + c, S));
            }
    for (const auto& p : s.pairings()) {
        for (int k = 0; k < c; ++k) {
            int k2 = p.type == Gluing::Translation ? k : c - 1 - k;
            out.push_back(glue(p.a.tile * cc + block_side_cell(c, p.a.side, k), p.a.side,
                               p.b.tile * cc + block_side_cell(c, p.b.side, k2), p.b.side));
        }
    }
    std::string name = s.name().empty() ? std::string() : s.name() + "x" + std::to_string(c);
    return SquareTiledSurface(s.tile_count() * cc, out, name);
}

}  // namespace tl
