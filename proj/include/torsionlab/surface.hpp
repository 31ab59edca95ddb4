#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tl {

enum Side : int { N = 0, E = 1, S = 2, W = 3 };

Side opposite(Side s);
const char* side_name(Side s);
Side parse_side(const std::string& s);
// unit step (dx, dy) leaving a tile through side s
std::array<int, 2> side_direction(Side s);

enum class Gluing { Translation, HalfTurn };

struct SideSlot {
    int tile = 0;
    Side side = N;
    bool operator==(const SideSlot&) const = default;
};

struct Partner {
    SideSlot slot;
    Gluing type = Gluing::Translation;
};

struct Pairing {
    SideSlot a;
    SideSlot b;
    Gluing type = Gluing::Translation;
};

// Corner of a tile: 0 = NE, 1 = NW, 2 = SW, 3 = SE.
struct CornerRef {
    int tile = 0;
    int corner = 0;
    bool operator==(const CornerRef&) const = default;
};

std::array<int, 2> corner_coords(int corner);
int corner_index(int cx, int cy);

// A point of the surface coming from tile corners. Angles are stored in
// quarters, i.e. units of pi/2.
struct VertexClass {
    bool boundary = false;
    int quarters = 0;
    // Counter-clockwise order around the point. For boundary classes the
    // list starts at the clockwise end.
    std::vector<CornerRef> corners;
    // crossings[m] is the side of corners[m].tile crossed to reach
    // corners[m+1] (cyclically for interior classes).
    std::vector<Side> crossings;

    bool is_cone() const { return !boundary && quarters != 4; }
    bool is_corner() const { return boundary && quarters != 2; }
};

struct SurfaceSpec {
    enum class Kind { Rectangle, Torus, Cylinder, LShape, Slit, Cone, Angle, Raw };
    struct RawPairing {
        int t1 = 0;
        Side s1 = N;
        int t2 = 0;
        Side s2 = N;
        std::optional<Gluing> type;
    };

    Kind kind = Kind::Rectangle;
    int a = 1;
    int b = 1;
    int k = 0;
    int tiles = 0;
    std::vector<RawPairing> pairings;

    static SurfaceSpec rectangle(int a, int b);
    static SurfaceSpec torus(int a, int b);
    static SurfaceSpec cylinder(int circumference, int height);
    static SurfaceSpec lshape();
    static SurfaceSpec slit();
    // cone of angle k*pi
    static SurfaceSpec cone(int k);
    // boundary angle k*pi/2
    static SurfaceSpec angle(int k);
};

class SquareTiledSurface {
public:
    SquareTiledSurface(int tiles, const std::vector<Pairing>& pairings, std::string name = {});

    int tile_count() const { return tiles_; }
    const std::optional<Partner>& partner(int tile, Side s) const { return slots_[4 * tile + s]; }
    std::vector<SideSlot> boundary_sides() const;
    std::vector<Pairing> pairings() const;
    const std::vector<VertexClass>& vertex_classes() const { return classes_; }
    int class_of(int tile, int corner) const { return class_of_corner_[4 * tile + corner]; }
    int euler_char() const;
    const std::string& name() const { return name_; }

    // cones and boundary corners, as indices into vertex_classes()
    std::vector<int> singular_points() const;

private:
    void compute_classes();

    int tiles_;
    std::string name_;
    std::vector<std::optional<Partner>> slots_;
    std::vector<VertexClass> classes_;
    std::vector<int> class_of_corner_;
};

struct GeometrySummary {
    int area = 0;
    int perimeter = 0;
    std::vector<int> cone_quarters;    // sorted
    std::vector<int> corner_quarters;  // sorted
    int euler_char = 0;
    int right_angle_count = 0;
    std::vector<int> nonright_quarters;
};

SquareTiledSurface build_surface(const SurfaceSpec& spec);
GeometrySummary geometry_summary(const SquareTiledSurface& s);
// sum of curvature in quarters equals 4*chi
bool gauss_bonnet_holds(const GeometrySummary& g);
double quarters_to_radians(int q);

// Each tile becomes a c x c block; sub-tile (bi, bj) of tile t gets id
// t*c*c + bi + c*bj.
SquareTiledSurface rescale(const SquareTiledSurface& s, int c);

// local block index of the p-th sub-tile along side s of a c x c block
int block_side_cell(int c, Side s, int p);

}  // namespace tl
