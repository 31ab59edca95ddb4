#pragma once

#include <map>
#include <string>
#include <vector>

#include "torsionlab/surface.hpp"

namespace tl {

struct MeshVertex {
    int tile = 0;
    int i = 0;
    int j = 0;
};

struct MeshStep {
    int target = -1;  // -1 when the step leaves through the boundary
    Side back = N;    // direction of the reverse step at the target
    int segment = -1;
};

// One unit geodesic segment between sub-tile centers, stored with its
// canonical orientation (v0, d0) -> (v1, d1).
struct Segment {
    int v0 = 0;
    Side d0 = N;
    int v1 = 0;
    Side d1 = N;
};

struct MeshEdge {
    int u = 0;
    int v = 0;
    int multiplicity = 0;
    std::vector<int> segments;
};

class MeshGraph {
public:
    MeshGraph(const SquareTiledSurface& s, int n);

    int n() const { return n_; }
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    const MeshVertex& vertex(int v) const { return vertices_[v]; }
    int vertex_id(int tile, int i, int j) const { return tile * n_ * n_ + i + n_ * j; }
    std::string vertex_label(int v) const;

    const MeshStep& step(int v, Side d) const { return steps_[4 * v + d]; }
    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<MeshEdge>& edges() const { return edges_; }
    const std::vector<int>& boundary_vertices() const { return boundary_; }
    int degree(int v) const;

    const SquareTiledSurface& surface() const { return surface_; }
    // surface refined n times; its tiles are exactly the mesh vertices
    const SquareTiledSurface& refined() const { return refined_; }

    // V_n(P) for every cone or corner P (keyed by vertex class id of surface())
    const std::map<int, std::vector<int>>& cone_neighbor_sets() const { return cone_sets_; }

    std::string edges_csv() const;

private:
    int n_;
    SquareTiledSurface surface_;
    SquareTiledSurface refined_;
    std::vector<MeshVertex> vertices_;
    std::vector<MeshStep> steps_;
    std::vector<Segment> segments_;
    std::vector<MeshEdge> edges_;
    std::vector<int> boundary_;
    std::map<int, std::vector<int>> cone_sets_;
};

MeshGraph discretize(const SquareTiledSurface& s, int n);

// V_n(P); throws UnknownPoint when P is not a cone or corner
std::vector<int> cone_neighbors(const MeshGraph& g, int point);

// mesh vertex at global position (x, y) of a grid-built surface with width a
inline int grid_vertex(int a, int n, int x, int y) { return (x / n + a * (y / n)) * n * n + x % n + n * (y % n); }

}  // namespace tl
