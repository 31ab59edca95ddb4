#include "torsionlab/mesh.hpp"

#include <algorithm>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace tl {

MeshGraph::MeshGraph(const SquareTiledSurface& s, int n) : n_(n), surface_(s), refined_(rescale(s, n)) {
    const int nn = n * n;
    const int nv = s.tile_count() * nn;
    vertices_.resize(nv);
    for (int v = 0; v < nv; ++v) vertices_[v] = MeshVertex{v / nn, (v % nn) % n, (v % nn) / n};

    steps_.resize(4 * static_cast<size_t>(nv));
    for (int v = 0; v < nv; ++v)
        for (int d = 0; d < 4; ++d) {
            const auto& p = refined_.partner(v, static_cast<Side>(d));
            if (p) steps_[4 * v + d] = MeshStep{p->slot.tile, p->slot.side, -1};
        }

    for (int v = 0; v < nv; ++v)
        for (int d = 0; d < 4; ++d) {
            MeshStep& st = steps_[4 * v + d];
            if (st.target < 0) continue;
            int here = 4 * v + d, there = 4 * st.target + st.back;
            if (here < there) {
                int id = static_cast<int>(segments_.size());
                segments_.push_back(Segment{v, static_cast<Side>(d), st.target, st.back});
                st.segment = id;
                steps_[there].segment = id;
            }
        }

    std::map<std::pair<int, int>, std::vector<int>> groups;
    for (int k = 0; k < static_cast<int>(segments_.size()); ++k) {
        const auto& sg = segments_[k];
        groups[{std::min(sg.v0, sg.v1), std::max(sg.v0, sg.v1)}].push_back(k);
    }
    for (auto& [key, segs] : groups)
        edges_.push_back(MeshEdge{key.first, key.second, static_cast<int>(segs.size()), segs});

    for (int v = 0; v < nv; ++v)
        if (degree(v) < 4) boundary_.push_back(v);

    for (int p : s.singular_points()) {
        std::vector<int> set;
        for (const auto& cr : s.vertex_classes()[p].corners) {
            auto [cx, cy] = corner_coords(cr.corner);
            int i = cx > 0 ? n - 1 : 0;
            int j = cy > 0 ? n - 1 : 0;
            set.push_back(vertex_id(cr.tile, i, j));
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        cone_sets_[p] = set;
    }
}

int MeshGraph::degree(int v) const {
    int d = 0;
    for (int k = 0; k < 4; ++k) d += steps_[4 * v + k].target >= 0;
    return d;
}

std::string MeshGraph::vertex_label(int v) const {
    const auto& mv = vertices_[v];
    return std::to_string(mv.tile) + ":" + std::to_string(mv.i) + ":" + std::to_string(mv.j);
}

std::string MeshGraph::edges_csv() const {
    std::ostringstream os;
    os << "u,v,multiplicity\n";
    for (const auto& e : edges_) os << vertex_label(e.u) << "," << vertex_label(e.v) << "," << e.multiplicity << "\n";
    return os.str();
}

MeshGraph discretize(const SquareTiledSurface& s, int n) {
    if (n < 1) throw Error(ErrorCode::DomainError, "subdivision n must be positive");
    return MeshGraph(s, n);
}

std::vector<int> cone_neighbors(const MeshGraph& g, int point) {
    auto it = g.cone_neighbor_sets().find(point);
    if (it == g.cone_neighbor_sets().end())
        throw Error(ErrorCode::UnknownPoint, "point " + std::to_string(point) + " is not a cone or corner");
    return it->second;
}

}  // namespace tl
