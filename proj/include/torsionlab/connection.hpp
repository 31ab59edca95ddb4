#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "torsionlab/mesh.hpp"

namespace tl {

using CMat = Eigen::MatrixXcd;

struct HolonomyRepresentation {
    int rank = 1;
    std::vector<CMat> generators;
};

// Dual cuts: for each generator, the tile sides (of the unrefined surface)
// whose outward crossing carries the generator matrix.
struct CutSystem {
    std::vector<std::vector<SideSlot>> generators;
};

// A directed step (vertex, direction) of a mesh graph.
using WalkStep = std::pair<int, Side>;

class UnitaryConnection {
public:
    UnitaryConnection(std::shared_ptr<const MeshGraph> g, int rank, std::vector<CMat> segment_transport,
                      std::optional<CutSystem> cuts = std::nullopt);

    const MeshGraph& graph() const { return *graph_; }
    std::shared_ptr<const MeshGraph> graph_ptr() const { return graph_; }
    int rank() const { return rank_; }

    // parallel transport from the fiber at v to the fiber at the target of (v, d)
    CMat transport(int v, Side d) const;
    const std::vector<CMat>& segment_transports() const { return seg_; }

    const std::optional<CutSystem>& cuts() const { return cuts_; }
    // signed number of cut crossings of the step, per generator
    std::vector<int> crossing_signs(int v, Side d) const;

    // max over face cycles of |monodromy - I|
    double flatness_defect() const;

private:
    std::shared_ptr<const MeshGraph> graph_;
    int rank_;
    std::vector<CMat> seg_;
    std::optional<CutSystem> cuts_;
    std::vector<int> cut_table_;
};

// closed walks around each interior vertex of the refined tiling
std::vector<std::vector<WalkStep>> face_cycles(const MeshGraph& g);

UnitaryConnection trivial_connection(std::shared_ptr<const MeshGraph> g, int rank);
UnitaryConnection connection_from_holonomy(std::shared_ptr<const MeshGraph> g, const HolonomyRepresentation& rep,
                                           const CutSystem& cuts);
// torus: generator 0 crosses the east sides of the last column, generator 1
// the north sides of the last row; cylinder: one generator, east sides.
CutSystem default_cuts(const SurfaceSpec& spec);

UnitaryConnection gauge_transform(const UnitaryConnection& c, const std::vector<CMat>& u);

int flat_sections_dim(const HolonomyRepresentation& rep);

CMat cycle_monodromy(const UnitaryConnection& c, const std::vector<WalkStep>& cycle);
std::vector<int> winding_vector(const UnitaryConnection& c, const std::vector<WalkStep>& cycle);

bool is_unitary(const CMat& m, double tol = 1e-12);
CMat random_unitary(int rank, std::mt19937_64& rng, bool special = false);
// commuting SU(2) pair U diag(e^{ia}, e^{-ia}) U*, U diag(e^{ib}, e^{-ib}) U*
std::pair<CMat, CMat> random_commuting_su2(std::mt19937_64& rng);
CMat phase(double angle);

}  // namespace tl
