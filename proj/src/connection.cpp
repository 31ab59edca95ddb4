#include "torsionlab/connection.hpp"

#include <cmath>
#include <complex>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

// generator index of the original tile side crossed by step (v, d), or -1
int cut_crossed(const MeshGraph& g, const std::vector<int>& cut_of_slot, int v, Side d) {
    const auto& mv = g.vertex(v);
    const int n = g.n();
    bool on_side = (d == E && mv.i == n - 1) || (d == W && mv.i == 0) || (d == N && mv.j == n - 1) ||
                   (d == S && mv.j == 0);
    if (!on_side) return -1;
    return cut_of_slot[4 * mv.tile + d];
}

std::vector<int> slot_table(const MeshGraph& g, const CutSystem& cuts) {
    const auto& s = g.surface();
    std::vector<int> table(4 * static_cast<size_t>(s.tile_count()), -1);
    for (int k = 0; k < static_cast<int>(cuts.generators.size()); ++k)
        for (const auto& sl : cuts.generators[k]) {
            if (sl.tile < 0 || sl.tile >= s.tile_count()) throw Error(ErrorCode::BadCuts, "cut tile out of range");
            if (!s.partner(sl.tile, sl.side)) throw Error(ErrorCode::BadCuts, "cut runs along the boundary");
            int& slot = table[4 * sl.tile + sl.side];
            if (slot >= 0) throw Error(ErrorCode::BadCuts, "side listed in two cuts");
            slot = k;
        }
    for (int t = 0; t < s.tile_count(); ++t)
        for (int d = 0; d < 4; ++d) {
            if (table[4 * t + d] < 0) continue;
            const auto& p = s.partner(t, static_cast<Side>(d));
            if (table[4 * p->slot.tile + p->slot.side] >= 0)
                throw Error(ErrorCode::BadCuts, "both sides of a pairing listed as cuts");
        }
    return table;
}

}  // namespace

UnitaryConnection::UnitaryConnection(std::shared_ptr<const MeshGraph> g, int rank, std::vector<CMat> segment_transport,
                                     std::optional<CutSystem> cuts)
    : graph_(std::move(g)), rank_(rank), seg_(std::move(segment_transport)), cuts_(std::move(cuts)) {
    if (seg_.size() != graph_->segments().size())
        throw Error(ErrorCode::DomainError, "one transport per segment required");
    if (cuts_) cut_table_ = slot_table(*graph_, *cuts_);
}

CMat UnitaryConnection::transport(int v, Side d) const {
    const auto& st = graph_->step(v, d);
    if (st.target < 0) throw Error(ErrorCode::NotAClosedWalk, "step leaves through the boundary");
    const auto& sg = graph_->segments()[st.segment];
    if (sg.v0 == v && sg.d0 == d) return seg_[st.segment];
    return seg_[st.segment].adjoint();
}

std::vector<int> UnitaryConnection::crossing_signs(int v, Side d) const {
    if (!cuts_) throw Error(ErrorCode::NotClassifiable, "connection carries no cut system");
    std::vector<int> out(cuts_->generators.size(), 0);
    const auto& st = graph_->step(v, d);
    int k = cut_crossed(*graph_, cut_table_, v, d);
    if (k >= 0) out[k] += 1;
    int kb = cut_crossed(*graph_, cut_table_, st.target, st.back);
    if (kb >= 0) out[kb] -= 1;
    return out;
}

double UnitaryConnection::flatness_defect() const {
    double worst = 0.0;
    CMat id = CMat::Identity(rank_, rank_);
    for (const auto& cyc : face_cycles(*graph_)) worst = std::max(worst, (cycle_monodromy(*this, cyc) - id).norm());
    return worst;
}

std::vector<std::vector<WalkStep>> face_cycles(const MeshGraph& g) {
    std::vector<std::vector<WalkStep>> out;
    for (const auto& vc : g.refined().vertex_classes()) {
        if (vc.boundary) continue;
        std::vector<WalkStep> cyc;
        for (size_t m = 0; m < vc.corners.size(); ++m) cyc.emplace_back(vc.corners[m].tile, vc.crossings[m]);
        out.push_back(std::move(cyc));
    }
    return out;
}

UnitaryConnection trivial_connection(std::shared_ptr<const MeshGraph> g, int rank) {
    if (rank < 1) throw Error(ErrorCode::RankUnsupported, "rank must be positive");
    std::vector<CMat> seg(g->segments().size(), CMat::Identity(rank, rank));
    return UnitaryConnection(std::move(g), rank, std::move(seg));
}

UnitaryConnection connection_from_holonomy(std::shared_ptr<const MeshGraph> g, const HolonomyRepresentation& rep,
                                           const CutSystem& cuts) {
    if (rep.generators.size() != cuts.generators.size())
        throw Error(ErrorCode::BadCuts, "one cut per generator required");
    for (const auto& m : rep.generators) {
        if (m.rows() != rep.rank || m.cols() != rep.rank) throw Error(ErrorCode::BadCuts, "generator rank mismatch");
        if (!is_unitary(m, 1e-10)) throw Error(ErrorCode::NonUnitaryGauge, "generator is not unitary");
    }
    auto table = slot_table(*g, cuts);
    const int r = rep.rank;
    std::vector<CMat> seg;
    seg.reserve(g->segments().size());
    for (const auto& sg : g->segments()) {
        int k = cut_crossed(*g, table, sg.v0, sg.d0);
        int kb = cut_crossed(*g, table, sg.v1, sg.d1);
        if (k >= 0)
            seg.push_back(rep.generators[k]);
        else if (kb >= 0)
            seg.push_back(rep.generators[kb].adjoint());
        else
            seg.push_back(CMat::Identity(r, r));
    }
    UnitaryConnection c(std::move(g), r, std::move(seg), cuts);
    if (c.flatness_defect() > 1e-10) throw Error(ErrorCode::BadCuts, "cuts do not close up into a flat bundle");
    return c;
}

CutSystem default_cuts(const SurfaceSpec& spec) {
    using K = SurfaceSpec::Kind;
    CutSystem cs;
    if (spec.kind != K::Torus && spec.kind != K::Cylinder)
        throw Error(ErrorCode::BadCuts, "default cuts exist only for tori and cylinders");
    std::vector<SideSlot> vert;
    for (int j = 0; j < spec.b; ++j) vert.push_back(SideSlot{(spec.a - 1) + spec.a * j, E});
    cs.generators.push_back(vert);
    if (spec.kind == K::Torus) {
        std::vector<SideSlot> horiz;
        for (int i = 0; i < spec.a; ++i) horiz.push_back(SideSlot{i + spec.a * (spec.b - 1), N});
        cs.generators.push_back(horiz);
    }
    return cs;
}

UnitaryConnection gauge_transform(const UnitaryConnection& c, const std::vector<CMat>& u) {
    const auto& g = c.graph();
    if (static_cast<int>(u.size()) != g.vertex_count())
        throw Error(ErrorCode::NonUnitaryGauge, "one gauge matrix per vertex required");
    for (const auto& m : u)
        if (m.rows() != c.rank() || !is_unitary(m, 1e-10))
            throw Error(ErrorCode::NonUnitaryGauge, "gauge matrix is not unitary");
    std::vector<CMat> seg;
    seg.reserve(g.segments().size());
    for (size_t k = 0; k < g.segments().size(); ++k) {
        const auto& sg = g.segments()[k];
        seg.push_back(u[sg.v1] * c.segment_transports()[k] * u[sg.v0].adjoint());
    }
    return UnitaryConnection(c.graph_ptr(), c.rank(), std::move(seg), c.cuts());
}

int flat_sections_dim(const HolonomyRepresentation& rep) {
    const int r = rep.rank;
    if (rep.generators.empty()) return r;
    CMat stacked(r * static_cast<int>(rep.generators.size()), r);
    for (size_t k = 0; k < rep.generators.size(); ++k)
        stacked.block(r * k, 0, r, r) = rep.generators[k] - CMat::Identity(r, r);
    Eigen::JacobiSVD<CMat> svd(stacked);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > 1e-9;
    return r - rank;
}

CMat cycle_monodromy(const UnitaryConnection& c, const std::vector<WalkStep>& cycle) {
    if (cycle.empty()) throw Error(ErrorCode::NotAClosedWalk, "empty walk");
    const auto& g = c.graph();
    CMat m = CMat::Identity(c.rank(), c.rank());
    for (size_t k = 0; k < cycle.size(); ++k) {
        auto [v, d] = cycle[k];
        if (v < 0 || v >= g.vertex_count()) throw Error(ErrorCode::NotAClosedWalk, "vertex out of range");
        const auto& st = g.step(v, d);
        if (st.target < 0) throw Error(ErrorCode::NotAClosedWalk, "walk leaves through the boundary");
        int next = cycle[(k + 1) % cycle.size()].first;
        if (st.target != next) throw Error(ErrorCode::NotAClosedWalk, "consecutive steps do not connect");
        m = c.transport(v, d) * m;
    }
    return m;
}

std::vector<int> winding_vector(const UnitaryConnection& c, const std::vector<WalkStep>& cycle) {
    cycle_monodromy(c, cycle);  // validates the walk
    std::vector<int> w;
    for (auto [v, d] : cycle) {
        auto s = c.crossing_signs(v, d);
        if (w.empty()) w.assign(s.size(), 0);
        for (size_t k = 0; k < s.size(); ++k) w[k] += s[k];
    }
    return w;
}

bool is_unitary(const CMat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m.adjoint() * m - CMat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

CMat random_unitary(int rank, std::mt19937_64& rng, bool special) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMat z(rank, rank);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) z(i, j) = std::complex<double>(nd(rng), nd(rng));
    Eigen::HouseholderQR<CMat> qr(z);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < rank; ++j) {
        std::complex<double> d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    if (special) {
        std::complex<double> det = q.determinant();
        q *= std::pow(det, -1.0 / rank);
    }
    return q;
}

std::pair<CMat, CMat> random_commuting_su2(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    CMat u = random_unitary(2, rng);
    auto diag = [](double a) {
        CMat d = CMat::Zero(2, 2);
        d(0, 0) = std::polar(1.0, a);
        d(1, 1) = std::polar(1.0, -a);
        return d;
    };
    double a = ang(rng), b = ang(rng);
    return {u * diag(a) * u.adjoint(), u * diag(b) * u.adjoint()};
}

CMat phase(double angle) {
    CMat m(1, 1);
    m(0, 0) = std::polar(1.0, angle);
    return m;
}

}  // namespace tl
