#include "torsionlab/combinatorics.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

// union-find by size with undo, tracking whether a component holds a cycle
class RollbackDsu {
public:
    explicit RollbackDsu(int n) : parent_(n), size_(n, 1), cyclic_(n, false) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int x) const {
        while (parent_[x] != x) x = parent_[x];
        return x;
    }
    // returns false (and changes nothing) if the edge would break the rule
    bool add(int u, int v, bool allow_cycle) {
        int a = find(u), b = find(v);
        if (a == b) {
            if (!allow_cycle || cyclic_[a]) return false;
            cyclic_[a] = true;
            hist_.push_back({a, -1});
            return true;
        }
        if (cyclic_[a] && cyclic_[b]) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        hist_.push_back({a, b});
        parent_[b] = a;
        size_[a] += size_[b];
        flag_hist_.push_back(cyclic_[a]);
        cyclic_[a] = cyclic_[a] || cyclic_[b];
        return true;
    }
    void undo() {
        auto [a, b] = hist_.back();
        hist_.pop_back();
        if (b < 0) {
            cyclic_[a] = false;
            return;
        }
        cyclic_[a] = flag_hist_.back();
        flag_hist_.pop_back();
        size_[a] -= size_[b];
        parent_[b] = b;
    }

private:
    std::vector<int> parent_, size_;
    std::vector<bool> cyclic_;
    std::vector<std::pair<int, int>> hist_;
    std::vector<bool> flag_hist_;
};

double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -INFINITY;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void check_size(const MeshGraph& g, int pick) {
    if (g.vertex_count() > kEnumerationVertexLimit)
        throw Error(ErrorCode::TooLarge, std::to_string(g.vertex_count()) + " vertices exceed the enumeration limit");
    int e = static_cast<int>(g.segments().size());
    if (log_binomial(e, pick) > std::log(kEnumerationSubsetLimit))
        throw Error(ErrorCode::TooLarge, "too many edge subsets");
}

// visits every edge subset of the given size accepted by the union-find rule
void enumerate(const MeshGraph& g, int pick, bool cycles, const std::function<void(const std::vector<int>&)>& visit) {
    const auto& segs = g.segments();
    const int e = static_cast<int>(segs.size());
    RollbackDsu dsu(g.vertex_count());
    std::vector<int> chosen;
    std::function<void(int)> rec = [&](int k) {
        if (static_cast<int>(chosen.size()) == pick) {
            visit(chosen);
            return;
        }
        if (e - k < pick - static_cast<int>(chosen.size())) return;
        const auto& s = segs[k];
        if (dsu.add(s.v0, s.v1, cycles)) {
            chosen.push_back(k);
            rec(k + 1);
            chosen.pop_back();
            dsu.undo();
        }
        rec(k + 1);
    };
    rec(0);
}

std::vector<std::vector<WalkStep>> extract_cycles(const MeshGraph& g, const std::vector<int>& chosen) {
    const auto& segs = g.segments();
    const int nv = g.vertex_count();
    std::vector<std::vector<int>> inc(nv);
    for (int s : chosen) {
        inc[segs[s].v0].push_back(s);
        inc[segs[s].v1].push_back(s);
    }
    std::vector<bool> alive(segs.size(), false);
    for (int s : chosen) alive[s] = true;
    std::vector<int> deg(nv);
    for (int v = 0; v < nv; ++v) deg[v] = static_cast<int>(inc[v].size());
    std::vector<int> leaves;
    for (int v = 0; v < nv; ++v)
        if (deg[v] == 1) leaves.push_back(v);
    while (!leaves.empty()) {
        int v = leaves.back();
        leaves.pop_back();
        if (deg[v] != 1) continue;
        for (int s : inc[v]) {
            if (!alive[s]) continue;
            alive[s] = false;
            int w = segs[s].v0 == v ? segs[s].v1 : segs[s].v0;
            --deg[v];
            if (--deg[w] == 1) leaves.push_back(w);
            break;
        }
    }
    auto oriented = [&](int s, int from) -> WalkStep {
        return segs[s].v0 == from ? WalkStep{from, segs[s].d0} : WalkStep{from, segs[s].d1};
    };
    std::vector<std::vector<WalkStep>> cycles;
    std::vector<bool> used(segs.size(), false);
    for (int s0 : chosen) {
        if (!alive[s0] || used[s0]) continue;
        std::vector<WalkStep> walk;
        int s = s0, x = segs[s0].v0;
        while (true) {
            used[s] = true;
            walk.push_back(oriented(s, x));
            x = segs[s].v0 == x ? segs[s].v1 : segs[s].v0;
            if (x == segs[s0].v0 && (segs[s].v0 == segs[s].v1 || walk.size() > 1)) break;
            int next = -1;
            for (int t : inc[x])
                if (alive[t] && !used[t]) {
                    next = t;
                    break;
                }
            if (next < 0) break;
            s = next;
        }
        cycles.push_back(std::move(walk));
    }
    return cycles;
}

std::complex<double> cycle_weight(const UnitaryConnection& c, const std::vector<WalkStep>& cyc) {
    CMat w = cycle_monodromy(c, cyc);
    // 2 - w - conj(w) = |1 - w|^2 on the unit circle, without the cancellation near w = 1
    if (c.rank() == 1) return std::norm(1.0 - w(0, 0));
    return 2.0 - w.trace();
}

std::complex<double> crsf_weight(const UnitaryConnection& c, const Crsf& f) {
    std::complex<double> p = 1.0;
    for (const auto& cyc : f.cycles) p *= cycle_weight(c, cyc);
    return p;
}

double checked_real(std::complex<double> z, int rank) {
    double scale = 1.0 + std::abs(z);
    if (std::abs(z.imag()) > 1e-9 * scale)
        throw Error(ErrorCode::NegativeUnderSqrt, "cycle weight sum is not real");
    if (rank == 2 && z.real() < -1e-9 * scale)
        throw Error(ErrorCode::NegativeUnderSqrt, "cycle weight sum is negative");
    return z.real();
}

void require_rank(const UnitaryConnection& c) {
    if (c.rank() != 1 && c.rank() != 2) throw Error(ErrorCode::RankUnsupported, "CRSF weights need rank 1 or 2");
}

}  // namespace

long long count_spanning_trees(const MeshGraph& g) {
    const int nv = g.vertex_count();
    check_size(g, nv - 1);
    long long count = 0;
    enumerate(g, nv - 1, false, [&](const std::vector<int>&) { ++count; });
    return count;
}

std::vector<Crsf> enumerate_crsfs(const MeshGraph& g) {
    const int nv = g.vertex_count();
    check_size(g, nv);
    std::vector<Crsf> out;
    enumerate(g, nv, true, [&](const std::vector<int>& chosen) {
        Crsf f;
        f.segments = chosen;
        f.cycles = extract_cycles(g, chosen);
        out.push_back(std::move(f));
    });
    return out;
}

double crsf_weighted_sum(const UnitaryConnection& c) {
    require_rank(c);
    std::complex<double> total = 0.0;
    for (const auto& f : enumerate_crsfs(c.graph())) total += crsf_weight(c, f);
    return checked_real(total, c.rank());
}

std::vector<CrsfCensusRow> crsf_census(const UnitaryConnection& c) {
    require_rank(c);
    std::vector<CrsfCensusRow> rows;
    int id = 0;
    for (const auto& f : enumerate_crsfs(c.graph())) {
        CrsfCensusRow row;
        row.id = id++;
        row.components = static_cast<int>(f.cycles.size());
        std::string classes;
        for (const auto& cyc : f.cycles) {
            if (!classes.empty()) classes += ";";
            if (c.cuts()) {
                auto w = winding_vector(c, cyc);
                classes += "(";
                for (size_t k = 0; k < w.size(); ++k) classes += (k ? " " : "") + std::to_string(w[k]);
                classes += ")";
            } else {
                classes += "len" + std::to_string(cyc.size());
            }
        }
        row.cycle_classes = classes;
        row.weight = crsf_weight(c, f).real();
        rows.push_back(row);
    }
    return rows;
}

std::string census_csv(const std::vector<CrsfCensusRow>& rows) {
    std::ostringstream os;
    os << "crsf_id,n_components,cycle_classes,weight\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.weight);
        os << r.id << "," << r.components << "," << r.cycle_classes << "," << buf << "\n";
    }
    return os.str();
}

NoncontractibleResult noncontractible_expectation(const UnitaryConnection& c) {
    if (c.rank() != 2) throw Error(ErrorCode::RankUnsupported, "expectation identity is for rank 2");
    if (!c.cuts()) throw Error(ErrorCode::NotClassifiable, "winding classes need holonomy cuts");
    for (const auto& vc : c.graph().surface().vertex_classes())
        if (vc.is_cone()) throw Error(ErrorCode::NotClassifiable, "surface has cones");
    NoncontractibleResult res;
    std::complex<double> total = 0.0, nonc = 0.0;
    for (const auto& f : enumerate_crsfs(c.graph())) {
        std::complex<double> w = crsf_weight(c, f);
        total += w;
        bool all_nonc = true;
        for (const auto& cyc : f.cycles) {
            auto wv = winding_vector(c, cyc);
            bool zero = true;
            for (int x : wv) zero = zero && x == 0;
            if (zero) all_nonc = false;
        }
        if (all_nonc) {
            nonc += w;
            ++res.nonc_count;
        }
    }
    res.total_sum = checked_real(total, 2);
    res.nonc_sum = checked_real(nonc, 2);
    res.expectation = res.nonc_count > 0 ? res.nonc_sum / static_cast<double>(res.nonc_count) : 0.0;
    return res;
}

}  // namespace tl
