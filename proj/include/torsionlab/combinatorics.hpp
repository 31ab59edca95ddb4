#pragma once

#include <string>
#include <vector>

#include "torsionlab/connection.hpp"

namespace tl {

constexpr int kEnumerationVertexLimit = 12;
constexpr double kEnumerationSubsetLimit = 5e7;

struct Crsf {
    std::vector<int> segments;                     // ascending segment ids
    std::vector<std::vector<WalkStep>> cycles;     // one closed walk per component
};

long long count_spanning_trees(const MeshGraph& g);
std::vector<Crsf> enumerate_crsfs(const MeshGraph& g);

// rank 1: sum over CRSFs of prod (2 - w - 1/w); rank 2: prod (2 - Tr w)
double crsf_weighted_sum(const UnitaryConnection& c);

struct CrsfCensusRow {
    int id = 0;
    int components = 0;
    std::string cycle_classes;
    double weight = 0.0;
};
std::vector<CrsfCensusRow> crsf_census(const UnitaryConnection& c);
std::string census_csv(const std::vector<CrsfCensusRow>& rows);

struct NoncontractibleResult {
    double expectation = 0.0;
    long long nonc_count = 0;
    double nonc_sum = 0.0;
    double total_sum = 0.0;
};
NoncontractibleResult noncontractible_expectation(const UnitaryConnection& c);

}  // namespace tl
