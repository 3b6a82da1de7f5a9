#pragma once

#include <map>
#include <vector>

#include "effiscan/cell_table.hpp"
#include "effiscan/fit.hpp"

namespace effiscan {

enum class Criterion { OlsT1, H0NoiseT1 };

struct RegionEval {
    int region_id = 0;  // index into the enumerated region list
    double t = 0;
    double beta1 = 0;
    long n_h = 0;
    double coverage = 0;  // share of sample covered by the non-interest projection
};

struct ScanResult {
    std::vector<RegionEval> entries;  // surviving regions, region-id order
};

// Evaluates the criterion on every candidate region. Regions whose fit is
// rank deficient or undersized are dropped. Parallel over regions; output
// order is region id, so results do not depend on scheduling.
ScanResult scan_all(const Dataset& ds, const CellTable& table,
                    const std::vector<Region>& regions, Criterion criterion);

constexpr int kUncovered = -1;

// For each evaluation point (grid-index tuple) the |t|-maximizing region
// containing it; ties go to larger n_h then smaller region id. Points inside
// no surviving region map to kUncovered.
std::vector<int> best_region_per_point(const ScanResult& scan, const std::vector<Region>& regions,
                                       const std::vector<std::vector<int>>& points);

struct Feature {
    int rank = 0;  // 1-based, decreasing |t|
    int region_id = 0;
    Region region;
    double t = 0;
    double beta1 = 0;
    long n_h = 0;
    double coverage = 0;
    std::vector<long> member_rows;
};

std::vector<Feature> extract_features(const ScanResult& scan, const std::vector<Region>& regions,
                                      const std::vector<int>& mapping, const Dataset& ds,
                                      const QuantileGrid& grid);

/// Disjointification: each covered row is assigned the smallest feature rank
/// whose region contains it.
struct FeaturePartition {
    std::vector<int> rank_of_row;  // size n; 0 = uncovered, else 1..r
};

FeaturePartition partition_features(const std::vector<Feature>& features, const Dataset& ds);

}  // namespace effiscan
