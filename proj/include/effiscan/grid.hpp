#pragma once

#include <vector>

#include "effiscan/dataset.hpp"

namespace effiscan {

/// Per-dimension sorted quantile cut values. The interior grid is the
/// cartesian product of the cut values; grid "points" are index tuples.
struct QuantileGrid {
    std::vector<std::vector<double>> cuts;  // cuts[j] strictly increasing

    int dims() const { return static_cast<int>(cuts.size()); }
    int size(int j) const { return static_cast<int>(cuts[static_cast<std::size_t>(j)].size()); }
    long total_points() const;

    // Cell index of value v in dimension j under the half-open rule
    // (g_a, g_b]: index of the first cut >= v, in 0..size(j).
    int cell_of(int j, double v) const;
};

/// Axis-aligned box in grid-index coordinates. Dimension j covers the real
/// interval (cuts[j][lo[j]], cuts[j][hi[j]]]; lo[j] == hi[j] makes the box
/// flat (and hence empty) in that dimension.
struct Region {
    std::vector<int> lo, hi;  // cut indices, lo[j] <= hi[j]

    bool contains_row(const QuantileGrid& grid, const Eigen::MatrixXd& x, long row) const;
    // Grid-index containment used for evaluation points: lo <= idx <= hi.
    bool contains_point(const std::vector<int>& idx) const;
    bool operator==(const Region& other) const { return lo == other.lo && hi == other.hi; }
};

struct GridSizes {
    int interest = 15;
    int other = 5;
};

// Cut values are the k/(m_j+1) sample quantiles, k = 1..m_j, taken with
// lower interpolation (the order statistic at floor(p*(n-1))). Duplicate
// quantiles collapse, shrinking m_j.
QuantileGrid build_grid(const Dataset& ds, const std::vector<int>& sizes);
QuantileGrid build_grid(const Dataset& ds, const GridSizes& sizes);

// All interior grid points as index tuples, lexicographic order.
std::vector<std::vector<int>> interior_points(const QuantileGrid& grid);

}  // namespace effiscan
