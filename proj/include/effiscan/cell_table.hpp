#pragma once

#include <Eigen/Dense>
#include <vector>

#include "effiscan/grid.hpp"

namespace effiscan {

/// Regression moment block for one row subset, in globally mean-centered
/// coordinates (offsets kept so raw-coordinate moments can be recovered
/// exactly).
struct SufficientStats {
    double n = 0;
    Eigen::VectorXd sx;   // sum of centered x
    Eigen::MatrixXd sxx;  // sum of centered x x^T
    double sy = 0;
    Eigen::VectorXd sxy;  // sum of centered x * centered y
    double syy = 0;
    Eigen::VectorXd x_offset;
    double y_offset = 0;

    // Raw-coordinate (uncentered) equivalents, for oracle comparisons.
    Eigen::VectorXd raw_sx() const;
    Eigen::MatrixXd raw_sxx() const;
    double raw_sy() const;
    Eigen::VectorXd raw_sxy() const;
    double raw_syy() const;
};

/// d-dimensional summed-area table of moment blocks over grid cells
/// (size(j)+1 cells per dimension: the intervals between consecutive cuts
/// plus the two overflow tails). Region queries are inclusion-exclusion over
/// the 2^d corners of the cumulative array.
class CellTable {
public:
    CellTable(const Dataset& ds, const QuantileGrid& grid);

    const QuantileGrid& grid() const { return grid_; }
    int dims() const { return d_; }
    long sample_size() const { return n_; }
    const Eigen::VectorXd& x_offset() const { return x_offset_; }
    double y_offset() const { return y_offset_; }

    // Full moment block of a region; restricted[j]==false lifts the region's
    // bounds in dimension j (the whole axis is included).
    SufficientStats query(const Region& r, const std::vector<bool>& restricted) const;
    SufficientStats query(const Region& r) const;
    // Occupancy only; cheaper than a full block gather.
    long count(const Region& r, const std::vector<bool>& restricted) const;
    long count(const Region& r) const;

private:
    QuantileGrid grid_;
    int d_;
    long n_;
    int block_;
    std::vector<int> cells_;    // cells per dimension = size(j)+1
    std::vector<long> stride_;  // cell strides in blocks
    std::vector<double> data_;  // cumulative blocks
    Eigen::VectorXd x_offset_;
    double y_offset_;

    void corner_bounds(const Region& r, const std::vector<bool>& restricted,
                       std::vector<int>& lo, std::vector<int>& hi) const;
};

// Direct row-scan computation of the same stats (the oracle path and the
// fallback for large d). Centered at the given offsets.
SufficientStats row_scan_stats(const Dataset& ds, const QuantileGrid& grid, const Region& r,
                               const Eigen::VectorXd& x_offset, double y_offset);

// Builds stats from an explicit row list, centered at the row-subset means.
SufficientStats stats_from_rows(const Dataset& ds, const std::vector<long>& rows);

struct EnumerationResult {
    std::vector<Region> regions;  // deduplicated, occupancy >= min_points
    long pairs = 0;               // corner pairs before dedup/filter
};

// All unordered pairs of distinct interior grid points, mapped to boxes by
// per-dimension min/max, deduplicated, then filtered by occupancy.
EnumerationResult enumerate_regions(const QuantileGrid& grid, long min_points,
                                    const CellTable& table);

long default_min_points(int d);

}  // namespace effiscan
