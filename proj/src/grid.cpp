#include "effiscan/grid.hpp"

#include <algorithm>
#include <cmath>

#include "effiscan/errors.hpp"

namespace effiscan {

long QuantileGrid::total_points() const {
    long total = 1;
    for (const auto& c : cuts) total *= static_cast<long>(c.size());
    return total;
}

int QuantileGrid::cell_of(int j, double v) const {
    const auto& c = cuts[static_cast<std::size_t>(j)];
    return static_cast<int>(std::lower_bound(c.begin(), c.end(), v) - c.begin());
}

bool Region::contains_row(const QuantileGrid& grid, const Eigen::MatrixXd& x, long row) const {
    for (int j = 0; j < grid.dims(); ++j) {
        const auto& c = grid.cuts[static_cast<std::size_t>(j)];
        const double v = x(row, j);
        if (!(v > c[static_cast<std::size_t>(lo[static_cast<std::size_t>(j)])] &&
              v <= c[static_cast<std::size_t>(hi[static_cast<std::size_t>(j)])]))
            return false;
    }
    return true;
}

bool Region::contains_point(const std::vector<int>& idx) const {
    for (std::size_t j = 0; j < lo.size(); ++j)
        if (idx[j] < lo[j] || idx[j] > hi[j]) return false;
    return true;
}

QuantileGrid build_grid(const Dataset& ds, const std::vector<int>& sizes) {
    const int d = ds.d();
    if (static_cast<int>(sizes.size()) != d)
        throw ConfigError("grid sizes count does not match dimension count");
    QuantileGrid grid;
    grid.cuts.resize(static_cast<std::size_t>(d));
    const long n = ds.n();
    for (int j = 0; j < d; ++j) {
        const int m = sizes[static_cast<std::size_t>(j)];
        if (m < 2) throw ConfigError("grid size must be >= 2, got " + std::to_string(m));
        if (n < m) throw DataError("n < grid size in dimension " + std::to_string(j));
        std::vector<double> sorted(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = ds.x(i, j);
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front() == sorted.back())
            throw ConfigError("column " + ds.names[static_cast<std::size_t>(j)] +
                              " is constant: zero-width grid dimension");
        std::vector<double>& cuts = grid.cuts[static_cast<std::size_t>(j)];
        for (int k = 1; k <= m; ++k) {
            const double p = static_cast<double>(k) / (m + 1);
            const long idx = static_cast<long>(std::floor(p * static_cast<double>(n - 1)));
            const double q = sorted[static_cast<std::size_t>(idx)];
            if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
        }
    }
    return grid;
}

QuantileGrid build_grid(const Dataset& ds, const GridSizes& sizes) {
    std::vector<int> v(static_cast<std::size_t>(ds.d()), sizes.other);
    v[static_cast<std::size_t>(ds.interest_index)] = sizes.interest;
    return build_grid(ds, v);
}

std::vector<std::vector<int>> interior_points(const QuantileGrid& grid) {
    const int d = grid.dims();
    std::vector<std::vector<int>> points;
    points.reserve(static_cast<std::size_t>(grid.total_points()));
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
        points.push_back(idx);
        int j = d - 1;
        while (j >= 0) {
            if (++idx[static_cast<std::size_t>(j)] < grid.size(j)) break;
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return points;
}

}  // namespace effiscan
