#include "effiscan/cell_table.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "effiscan/errors.hpp"

namespace effiscan {
namespace {

// Block layout: [count | sx(d) | sxx upper triangle (d(d+1)/2) | sy | sxy(d) | syy]
int block_size(int d) { return 1 + d + d * (d + 1) / 2 + 1 + d + 1; }

}  // namespace

Eigen::VectorXd SufficientStats::raw_sx() const { return sx + n * x_offset; }

Eigen::MatrixXd SufficientStats::raw_sxx() const {
    return sxx + x_offset * sx.transpose() + sx * x_offset.transpose() +
           n * x_offset * x_offset.transpose();
}

double SufficientStats::raw_sy() const { return sy + n * y_offset; }

Eigen::VectorXd SufficientStats::raw_sxy() const {
    return sxy + y_offset * sx + sy * x_offset + n * y_offset * x_offset;
}

double SufficientStats::raw_syy() const {
    return syy + 2.0 * y_offset * sy + n * y_offset * y_offset;
}

CellTable::CellTable(const Dataset& ds, const QuantileGrid& grid)
    : grid_(grid), d_(ds.d()), n_(ds.n()), block_(block_size(ds.d())) {
    if (grid.dims() != d_) throw ConfigError("grid dimension does not match dataset");
    x_offset_ = ds.x.colwise().mean();
    y_offset_ = ds.y.mean();

    cells_.resize(static_cast<std::size_t>(d_));
    stride_.resize(static_cast<std::size_t>(d_));
    long total = 1;
    for (int j = d_ - 1; j >= 0; --j) {
        cells_[static_cast<std::size_t>(j)] = grid.size(j) + 1;
        stride_[static_cast<std::size_t>(j)] = total;
        total *= cells_[static_cast<std::size_t>(j)];
    }
    data_.assign(static_cast<std::size_t>(total) * static_cast<std::size_t>(block_), 0.0);
    std::vector<double> comp(data_.size(), 0.0);  // Kahan compensation, build only

    std::vector<double> cx(static_cast<std::size_t>(d_));
    std::vector<double> m(static_cast<std::size_t>(block_));
    for (long i = 0; i < n_; ++i) {
        long cell = 0;
        for (int j = 0; j < d_; ++j) {
            cell += stride_[static_cast<std::size_t>(j)] * grid_.cell_of(j, ds.x(i, j));
            cx[static_cast<std::size_t>(j)] = ds.x(i, j) - x_offset_(j);
        }
        const double cy = ds.y(i) - y_offset_;
        int p = 0;
        m[static_cast<std::size_t>(p++)] = 1.0;
        for (int j = 0; j < d_; ++j) m[static_cast<std::size_t>(p++)] = cx[static_cast<std::size_t>(j)];
        for (int j = 0; j < d_; ++j)
            for (int k = j; k < d_; ++k) m[static_cast<std::size_t>(p++)] = cx[static_cast<std::size_t>(j)] * cx[static_cast<std::size_t>(k)];
        m[static_cast<std::size_t>(p++)] = cy;
        for (int j = 0; j < d_; ++j) m[static_cast<std::size_t>(p++)] = cx[static_cast<std::size_t>(j)] * cy;
        m[static_cast<std::size_t>(p++)] = cy * cy;

        double* blk = &data_[static_cast<std::size_t>(cell) * static_cast<std::size_t>(block_)];
        double* c = &comp[static_cast<std::size_t>(cell) * static_cast<std::size_t>(block_)];
        for (int k = 0; k < block_; ++k) {
            const double t = m[static_cast<std::size_t>(k)] - c[k];
            const double s = blk[k] + t;
            c[k] = (s - blk[k]) - t;
            blk[k] = s;
        }
    }

    // cumulative sums along every axis
    for (int axis = 0; axis < d_; ++axis) {
        const long stride = stride_[static_cast<std::size_t>(axis)] * static_cast<long>(block_);
        const long count = cells_[static_cast<std::size_t>(axis)];
        const long total_blocks = static_cast<long>(data_.size()) / block_;
        for (long cell = 0; cell < total_blocks; ++cell) {
            const long pos = (cell / stride_[static_cast<std::size_t>(axis)]) % count;
            if (pos == 0) continue;
            double* cur = &data_[static_cast<std::size_t>(cell) * static_cast<std::size_t>(block_)];
            const double* prev = cur - stride;
            for (int k = 0; k < block_; ++k) cur[k] += prev[k];
        }
    }
}

void CellTable::corner_bounds(const Region& r, const std::vector<bool>& restricted,
                              std::vector<int>& lo, std::vector<int>& hi) const {
    lo.resize(static_cast<std::size_t>(d_));
    hi.resize(static_cast<std::size_t>(d_));
    for (int j = 0; j < d_; ++j) {
        if (restricted[static_cast<std::size_t>(j)]) {
            lo[static_cast<std::size_t>(j)] = r.lo[static_cast<std::size_t>(j)];
            hi[static_cast<std::size_t>(j)] = r.hi[static_cast<std::size_t>(j)];
            if (hi[static_cast<std::size_t>(j)] >= grid_.size(j) || lo[static_cast<std::size_t>(j)] < 0)
                throw ConfigError("region index out of grid bounds");
        } else {
            lo[static_cast<std::size_t>(j)] = -1;
            hi[static_cast<std::size_t>(j)] = cells_[static_cast<std::size_t>(j)] - 1;
        }
    }
}

SufficientStats CellTable::query(const Region& r, const std::vector<bool>& restricted) const {
    std::vector<int> lo, hi;
    corner_bounds(r, restricted, lo, hi);

    std::vector<double> acc(static_cast<std::size_t>(block_), 0.0);
    const int corners = 1 << d_;
    for (int mask = 0; mask < corners; ++mask) {
        long cell = 0;
        bool null_corner = false;
        int sign = +1;
        for (int j = 0; j < d_; ++j) {
            const int idx = (mask & (1 << j)) ? lo[static_cast<std::size_t>(j)] : hi[static_cast<std::size_t>(j)];
            if (mask & (1 << j)) sign = -sign;
            if (idx < 0) {
                null_corner = true;
                break;
            }
            cell += stride_[static_cast<std::size_t>(j)] * idx;
        }
        if (null_corner) continue;
        const double* blk = &data_[static_cast<std::size_t>(cell) * static_cast<std::size_t>(block_)];
        for (int k = 0; k < block_; ++k) acc[static_cast<std::size_t>(k)] += sign * blk[k];
    }

    SufficientStats s;
    s.x_offset = x_offset_;
    s.y_offset = y_offset_;
    int p = 0;
    s.n = std::round(acc[static_cast<std::size_t>(p++)]);
    s.sx.resize(d_);
    for (int j = 0; j < d_; ++j) s.sx(j) = acc[static_cast<std::size_t>(p++)];
    s.sxx.resize(d_, d_);
    for (int j = 0; j < d_; ++j)
        for (int k = j; k < d_; ++k) {
            s.sxx(j, k) = acc[static_cast<std::size_t>(p++)];
            s.sxx(k, j) = s.sxx(j, k);
        }
    s.sy = acc[static_cast<std::size_t>(p++)];
    s.sxy.resize(d_);
    for (int j = 0; j < d_; ++j) s.sxy(j) = acc[static_cast<std::size_t>(p++)];
    s.syy = acc[static_cast<std::size_t>(p++)];
    if (s.n < 0) s.n = 0;
    return s;
}

SufficientStats CellTable::query(const Region& r) const {
    return query(r, std::vector<bool>(static_cast<std::size_t>(d_), true));
}

long CellTable::count(const Region& r, const std::vector<bool>& restricted) const {
    std::vector<int> lo, hi;
    corner_bounds(r, restricted, lo, hi);
    double acc = 0.0;
    const int corners = 1 << d_;
    for (int mask = 0; mask < corners; ++mask) {
        long cell = 0;
        bool null_corner = false;
        int sign = +1;
        for (int j = 0; j < d_; ++j) {
            const int idx = (mask & (1 << j)) ? lo[static_cast<std::size_t>(j)] : hi[static_cast<std::size_t>(j)];
            if (mask & (1 << j)) sign = -sign;
            if (idx < 0) {
                null_corner = true;
                break;
            }
            cell += stride_[static_cast<std::size_t>(j)] * idx;
        }
        if (null_corner) continue;
        acc += sign * data_[static_cast<std::size_t>(cell) * static_cast<std::size_t>(block_)];
    }
    const long c = static_cast<long>(std::llround(acc));
    return c < 0 ? 0 : c;
}

long CellTable::count(const Region& r) const {
    return count(r, std::vector<bool>(static_cast<std::size_t>(d_), true));
}

SufficientStats row_scan_stats(const Dataset& ds, const QuantileGrid& grid, const Region& r,
                               const Eigen::VectorXd& x_offset, double y_offset) {
    const int d = ds.d();
    SufficientStats s;
    s.x_offset = x_offset;
    s.y_offset = y_offset;
    s.sx = Eigen::VectorXd::Zero(d);
    s.sxx = Eigen::MatrixXd::Zero(d, d);
    s.sxy = Eigen::VectorXd::Zero(d);
    for (long i = 0; i < ds.n(); ++i) {
        if (!r.contains_row(grid, ds.x, i)) continue;
        const Eigen::VectorXd cx = ds.x.row(i).transpose() - x_offset;
        const double cy = ds.y(i) - y_offset;
        s.n += 1;
        s.sx += cx;
        s.sxx += cx * cx.transpose();
        s.sy += cy;
        s.sxy += cy * cx;
        s.syy += cy * cy;
    }
    return s;
}

SufficientStats stats_from_rows(const Dataset& ds, const std::vector<long>& rows) {
    const int d = ds.d();
    SufficientStats s;
    s.x_offset = Eigen::VectorXd::Zero(d);
    s.y_offset = 0.0;
    if (!rows.empty()) {
        for (long i : rows) {
            s.x_offset += ds.x.row(i).transpose();
            s.y_offset += ds.y(i);
        }
        s.x_offset /= static_cast<double>(rows.size());
        s.y_offset /= static_cast<double>(rows.size());
    }
    s.sx = Eigen::VectorXd::Zero(d);
    s.sxx = Eigen::MatrixXd::Zero(d, d);
    s.sxy = Eigen::VectorXd::Zero(d);
    for (long i : rows) {
        const Eigen::VectorXd cx = ds.x.row(i).transpose() - s.x_offset;
        const double cy = ds.y(i) - s.y_offset;
        s.n += 1;
        s.sx += cx;
        s.sxx += cx * cx.transpose();
        s.sy += cy;
        s.sxy += cy * cx;
        s.syy += cy * cy;
    }
    return s;
}

long default_min_points(int d) { return std::max<long>(d + 2, 10); }

EnumerationResult enumerate_regions(const QuantileGrid& grid, long min_points,
                                    const CellTable& table) {
    const int d = grid.dims();
    const std::vector<std::vector<int>> points = interior_points(grid);
    const long p = static_cast<long>(points.size());

    EnumerationResult out;
    out.pairs = p * (p - 1) / 2;

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(out.pairs));
    auto key_of = [&](const Region& r) {
        std::uint64_t key = 1469598103934665603ULL;
        for (int j = 0; j < d; ++j) {
            key = (key ^ static_cast<std::uint64_t>(r.lo[static_cast<std::size_t>(j)])) * 1099511628211ULL;
            key = (key ^ static_cast<std::uint64_t>(r.hi[static_cast<std::size_t>(j)])) * 1099511628211ULL;
        }
        return key;
    };

    Region r;
    r.lo.resize(static_cast<std::size_t>(d));
    r.hi.resize(static_cast<std::size_t>(d));
    for (std::size_t a = 0; a < points.size(); ++a) {
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            for (int j = 0; j < d; ++j) {
                r.lo[static_cast<std::size_t>(j)] = std::min(points[a][static_cast<std::size_t>(j)], points[b][static_cast<std::size_t>(j)]);
                r.hi[static_cast<std::size_t>(j)] = std::max(points[a][static_cast<std::size_t>(j)], points[b][static_cast<std::size_t>(j)]);
            }
            if (!seen.insert(key_of(r)).second) continue;
            if (table.count(r) < min_points) continue;
            out.regions.push_back(r);
        }
    }
    std::sort(out.regions.begin(), out.regions.end(), [](const Region& a, const Region& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi < b.hi;
    });
    return out;
}

}  // namespace effiscan
