#include "effiscan/scan.hpp"

#include <algorithm>
#include <cmath>

#include "effiscan/parallel.hpp"

namespace effiscan {

ScanResult scan_all(const Dataset& ds, const CellTable& table,
                    const std::vector<Region>& regions, Criterion criterion) {
    const int d = ds.d();
    std::vector<int> full;
    for (int j = 0; j < d; ++j) full.push_back(j);
    std::vector<bool> others(static_cast<std::size_t>(d), true);
    others[static_cast<std::size_t>(ds.interest_index)] = false;
    const double n_total = static_cast<double>(ds.n());

    std::vector<RegionEval> slots(regions.size());
    std::vector<char> alive(regions.size(), 0);
    parallel_for(regions.size(), [&](std::size_t i) {
        const Region& r = regions[i];
        const SufficientStats s = table.query(r);
        if (static_cast<long>(s.n) <= d + 1) return;
        const FitResult fit = fit_from_stats(s, full, ds.interest_index);
        if (!fit.rank_ok) return;
        RegionEval& e = slots[i];
        e.region_id = static_cast<int>(i);
        e.beta1 = fit.beta(fit.interest_pos);
        e.n_h = fit.n;
        e.coverage = static_cast<double>(table.count(r, others)) / n_total;
        e.t = criterion == Criterion::OlsT1 ? ols_t1(fit) : h0_noise_t1(ds, r, table);
        if (!std::isfinite(e.t)) return;
        alive[i] = 1;
    });

    ScanResult out;
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (alive[i]) out.entries.push_back(slots[i]);
    return out;
}

namespace {

// larger |t|, then larger n_h, then smaller region id
bool beats(const RegionEval& a, const RegionEval& b) {
    const double ta = std::fabs(a.t), tb = std::fabs(b.t);
    if (ta != tb) return ta > tb;
    if (a.n_h != b.n_h) return a.n_h > b.n_h;
    return a.region_id < b.region_id;
}

}  // namespace

std::vector<int> best_region_per_point(const ScanResult& scan, const std::vector<Region>& regions,
                                       const std::vector<std::vector<int>>& points) {
    std::vector<int> mapping(points.size(), kUncovered);
    for (std::size_t p = 0; p < points.size(); ++p) {
        const RegionEval* best = nullptr;
        for (const RegionEval& e : scan.entries) {
            if (!regions[static_cast<std::size_t>(e.region_id)].contains_point(points[p])) continue;
            if (!best || beats(e, *best)) best = &e;
        }
        if (best) mapping[p] = best->region_id;
    }
    return mapping;
}

std::vector<Feature> extract_features(const ScanResult& scan, const std::vector<Region>& regions,
                                      const std::vector<int>& mapping, const Dataset& ds,
                                      const QuantileGrid& grid) {
    std::vector<char> selected(regions.size(), 0);
    for (int id : mapping)
        if (id != kUncovered) selected[static_cast<std::size_t>(id)] = 1;

    std::vector<Feature> features;
    for (const RegionEval& e : scan.entries) {
        if (!selected[static_cast<std::size_t>(e.region_id)]) continue;
        Feature f;
        f.region_id = e.region_id;
        f.region = regions[static_cast<std::size_t>(e.region_id)];
        f.t = e.t;
        f.beta1 = e.beta1;
        f.n_h = e.n_h;
        f.coverage = e.coverage;
        features.push_back(std::move(f));
    }
    std::sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
        const double ta = std::fabs(a.t), tb = std::fabs(b.t);
        if (ta != tb) return ta > tb;
        if (a.n_h != b.n_h) return a.n_h > b.n_h;
        return a.region_id < b.region_id;
    });
    for (std::size_t k = 0; k < features.size(); ++k) {
        features[k].rank = static_cast<int>(k) + 1;
        for (long i = 0; i < ds.n(); ++i)
            if (features[k].region.contains_row(grid, ds.x, i)) features[k].member_rows.push_back(i);
    }
    return features;
}

FeaturePartition partition_features(const std::vector<Feature>& features, const Dataset& ds) {
    FeaturePartition part;
    part.rank_of_row.assign(static_cast<std::size_t>(ds.n()), 0);
    for (const Feature& f : features)
        for (long i : f.member_rows) {
            int& slot = part.rank_of_row[static_cast<std::size_t>(i)];
            if (slot == 0) slot = f.rank;
        }
    return part;
}

}  // namespace effiscan
