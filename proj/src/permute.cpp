#include "effiscan/permute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "effiscan/errors.hpp"
#include "effiscan/parallel.hpp"
#include "effiscan/rng.hpp"

namespace effiscan {
namespace {

double signed_value(double t, Sided sided) {
    switch (sided) {
        case Sided::Two: return std::fabs(t);
        case Sided::Right: return t;
        case Sided::Left: return -t;
    }
    return 0.0;
}

// Max of the sided criterion over the given regions; 0 when none is fittable.
// The occupancy threshold is applied to the data at hand, so permuted
// replicates play by the same rule as the observed sample.
double region_max(const Dataset& ds, const CellTable& table, const std::vector<Region>& regions,
                  const std::vector<int>& ids, Criterion criterion, Sided sided, long min_points) {
    const int d = ds.d();
    std::vector<int> full;
    for (int j = 0; j < d; ++j) full.push_back(j);
    bool any = false;
    double best = 0.0;
    for (int id : ids) {
        const Region& r = regions[static_cast<std::size_t>(id)];
        double t = 0;
        if (criterion == Criterion::H0NoiseT1) {
            if (table.count(r) < min_points) continue;
            t = h0_noise_t1(ds, r, table);
        } else {
            const SufficientStats s = table.query(r);
            if (static_cast<long>(s.n) < min_points) continue;
            const FitResult fit = fit_from_stats(s, full, ds.interest_index);
            if (!fit.rank_ok) continue;
            t = ols_t1(fit);
        }
        const double v = signed_value(t, sided);
        if (!any || v > best) {
            best = v;
            any = true;
        }
    }
    return any ? best : 0.0;
}

double aggregate(const std::vector<double>& values, Norm norm) {
    switch (norm) {
        case Norm::Sum: return std::accumulate(values.begin(), values.end(), 0.0);
        case Norm::SumSq: {
            double s = 0;
            for (double v : values) s += v * v;
            return s;
        }
        case Norm::Max: {
            double m = values.empty() ? 0.0 : values.front();
            for (double v : values) m = std::max(m, v);
            return m;
        }
    }
    return 0.0;
}

double critical_quantile(std::vector<double> replicates, double alpha) {
    std::sort(replicates.begin(), replicates.end());
    const long B = static_cast<long>(replicates.size());
    long k = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(B)));
    k = std::clamp<long>(k, 1, B);
    return replicates[static_cast<std::size_t>(k - 1)];
}

PermutationResult run_test(const Dataset& ds, const CellTable& table,
                           const std::vector<Region>& regions,
                           const std::vector<std::vector<int>>& eval_points, Norm norm,
                           const PermutationOptions& opts) {
    if (opts.B < 19) throw ConfigError("permutation B must be >= 19");
    if (!(opts.alpha > 0 && opts.alpha < 1)) throw ConfigError("alpha must be in (0,1)");
    const long min_points =
        opts.min_points >= 0 ? std::max<long>(opts.min_points, ds.d() + 2)
                             : std::max<long>(ds.d() + 2, 10);

    // regions containing each evaluation point, precomputed once
    std::vector<std::vector<int>> containing(eval_points.size());
    for (std::size_t g = 0; g < eval_points.size(); ++g)
        for (std::size_t i = 0; i < regions.size(); ++i)
            if (regions[i].contains_point(eval_points[g]))
                containing[g].push_back(static_cast<int>(i));

    auto statistic = [&](const Dataset& data, const CellTable& tab) {
        std::vector<double> per_point(eval_points.size());
        for (std::size_t g = 0; g < eval_points.size(); ++g)
            per_point[g] = region_max(data, tab, regions, containing[g], opts.criterion, opts.sided,
                                      min_points);
        return aggregate(per_point, norm);
    };

    PermutationResult out;
    out.seed = opts.seed;
    out.observed = statistic(ds, table);
    out.replicates.resize(static_cast<std::size_t>(opts.B));

    const long n = ds.n();
    parallel_for(static_cast<std::size_t>(opts.B), [&](std::size_t b) {
        std::mt19937_64 rng = substream(opts.seed, b);
        std::vector<long> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Dataset shuffled = ds;
        for (long i = 0; i < n; ++i)
            shuffled.x(i, ds.interest_index) = ds.x(perm[static_cast<std::size_t>(i)], ds.interest_index);
        const CellTable tab(shuffled, table.grid());
        out.replicates[b] = statistic(shuffled, tab);
    });

    long at_least = 0;
    for (double v : out.replicates)
        if (v >= out.observed) ++at_least;
    out.pvalue = static_cast<double>(1 + at_least) / static_cast<double>(opts.B + 1);
    out.critical = critical_quantile(out.replicates, opts.alpha);
    return out;
}

}  // namespace

PermutationResult pointwise_test(const Dataset& ds, const CellTable& table,
                                 const std::vector<Region>& regions,
                                 const std::vector<int>& x0_index,
                                 const PermutationOptions& opts) {
    return run_test(ds, table, regions, {x0_index}, Norm::Max, opts);
}

PermutationResult global_test(const Dataset& ds, const CellTable& table,
                              const std::vector<Region>& regions,
                              const std::vector<std::vector<int>>& eval_points, Norm norm,
                              const PermutationOptions& opts) {
    return run_test(ds, table, regions, eval_points, norm, opts);
}

}  // namespace effiscan
