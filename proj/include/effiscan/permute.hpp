#pragma once

#include <cstdint>
#include <vector>

#include "effiscan/scan.hpp"

namespace effiscan {

enum class Sided { Two, Left, Right };
enum class Norm { Sum, SumSq, Max };

struct PermutationOptions {
    long B = 199;
    double alpha = 0.05;
    Sided sided = Sided::Two;
    std::uint64_t seed = 0;
    Criterion criterion = Criterion::OlsT1;
    // Occupancy a region must reach, recomputed per replicate so the observed
    // data and the permuted replicates face the same rule (-1: max(d+2, 10)).
    // Pass the full deduplicated box list, not an occupancy-filtered one, to
    // keep the statistic a symmetric function of the rows.
    long min_points = -1;
};

struct PermutationResult {
    double observed = 0;
    std::vector<double> replicates;  // index order = substream order
    double critical = 0;  // empirical (1-alpha) quantile of the replicates
    double pvalue = 1;    // (1 + #{replicate >= observed}) / (B + 1)
    std::uint64_t seed = 0;
};

// Max over regions containing x0 of |t| (two-sided) or signed t. Each
// replicate permutes only the interest covariate column and rebuilds the
// cell table; the grid and region set stay fixed.
PermutationResult pointwise_test(const Dataset& ds, const CellTable& table,
                                 const std::vector<Region>& regions,
                                 const std::vector<int>& x0_index,
                                 const PermutationOptions& opts);

// Pointwise statistic at every evaluation grid point, aggregated by the norm.
PermutationResult global_test(const Dataset& ds, const CellTable& table,
                              const std::vector<Region>& regions,
                              const std::vector<std::vector<int>>& eval_points, Norm norm,
                              const PermutationOptions& opts);

}  // namespace effiscan
