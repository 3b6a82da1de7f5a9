#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "effiscan/errors.hpp"
#include "effiscan/permute.hpp"
#include "effiscan/simulate.hpp"

using namespace effiscan;

namespace {

struct Fixture {
    Dataset ds;
    QuantileGrid grid;
    CellTable table;
    std::vector<Region> regions;

    explicit Fixture(std::uint64_t seed, long n = 250)
        : ds(gen_simple(seed, {n, 0.02})),
          grid(build_grid(ds, GridSizes{6, 3})),
          table(ds, grid),
          regions(enumerate_regions(grid, default_min_points(ds.d()), table).regions) {}
};

PermutationOptions opts(long B, std::uint64_t seed, Sided sided = Sided::Two) {
    PermutationOptions o;
    o.B = B;
    o.seed = seed;
    o.sided = sided;
    return o;
}

}  // namespace

TEST_CASE("pointwise test is reproducible and thread-count independent") {
    const Fixture fx(1);
    const std::vector<int> x0{3, 1, 1};
    setenv("EFFISCAN_THREADS", "1", 1);
    const PermutationResult a = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(49, 9));
    setenv("EFFISCAN_THREADS", "5", 1);
    const PermutationResult b = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(49, 9));
    unsetenv("EFFISCAN_THREADS");
    CHECK(a.observed == b.observed);
    CHECK(a.replicates == b.replicates);  // bitwise, order included
    CHECK(a.pvalue == b.pvalue);
    CHECK(a.critical == b.critical);

    const PermutationResult c = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(49, 10));
    CHECK(c.replicates != a.replicates);  // different seed, different draws
}

TEST_CASE("p-value and critical value follow their formulas") {
    const Fixture fx(2);
    const std::vector<int> x0{2, 1, 1};
    const PermutationResult r = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(99, 3));
    long at_least = 0;
    for (double v : r.replicates)
        if (v >= r.observed) ++at_least;
    CHECK(r.pvalue == doctest::Approx((1.0 + at_least) / 100.0));
    CHECK(r.pvalue >= 1.0 / 100.0);

    std::vector<double> sorted = r.replicates;
    std::sort(sorted.begin(), sorted.end());
    const long k = static_cast<long>(std::ceil(0.95 * 99.0));
    CHECK(r.critical == sorted[static_cast<std::size_t>(k - 1)]);
}

TEST_CASE("a strong signal at x0 is detected; sidedness flips it") {
    // gen_simple has a sharp positive bump in f1 near x1=0.4 on the rising edge
    const Fixture fx(3, 500);
    // grid point whose interest coordinate sits on the bump's steep rise
    int best = 0;
    double bd = 1e9;
    for (int k = 0; k < fx.grid.size(0); ++k) {
        const double d = std::fabs(fx.grid.cuts[0][static_cast<std::size_t>(k)] - 0.42);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    const std::vector<int> x0{best, 1, 1};
    const PermutationResult two = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(99, 5));
    CHECK(two.pvalue <= 0.05);

    const PermutationResult right =
        pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(99, 5, Sided::Right));
    CHECK(right.pvalue <= 0.05);

    // exact invariant: the two-sided statistic is the larger of the two
    // one-sided ones (|t| max = max of t max and -t max)
    const PermutationResult left =
        pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(99, 5, Sided::Left));
    CHECK(two.observed == doctest::Approx(std::max(right.observed, left.observed)));
    CHECK(right.observed != left.observed);
}

TEST_CASE("global test norms aggregate the pointwise statistics") {
    const Fixture fx(4, 200);
    const auto points = interior_points(fx.grid);
    std::vector<std::vector<int>> few(points.begin(), points.begin() + 12);

    // Max norm over a single point equals the pointwise statistic
    const PermutationResult point =
        pointwise_test(fx.ds, fx.table, fx.regions, few[5], opts(19, 7));
    const PermutationResult single =
        global_test(fx.ds, fx.table, fx.regions, {few[5]}, Norm::Max, opts(19, 7));
    CHECK(point.observed == single.observed);
    CHECK(point.replicates == single.replicates);

    const PermutationResult sum =
        global_test(fx.ds, fx.table, fx.regions, few, Norm::Sum, opts(19, 7));
    const PermutationResult mx =
        global_test(fx.ds, fx.table, fx.regions, few, Norm::Max, opts(19, 7));
    const PermutationResult sq =
        global_test(fx.ds, fx.table, fx.regions, few, Norm::SumSq, opts(19, 7));
    CHECK(sum.observed >= mx.observed);  // sum of nonnegatives dominates max
    CHECK(sq.observed >= mx.observed * mx.observed - 1e-9);
}

TEST_CASE("option validation") {
    const Fixture fx(5, 120);
    const std::vector<int> x0{1, 1, 1};
    PermutationOptions bad = opts(5, 1);
    CHECK_THROWS_AS(pointwise_test(fx.ds, fx.table, fx.regions, x0, bad), ConfigError);
    bad = opts(19, 1);
    bad.alpha = 1.5;
    CHECK_THROWS_AS(pointwise_test(fx.ds, fx.table, fx.regions, x0, bad), ConfigError);
}

TEST_CASE("replicates depend only on (seed, index), not on B") {
    const Fixture fx(6, 150);
    const std::vector<int> x0{2, 1, 1};
    const PermutationResult small = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(19, 42));
    const PermutationResult big = pointwise_test(fx.ds, fx.table, fx.regions, x0, opts(39, 42));
    for (std::size_t b = 0; b < small.replicates.size(); ++b)
        CHECK(small.replicates[b] == big.replicates[b]);
}
