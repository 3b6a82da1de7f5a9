#include <doctest.h>

#include <cmath>
#include <random>

#include "effiscan/errors.hpp"
#include "effiscan/simulate.hpp"

using namespace effiscan;

TEST_CASE("mean component spot values") {
    CHECK(f1(0.5) == doctest::Approx(0.0 + 5.0));  // 4*0.5-2 + 5*e^0
    CHECK(f1(0.0) == doctest::Approx(-2.0 + 5.0 * std::exp(-16.0)));
    CHECK(f2(0.0) == 0.0);
    CHECK(f2(1.5) == doctest::Approx(2.5 * 1.5));  // exp term cancels at x=1.5
    CHECK(f3(0.0) == doctest::Approx(0.4));
    CHECK(f3(1.0) == doctest::Approx(3.6));
}

TEST_CASE("gen_simple: shape, support, and mean structure") {
    const Dataset ds = gen_simple(5, {2000, 0.02});
    CHECK(ds.n() == 2000);
    CHECK(ds.d() == 3);
    CHECK(ds.interest_index == 0);
    CHECK(ds.x.minCoeff() >= 0.0);
    CHECK(ds.x.maxCoeff() <= 1.0);
    // residual variance around the true mean should be close to sigma^2
    double ss = 0;
    for (long i = 0; i < ds.n(); ++i) {
        const double r = ds.y(i) - f1(ds.x(i, 0)) - f2(ds.x(i, 1)) - f3(ds.x(i, 2));
        ss += r * r;
    }
    CHECK(ss / static_cast<double>(ds.n()) == doctest::Approx(0.02).epsilon(0.15));

    const Dataset again = gen_simple(5, {2000, 0.02});
    CHECK(again.x == ds.x);
    CHECK(again.y == ds.y);
    const Dataset other = gen_simple(6, {2000, 0.02});
    CHECK(other.y != ds.y);
}

TEST_CASE("gen_dependent: correlation and the two mean structures") {
    const DependentOptions o{4000, 0.02, 1.0};
    const Dataset ds = gen_dependent(DependentCase::NoY3, 9, o);
    // sample correlation of (x1, x3) should approach sqrt(0.5)
    const auto c = [&](int a, int b) {
        const double ma = ds.x.col(a).mean(), mb = ds.x.col(b).mean();
        double num = 0, va = 0, vb = 0;
        for (long i = 0; i < ds.n(); ++i) {
            num += (ds.x(i, a) - ma) * (ds.x(i, b) - mb);
            va += (ds.x(i, a) - ma) * (ds.x(i, a) - ma);
            vb += (ds.x(i, b) - mb) * (ds.x(i, b) - mb);
        }
        return num / std::sqrt(va * vb);
    };
    CHECK(c(0, 2) == doctest::Approx(std::sqrt(0.5)).epsilon(0.1));
    CHECK(std::fabs(c(0, 1)) < 0.08);
    CHECK(ds.x.col(0).mean() == doctest::Approx(0.5).epsilon(0.2));

    // residuals against the declared means
    double ss = 0;
    for (long i = 0; i < ds.n(); ++i) {
        const double r = ds.y(i) - f1(ds.x(i, 0)) - f2(ds.x(i, 1));
        ss += r * r;
    }
    CHECK(ss / static_cast<double>(ds.n()) == doctest::Approx(0.02).epsilon(0.15));

    const Dataset y3 = gen_dependent(DependentCase::Y3, 9, o);
    ss = 0;
    for (long i = 0; i < y3.n(); ++i) {
        const double r = y3.y(i) - f2(y3.x(i, 1)) - f3(y3.x(i, 2));
        ss += r * r;
    }
    CHECK(ss / static_cast<double>(y3.n()) == doctest::Approx(0.02).epsilon(0.15));
}

TEST_CASE("bump shapes, support, and first moments") {
    CHECK(bump(BumpShape::Asymmetric, -1.5) == 0.0);
    CHECK(bump(BumpShape::Asymmetric, 1.5) == 0.0);
    CHECK(bump(BumpShape::Asymmetric, 0.0) == doctest::Approx(1.0));
    CHECK(bump(BumpShape::Asymmetric, 0.5) == doctest::Approx(1.5 * 0.75));
    CHECK(bump(BumpShape::Symmetric, 0.5) == doctest::Approx(0.75));
    CHECK(bump(BumpShape::Symmetric, -0.5) == bump(BumpShape::Symmetric, 0.5));

    // analytic first moments: 4/15 for the asymmetric shape, 0 for symmetric
    const double m1_asym =
        integrate([](double s) { return s * bump(BumpShape::Asymmetric, s); }, -1.0, 1.0);
    CHECK(m1_asym == doctest::Approx(4.0 / 15.0).epsilon(1e-9));
    const double m1_sym =
        integrate([](double s) { return s * bump(BumpShape::Symmetric, s); }, -1.0, 1.0);
    CHECK(m1_sym == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("adaptive quadrature against closed forms") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 2.0) ==
          doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-10));
    CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
}

TEST_CASE("gen_shrinking mean structure and validation") {
    ShrinkScenario sc;
    sc.n = 3000;
    sc.theta = {0.1, 0.2};
    sc.gamma = {2.0, 1.0};
    sc.x0 = {0.5, 0.5};
    sc.a = 0.7;
    sc.sigma2 = 0.01;
    const Dataset ds = gen_shrinking(sc, 11);
    CHECK(ds.d() == 2);
    double ss = 0;
    for (long i = 0; i < ds.n(); ++i) {
        double mu = sc.a;
        for (int j = 0; j < 2; ++j)
            mu += sc.gamma[static_cast<std::size_t>(j)] *
                  bump(sc.shape, (ds.x(i, j) - 0.5) / sc.theta[static_cast<std::size_t>(j)]);
        const double r = ds.y(i) - mu;
        ss += r * r;
    }
    CHECK(ss / static_cast<double>(ds.n()) == doctest::Approx(0.01).epsilon(0.15));

    sc.theta = {0.1};
    CHECK_THROWS_AS(gen_shrinking(sc, 1), ConfigError);  // mismatched sizes
    sc.theta = {0.1, -0.2};
    CHECK_THROWS_AS(gen_shrinking(sc, 1), ConfigError);
}

TEST_CASE("population efficacy agrees with Monte Carlo on a 1-d scenario") {
    ShrinkScenario sc;
    sc.n = 1;
    sc.theta = {0.15};
    sc.gamma = {1.5};
    sc.x0 = {0.5};
    sc.sigma2 = 0.05;
    const double h1 = 0.25;
    const std::vector<double> eff = population_efficacy(sc, {h1}, {});
    REQUIRE(eff.size() == 1);

    // Monte Carlo oracle: slope of the population regression of the bump on
    // X1 restricted to the neighborhood, times sqrt(len * var / sigma2)
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.5 - h1, 0.5 + h1);
    const long m = 400000;
    double sx = 0, sxx = 0, sw = 0, sxw = 0;
    for (long i = 0; i < m; ++i) {
        const double x = unif(rng);
        const double w = sc.gamma[0] * bump(sc.shape, (x - 0.5) / sc.theta[0]);
        sx += x;
        sxx += x * x;
        sw += w;
        sxw += x * w;
    }
    const double varx = sxx / m - (sx / m) * (sx / m);
    const double cov = sxw / m - (sx / m) * (sw / m);
    const double beta1 = cov / varx;
    const double want = beta1 * std::sqrt(2.0 * h1 * varx / sc.sigma2);
    CHECK(eff[0] == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("symmetric bump centered in a symmetric window has zero efficacy") {
    ShrinkScenario sc;
    sc.theta = {0.1};
    sc.gamma = {3.0};
    sc.x0 = {0.5};
    sc.sigma2 = 0.02;
    sc.shape = BumpShape::Symmetric;
    const auto eff = population_efficacy(sc, {0.2, 0.3}, {});
    for (double e : eff) CHECK(std::fabs(e) < 1e-8);
}

TEST_CASE("small-bandwidth volume replaces the clipped product") {
    ShrinkScenario sc;
    sc.theta = {0.1, 0.1};
    sc.gamma = {1.0, 0.5};
    sc.x0 = {0.5, 0.5};
    sc.sigma2 = 0.02;
    // for an interior region the clipped length equals 2h, so the two modes
    // coincide
    const auto a = population_efficacy(sc, {0.2}, {0.15}, VolumeMode::Conditional);
    const auto b = population_efficacy(sc, {0.2}, {0.15}, VolumeMode::SmallBandwidth);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-9));

    CHECK_THROWS_AS(population_efficacy(sc, {0.2}, {}), ConfigError);  // wrong h_rest size
}

TEST_CASE("noise from correlated leftover dimensions inflates sigma_e") {
    // a second dimension with signal raises the effective noise and shrinks
    // the efficacy relative to the signal-free case
    ShrinkScenario with;
    with.theta = {0.1, 0.1};
    with.gamma = {1.0, 2.0};
    with.x0 = {0.5, 0.5};
    with.sigma2 = 0.02;
    ShrinkScenario without = with;
    without.gamma = {1.0, 0.0};
    const auto ew = population_efficacy(with, {0.2}, {0.3});
    const auto eo = population_efficacy(without, {0.2}, {0.3});
    CHECK(std::fabs(ew[0]) < std::fabs(eo[0]));
}
