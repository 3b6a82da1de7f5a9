#include "effiscan/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "effiscan/errors.hpp"
#include "effiscan/rng.hpp"

namespace effiscan {

double f1(double x) { return 4.0 * x - 2.0 + 5.0 * std::exp(-64.0 * (x - 0.5) * (x - 0.5)); }
double f2(double x) { return 2.5 * x * std::exp(1.5 - x); }
double f3(double x) { return 3.2 * x + 0.4; }

namespace {

Dataset assemble(Eigen::MatrixXd x, Eigen::VectorXd y, int d) {
    Dataset ds;
    ds.x = std::move(x);
    ds.y = std::move(y);
    for (int j = 0; j < d; ++j) ds.names.push_back("x" + std::to_string(j + 1));
    ds.response_name = "y";
    ds.interest_index = 0;
    validate(ds);
    return ds;
}

}  // namespace

Dataset gen_simple(std::uint64_t seed, const SimpleOptions& opts) {
    std::mt19937_64 rng = substream(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(opts.sigma2));
    Eigen::MatrixXd x(opts.n, 3);
    Eigen::VectorXd y(opts.n);
    for (long i = 0; i < opts.n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = unif(rng);
        y(i) = f1(x(i, 0)) + f2(x(i, 1)) + f3(x(i, 2)) + noise(rng);
    }
    return assemble(std::move(x), std::move(y), 3);
}

Dataset gen_dependent(DependentCase which, std::uint64_t seed, const DependentOptions& opts) {
    std::mt19937_64 rng = substream(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(opts.sigma2));
    const double rho = std::sqrt(0.5);
    const double resid = std::sqrt(1.0 - rho * rho);
    Eigen::MatrixXd x(opts.n, 3);
    Eigen::VectorXd y(opts.n);
    for (long i = 0; i < opts.n; ++i) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        x(i, 0) = 0.5 + opts.sd * z1;
        x(i, 1) = unif(rng);
        x(i, 2) = 0.5 + opts.sd * (rho * z1 + resid * z2);
        const double mean = which == DependentCase::NoY3 ? f1(x(i, 0)) + f2(x(i, 1))
                                                         : f2(x(i, 1)) + f3(x(i, 2));
        y(i) = mean + noise(rng);
    }
    return assemble(std::move(x), std::move(y), 3);
}

double bump(BumpShape shape, double s) {
    if (s < -1.0 || s > 1.0) return 0.0;
    const double base = 1.0 - s * s;
    return shape == BumpShape::Asymmetric ? (1.0 + s) * base : base;
}

Dataset gen_shrinking(const ShrinkScenario& sc, std::uint64_t seed) {
    const int d = sc.d();
    if (d < 1 || static_cast<int>(sc.gamma.size()) != d || static_cast<int>(sc.x0.size()) != d)
        throw ConfigError("shrinking scenario parameter sizes disagree");
    for (double th : sc.theta)
        if (!(th > 0)) throw ConfigError("theta must be positive");
    if (!(sc.sigma2 > 0)) throw ConfigError("sigma2 must be positive");
    for (int j = 0; j < d; ++j) {
        if (sc.x0[static_cast<std::size_t>(j)] - sc.theta[static_cast<std::size_t>(j)] < 0.0 ||
            sc.x0[static_cast<std::size_t>(j)] + sc.theta[static_cast<std::size_t>(j)] > 1.0) {
            std::cerr << "warning: bump in dimension " << j + 1
                      << " is truncated by the covariate support [0,1]\n";
        }
    }

    std::mt19937_64 rng = substream(seed, 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, std::sqrt(sc.sigma2));
    Eigen::MatrixXd x(sc.n, d);
    Eigen::VectorXd y(sc.n);
    for (long i = 0; i < sc.n; ++i) {
        double mean = sc.a;
        for (int j = 0; j < d; ++j) {
            x(i, j) = unif(rng);
            mean += sc.gamma[static_cast<std::size_t>(j)] *
                    bump(sc.shape, (x(i, j) - sc.x0[static_cast<std::size_t>(j)]) /
                                       sc.theta[static_cast<std::size_t>(j)]);
        }
        y(i) = mean + noise(rng);
    }
    return assemble(std::move(x), std::move(y), d);
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw NumericError("adaptive quadrature failed to converge");
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a >= b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

namespace {

// Splits the integration range at the bump support edges so the kinks of W
// do not stall the adaptive rule.
double integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                           double edge_lo, double edge_hi) {
    std::vector<double> knots{lo, hi};
    if (edge_lo > lo && edge_lo < hi) knots.push_back(edge_lo);
    if (edge_hi > lo && edge_hi < hi) knots.push_back(edge_hi);
    std::sort(knots.begin(), knots.end());
    double total = 0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        total += integrate(f, knots[k], knots[k + 1]);
    return total;
}

struct DimMoments {
    double len = 0;
    double var_x = 0;
    double cov_xw = 0;
    double var_w = 0;
};

DimMoments dim_moments(const ShrinkScenario& sc, int j, double h_j) {
    const double x0 = sc.x0[static_cast<std::size_t>(j)];
    const double th = sc.theta[static_cast<std::size_t>(j)];
    const double lo = std::max(0.0, x0 - h_j);
    const double hi = std::min(1.0, x0 + h_j);
    DimMoments m;
    m.len = hi - lo;
    if (!(m.len > 0)) throw ConfigError("empty neighborhood in dimension " + std::to_string(j + 1));
    const double inv_len = 1.0 / m.len;
    auto w = [&](double x) { return bump(sc.shape, (x - x0) / th); };

    const double ex = integrate([&](double x) { return x * inv_len; }, lo, hi);
    const double ex2 = integrate([&](double x) { return x * x * inv_len; }, lo, hi);
    const double ew =
        integrate_piecewise([&](double x) { return w(x) * inv_len; }, lo, hi, x0 - th, x0 + th);
    const double exw = integrate_piecewise([&](double x) { return x * w(x) * inv_len; }, lo, hi,
                                           x0 - th, x0 + th);
    const double ew2 = integrate_piecewise([&](double x) { return w(x) * w(x) * inv_len; }, lo, hi,
                                           x0 - th, x0 + th);
    m.var_x = ex2 - ex * ex;
    m.cov_xw = exw - ex * ew;
    m.var_w = ew2 - ew * ew;
    return m;
}

}  // namespace

std::vector<double> population_efficacy(const ShrinkScenario& sc,
                                        const std::vector<double>& h1_values,
                                        const std::vector<double>& h_rest, VolumeMode mode) {
    const int d = sc.d();
    if (static_cast<int>(h_rest.size()) != d - 1)
        throw ConfigError("h_rest must have d-1 entries");

    // the non-interest dimensions do not depend on h1; compute them once
    std::vector<DimMoments> rest(static_cast<std::size_t>(d - 1));
    double sigma_l2 = 0;
    double v_rest = 1;
    for (int j = 1; j < d; ++j) {
        rest[static_cast<std::size_t>(j - 1)] = dim_moments(sc, j, h_rest[static_cast<std::size_t>(j - 1)]);
        const DimMoments& m = rest[static_cast<std::size_t>(j - 1)];
        const double g = sc.gamma[static_cast<std::size_t>(j)];
        sigma_l2 += g * g * std::max(0.0, m.var_w - m.cov_xw * m.cov_xw / m.var_x);
        v_rest *= m.len;
    }
    if (mode == VolumeMode::SmallBandwidth) {
        v_rest = std::pow(2.0, d - 1);
        for (double h : h_rest) v_rest *= h;
    }
    const double sigma_e2 = sc.sigma2 + sigma_l2;

    std::vector<double> eff;
    eff.reserve(h1_values.size());
    for (double h1 : h1_values) {
        const DimMoments m1 = dim_moments(sc, 0, h1);
        const double beta1 = sc.gamma[0] * m1.cov_xw / m1.var_x;
        const double volume = m1.len * v_rest;
        eff.push_back(beta1 * std::sqrt(volume * m1.var_x / sigma_e2));
    }
    return eff;
}

}  // namespace effiscan
