#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "effiscan/dataset.hpp"

namespace effiscan {

// Mean components used throughout the simulation scenarios.
double f1(double x);  // 4x - 2 + 5 exp(-64 (x - 0.5)^2)
double f2(double x);  // 2.5 x exp(1.5 - x)
double f3(double x);  // 3.2 x + 0.4

struct SimpleOptions {
    long n = 1000;
    double sigma2 = 0.02;
};

// Y = f1(X1) + f2(X2) + f3(X3) + eps, X iid U(0,1).
Dataset gen_simple(std::uint64_t seed, const SimpleOptions& opts = {});

enum class DependentCase { NoY3, Y3 };

struct DependentOptions {
    long n = 1000;
    double sigma2 = 0.02;
    // SD of the (X1, X3) bivariate normal pair; 1.0 is the published value,
    // overridable in case it was meant to read 0.1.
    double sd = 1.0;
};

// (X1, X3) bivariate normal, mean 0.5, correlation sqrt(0.5); X2 ~ U(0,1).
// NoY3: Y = f1(X1) + f2(X2) + eps. Y3: Y = f2(X2) + f3(X3) + eps.
Dataset gen_dependent(DependentCase which, std::uint64_t seed, const DependentOptions& opts = {});

enum class BumpShape {
    Asymmetric,  // (1+s)(1-s^2): first moment 4/15, nonzero
    Symmetric,   // (1-s^2): first moment 0
};

double bump(BumpShape shape, double s);  // supported on [-1, 1]

struct ShrinkScenario {
    long n = 1000;
    std::vector<double> theta;  // per-dimension support half-widths, > 0
    std::vector<double> gamma;  // per-dimension amplitudes
    std::vector<double> x0;     // bump centers
    double a = 0;
    double sigma2 = 0.02;
    BumpShape shape = BumpShape::Asymmetric;

    int d() const { return static_cast<int>(theta.size()); }
};

// Y = a + sum_j gamma_j W((X_j - x0_j) / theta_j) + eps, X iid U(0,1)^d.
// Warns on stderr when a bump sticks out of [0,1].
Dataset gen_shrinking(const ShrinkScenario& scenario, std::uint64_t seed);

enum class VolumeMode {
    Conditional,    // V(h^(-1)) from the actual clipped neighborhood
    SmallBandwidth  // replaced by 2^(d-1) prod h_j
};

// Population efficacy n^{-1/2} EFF_1 for the shrinking-support scenario with
// independent uniform covariates, by deterministic adaptive quadrature
// (tolerance 1e-9). h_rest holds the fixed bandwidths of dimensions 2..d.
std::vector<double> population_efficacy(const ShrinkScenario& scenario,
                                        const std::vector<double>& h1_values,
                                        const std::vector<double>& h_rest,
                                        VolumeMode mode = VolumeMode::Conditional);

// Adaptive Simpson integration, exposed for oracle use in tests.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-9);

}  // namespace effiscan
