#pragma once

#include <Eigen/Dense>
#include <vector>

#include "effiscan/cell_table.hpp"
#include "effiscan/dataset.hpp"

namespace effiscan {

/// Local least-squares fit summary. beta(0) is the intercept in raw (not
/// mean-centered) coordinates; beta(1+a) is the slope of subset covariate a.
struct FitResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::VectorXd t;
    Eigen::VectorXd gram_inv_diag;  // diagonal of (X^T X)^{-1}, centered coords
    double rss = 0;
    double s2 = 0;
    long df = 0;
    long n = 0;
    bool rank_ok = false;
    double var_y = 0;      // sample variance of y within the fitted subset
    int interest_pos = -1;  // index into beta of the interest slope, -1 if absent
};

// Solves the normal equations from sufficient statistics for the model with
// intercept plus the listed covariates. Rank deficiency (pivoted Cholesky,
// relative pivot tolerance 1e-10) yields rank_ok=false, not an error.
FitResult fit_from_stats(const SufficientStats& s, const std::vector<int>& subset,
                         int interest_index);

struct RowFit {
    FitResult fit;
    Eigen::VectorXd hat;       // leverage per row, in `rows` order
    Eigen::VectorXd fitted;    // mu_hat(x_i)
    Eigen::VectorXd residual;  // y_i - mu_hat(x_i)
};

RowFit fit_rows(const Dataset& ds, const std::vector<long>& rows, const std::vector<int>& subset);

// t-statistic of the interest slope. A degenerate exact fit keeps a large
// finite t through the s2 floor of 1e-12 * var_y.
double ols_t1(const FitResult& fit);

// The efficacy-calibrated statistic: beta_1 from the full fit on r, s_1 from
// the interest-dimension slice, s_e from the fit without the interest
// covariate on the complementary slice. Returns 0 whenever any ingredient is
// undefined (the "otherwise" branch).
double h0_noise_t1(const Dataset& ds, const Region& r, const CellTable& table);

// Hat-formula leave-one-out squared prediction error. Rows at leverage 1
// have no defined LOO error; the sentinel is NaN.
double loo_gamma_row(double residual, double hat);

bool loo_gamma_defined(double hat);

}  // namespace effiscan
