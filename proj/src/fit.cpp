#include "effiscan/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "effiscan/errors.hpp"

namespace effiscan {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kS2FloorScale = 1e-12;
constexpr double kLeverageTol = 1e-12;

// Cholesky with diagonal pivoting on a symmetric PSD matrix. rank < p marks
// the system as deficient at relative tolerance kRankTol * max diagonal.
class PivotedCholesky {
public:
    explicit PivotedCholesky(Eigen::MatrixXd a) : l_(std::move(a)) {
        const int p = static_cast<int>(l_.rows());
        perm_.resize(p);
        for (int i = 0; i < p; ++i) perm_[static_cast<std::size_t>(i)] = i;
        const double tol = kRankTol * std::max(l_.diagonal().maxCoeff(), 0.0);
        rank_ = 0;
        for (int k = 0; k < p; ++k) {
            int pivot = k;
            for (int i = k + 1; i < p; ++i)
                if (l_(i, i) > l_(pivot, pivot)) pivot = i;
            if (l_(pivot, pivot) <= tol) break;
            if (pivot != k) {
                l_.row(k).swap(l_.row(pivot));
                l_.col(k).swap(l_.col(pivot));
                std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(pivot)]);
            }
            const double root = std::sqrt(l_(k, k));
            l_(k, k) = root;
            for (int i = k + 1; i < p; ++i) l_(i, k) /= root;
            // keep the trailing block symmetric: later pivot swaps read both
            // triangles
            for (int j = k + 1; j < p; ++j)
                for (int i = j; i < p; ++i) {
                    l_(i, j) -= l_(i, k) * l_(j, k);
                    l_(j, i) = l_(i, j);
                }
            ++rank_;
        }
    }

    int rank() const { return rank_; }
    bool full_rank() const { return rank_ == static_cast<int>(l_.rows()); }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        const int p = static_cast<int>(l_.rows());
        Eigen::VectorXd z(p);
        for (int i = 0; i < p; ++i) z(i) = b(perm_[static_cast<std::size_t>(i)]);
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < i; ++j) z(i) -= l_(i, j) * z(j);
            z(i) /= l_(i, i);
        }
        for (int i = p - 1; i >= 0; --i) {
            for (int j = i + 1; j < p; ++j) z(i) -= l_(j, i) * z(j);
            z(i) /= l_(i, i);
        }
        Eigen::VectorXd x(p);
        for (int i = 0; i < p; ++i) x(perm_[static_cast<std::size_t>(i)]) = z(i);
        return x;
    }

private:
    Eigen::MatrixXd l_;
    std::vector<int> perm_;
    int rank_ = 0;
};

struct GramSystem {
    Eigen::MatrixXd gram;
    Eigen::VectorXd rhs;
};

GramSystem assemble(const SufficientStats& s, const std::vector<int>& subset) {
    const int p = static_cast<int>(subset.size()) + 1;
    GramSystem sys;
    sys.gram.resize(p, p);
    sys.rhs.resize(p);
    sys.gram(0, 0) = s.n;
    sys.rhs(0) = s.sy;
    for (int a = 0; a < p - 1; ++a) {
        const int ja = subset[static_cast<std::size_t>(a)];
        sys.gram(0, a + 1) = s.sx(ja);
        sys.gram(a + 1, 0) = s.sx(ja);
        sys.rhs(a + 1) = s.sxy(ja);
        for (int b = 0; b < p - 1; ++b)
            sys.gram(a + 1, b + 1) = s.sxx(ja, subset[static_cast<std::size_t>(b)]);
    }
    return sys;
}

}  // namespace

FitResult fit_from_stats(const SufficientStats& s, const std::vector<int>& subset,
                         int interest_index) {
    const int p = static_cast<int>(subset.size()) + 1;
    const long n = static_cast<long>(s.n);
    if (n <= p)
        throw DataError("insufficient data for fit: n=" + std::to_string(n) +
                        " <= p=" + std::to_string(p));

    FitResult fit;
    fit.n = n;
    fit.df = n - p;
    fit.var_y = n >= 2 ? (s.syy - s.sy * s.sy / s.n) / (s.n - 1.0) : 0.0;
    if (fit.var_y < 0) fit.var_y = 0;
    for (std::size_t a = 0; a < subset.size(); ++a)
        if (subset[a] == interest_index) fit.interest_pos = static_cast<int>(a) + 1;

    const GramSystem sys = assemble(s, subset);
    const PivotedCholesky chol(sys.gram);
    fit.beta = Eigen::VectorXd::Zero(p);
    fit.se = Eigen::VectorXd::Zero(p);
    fit.t = Eigen::VectorXd::Zero(p);
    fit.gram_inv_diag = Eigen::VectorXd::Zero(p);
    if (!chol.full_rank()) {
        fit.rank_ok = false;
        return fit;
    }
    fit.rank_ok = true;

    const Eigen::VectorXd beta_c = chol.solve(sys.rhs);
    fit.rss = std::max(0.0, s.syy - beta_c.dot(sys.rhs));
    fit.s2 = fit.rss / static_cast<double>(fit.df);

    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
        e(j) = 1.0;
        fit.gram_inv_diag(j) = std::max(0.0, chol.solve(e)(j));
    }

    fit.beta = beta_c;
    // un-center the intercept: beta0_raw = beta0_c + y_off - sum beta_a * x_off
    double shift = s.y_offset;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);
    c(0) = 1.0;
    for (std::size_t a = 0; a < subset.size(); ++a) {
        shift -= beta_c(static_cast<int>(a) + 1) * s.x_offset(subset[a]);
        c(static_cast<int>(a) + 1) = -s.x_offset(subset[a]);
    }
    fit.beta(0) = beta_c(0) + shift;

    for (int j = 0; j < p; ++j) {
        const double inv_jj = j == 0 ? std::max(0.0, c.dot(chol.solve(c))) : fit.gram_inv_diag(j);
        fit.se(j) = std::sqrt(fit.s2 * inv_jj);
        fit.t(j) = fit.se(j) > 0 ? fit.beta(j) / fit.se(j) : 0.0;
    }
    return fit;
}

RowFit fit_rows(const Dataset& ds, const std::vector<long>& rows, const std::vector<int>& subset) {
    const SufficientStats s = stats_from_rows(ds, rows);
    RowFit out;
    out.fit = fit_from_stats(s, subset, ds.interest_index);

    const long m = static_cast<long>(rows.size());
    out.hat = Eigen::VectorXd::Zero(m);
    out.fitted = Eigen::VectorXd::Zero(m);
    out.residual = Eigen::VectorXd::Zero(m);
    if (!out.fit.rank_ok) return out;

    const GramSystem sys = assemble(s, subset);
    const PivotedCholesky chol(sys.gram);
    const int p = static_cast<int>(subset.size()) + 1;
    Eigen::VectorXd xi(p);
    for (long k = 0; k < m; ++k) {
        const long i = rows[static_cast<std::size_t>(k)];
        xi(0) = 1.0;
        double mu = out.fit.beta(0);
        for (std::size_t a = 0; a < subset.size(); ++a) {
            xi(static_cast<int>(a) + 1) = ds.x(i, subset[a]) - s.x_offset(subset[a]);
            mu += out.fit.beta(static_cast<int>(a) + 1) * ds.x(i, subset[a]);
        }
        out.hat(k) = xi.dot(chol.solve(xi));
        out.fitted(k) = mu;
        out.residual(k) = ds.y(i) - mu;
    }
    return out;
}

double ols_t1(const FitResult& fit) {
    if (!fit.rank_ok || fit.df < 1 || fit.interest_pos < 0) return 0.0;
    const double beta1 = fit.beta(fit.interest_pos);
    const double inv11 = fit.gram_inv_diag(fit.interest_pos);
    const double s2 = std::max(fit.s2, kS2FloorScale * fit.var_y);
    if (s2 <= 0.0 || inv11 <= 0.0) return 0.0;
    return beta1 / std::sqrt(s2 * inv11);
}

double h0_noise_t1(const Dataset& ds, const Region& r, const CellTable& table) {
    const int d = ds.d();
    const int interest = ds.interest_index;

    // denominator slice D(h^(-1)): all dims restricted except the interest one
    std::vector<bool> others(static_cast<std::size_t>(d), true);
    others[static_cast<std::size_t>(interest)] = false;
    const SufficientStats sd = table.query(r, others);
    const long n_minus = static_cast<long>(sd.n);
    if (n_minus <= d + 1) return 0.0;

    // full-region fit for beta_1
    const SufficientStats sr = table.query(r);
    std::vector<int> full;
    for (int j = 0; j < d; ++j) full.push_back(j);
    if (static_cast<long>(sr.n) <= d + 1) return 0.0;
    const FitResult fr = fit_from_stats(sr, full, interest);
    if (!fr.rank_ok) return 0.0;
    const double beta1 = fr.beta(fr.interest_pos);

    // s_1: sample SD of the interest covariate within the interest-dim slice
    std::vector<bool> only_interest(static_cast<std::size_t>(d), false);
    only_interest[static_cast<std::size_t>(interest)] = true;
    const SufficientStats s1 = table.query(r, only_interest);
    if (s1.n < 2) return 0.0;
    const double var1 =
        (s1.sxx(interest, interest) - s1.sx(interest) * s1.sx(interest) / s1.n) / (s1.n - 1.0);
    if (var1 <= 0.0) return 0.0;

    // s_e from the fit excluding the interest covariate on D(h^(-1))
    std::vector<int> rest;
    for (int j = 0; j < d; ++j)
        if (j != interest) rest.push_back(j);
    const FitResult fd = fit_from_stats(sd, rest, interest);
    if (!fd.rank_ok) return 0.0;
    const double se2 = std::max(fd.rss / static_cast<double>(n_minus - d),
                                kS2FloorScale * fd.var_y);
    if (se2 <= 0.0) return 0.0;

    return beta1 * std::sqrt(var1) * std::sqrt(static_cast<double>(n_minus)) / std::sqrt(se2);
}

bool loo_gamma_defined(double hat) { return hat < 1.0 - kLeverageTol; }

double loo_gamma_row(double residual, double hat) {
    if (!loo_gamma_defined(hat)) return std::numeric_limits<double>::quiet_NaN();
    const double e = residual / (1.0 - hat);
    return e * e;
}

}  // namespace effiscan
