#include "effiscan/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "effiscan/errors.hpp"

namespace effiscan {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinEffectiveSample = 5.0;

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double silverman_bandwidth(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

// Column index of each model in the gamma matrix equals its list position.
double mean_finite(const Eigen::MatrixXd& gamma, int col) {
    double sum = 0;
    long count = 0;
    for (long i = 0; i < gamma.rows(); ++i) {
        const double v = gamma(i, col);
        if (std::isfinite(v)) {
            sum += v;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : kNaN;
}

}  // namespace

std::vector<ModelSpec> candidate_models(int d, int interest_index) {
    std::vector<ModelSpec> models;
    models.push_back({0, {}});
    std::vector<int> others;
    for (int j = 0; j < d; ++j)
        if (j != interest_index) others.push_back(j);
    const int combos = 1 << others.size();
    for (int mask = 0; mask < combos; ++mask) {
        ModelSpec m;
        m.id = 1 + mask;
        m.subset.push_back(interest_index);
        for (std::size_t b = 0; b < others.size(); ++b)
            if (mask & (1 << b)) m.subset.push_back(others[b]);
        std::sort(m.subset.begin(), m.subset.end());
        models.push_back(std::move(m));
    }
    return models;
}

GammaTable loo_gamma_all(const Dataset& ds, const std::vector<Feature>& features,
                         const FeaturePartition& partition, const std::vector<ModelSpec>& models) {
    GammaTable out;
    for (long i = 0; i < ds.n(); ++i)
        if (partition.rank_of_row[static_cast<std::size_t>(i)] > 0) out.rows.push_back(i);
    out.gamma.setConstant(static_cast<long>(out.rows.size()), static_cast<long>(models.size()), kNaN);

    std::vector<long> row_slot(static_cast<std::size_t>(ds.n()), -1);
    for (std::size_t k = 0; k < out.rows.size(); ++k)
        row_slot[static_cast<std::size_t>(out.rows[k])] = static_cast<long>(k);

    for (const Feature& f : features) {
        // evaluation set: rows of S_k'; fitting set: all of S_k
        std::vector<long> eval_rows;
        for (long i : f.member_rows)
            if (partition.rank_of_row[static_cast<std::size_t>(i)] == f.rank) eval_rows.push_back(i);
        if (eval_rows.empty()) continue;

        for (std::size_t jm = 0; jm < models.size(); ++jm) {
            const ModelSpec& m = models[jm];
            const long p = static_cast<long>(m.subset.size()) + 1;
            if (static_cast<long>(f.member_rows.size()) < p + 1) continue;
            const RowFit rf = fit_rows(ds, f.member_rows, m.subset);
            if (!rf.fit.rank_ok) continue;
            for (std::size_t k = 0; k < f.member_rows.size(); ++k) {
                const long i = f.member_rows[k];
                if (partition.rank_of_row[static_cast<std::size_t>(i)] != f.rank) continue;
                out.gamma(row_slot[static_cast<std::size_t>(i)], static_cast<long>(jm)) =
                    loo_gamma_row(rf.residual(static_cast<long>(k)), rf.hat(static_cast<long>(k)));
            }
        }
    }
    return out;
}

std::vector<ModelSpec> backward_models(const Dataset& ds, const std::vector<Feature>& features,
                                       const FeaturePartition& partition) {
    const int d = ds.d();
    std::vector<int> current;
    for (int j = 0; j < d; ++j)
        if (j != ds.interest_index) current.push_back(j);

    std::vector<ModelSpec> path;
    int next_id = 1;
    auto push_model = [&](const std::vector<int>& others) {
        ModelSpec m;
        m.id = next_id++;
        m.subset.push_back(ds.interest_index);
        for (int j : others) m.subset.push_back(j);
        std::sort(m.subset.begin(), m.subset.end());
        path.push_back(std::move(m));
    };

    push_model(current);
    while (!current.empty()) {
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_drop = 0;
        for (std::size_t drop = 0; drop < current.size(); ++drop) {
            std::vector<int> trial = current;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(drop));
            ModelSpec m;
            m.subset.push_back(ds.interest_index);
            for (int j : trial) m.subset.push_back(j);
            std::sort(m.subset.begin(), m.subset.end());
            const GammaTable g = loo_gamma_all(ds, features, partition, {m});
            const double score = mean_finite(g.gamma, 0);
            if (std::isfinite(score) && score < best_score) {
                best_score = score;
                best_drop = drop;
            }
        }
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(best_drop));
        push_model(current);
    }

    std::vector<ModelSpec> models;
    models.push_back({0, {}});
    for (auto& m : path) models.push_back(std::move(m));
    return models;
}

std::vector<ModelSpec> build_models(const Dataset& ds, const std::vector<Feature>& features,
                                    const FeaturePartition& partition, ModelMode mode) {
    if (mode == ModelMode::Exhaustive) return candidate_models(ds.d(), ds.interest_index);
    return backward_models(ds, features, partition);
}

std::vector<double> make_mesh(double lo, double hi, int points) {
    std::vector<double> mesh(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        mesh[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return mesh;
}

std::vector<double> smooth_gamma(const std::vector<double>& x, const std::vector<double>& g,
                                 const std::vector<double>& mesh) {
    std::vector<double> curve(mesh.size(), kNaN);
    if (x.size() < 5 || x.size() != g.size()) return curve;
    double bw = silverman_bandwidth(x);
    if (!(bw > 0)) return curve;
    const double inv2bw2 = 1.0 / (2.0 * bw * bw);
    for (std::size_t m = 0; m < mesh.size(); ++m) {
        double sw = 0, sw2 = 0, swg = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double dx = x[i] - mesh[m];
            const double w = std::exp(-dx * dx * inv2bw2);
            sw += w;
            sw2 += w * w;
            swg += w * g[i];
        }
        if (sw <= 0) continue;
        const double ess = sw * sw / sw2;  // Kish effective sample size
        if (ess < kMinEffectiveSample) continue;
        curve[m] = swg / sw;
    }
    return curve;
}

CvCurves build_cv_curves(const Dataset& ds, const GammaTable& table,
                         const std::vector<ModelSpec>& models, int mesh_points) {
    CvCurves out;
    out.models = models;
    if (table.rows.empty()) return out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (long i : table.rows) {
        lo = std::min(lo, ds.x(i, ds.interest_index));
        hi = std::max(hi, ds.x(i, ds.interest_index));
    }
    out.mesh = make_mesh(lo, hi, mesh_points);
    out.value.setConstant(static_cast<long>(out.mesh.size()), static_cast<long>(models.size()), kNaN);

    for (std::size_t jm = 0; jm < models.size(); ++jm) {
        std::vector<double> xs, gs;
        for (std::size_t k = 0; k < table.rows.size(); ++k) {
            const double v = table.gamma(static_cast<long>(k), static_cast<long>(jm));
            if (!std::isfinite(v)) continue;
            xs.push_back(ds.x(table.rows[k], ds.interest_index));
            gs.push_back(v);
        }
        const std::vector<double> curve = smooth_gamma(xs, gs, out.mesh);
        for (std::size_t m = 0; m < curve.size(); ++m)
            out.value(static_cast<long>(m), static_cast<long>(jm)) = curve[m];
    }

    out.ratio = out.value;
    for (long m = 0; m < out.ratio.rows(); ++m) {
        const double null_v = out.value(m, 0);
        for (long j = 0; j < out.ratio.cols(); ++j)
            out.ratio(m, j) = null_v > 0 ? out.value(m, j) / null_v : kNaN;
    }
    return out;
}

int select_model(const CvCurves& curves, int mesh_index) {
    int best = kNoModel;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < curves.models.size(); ++j) {
        const double v = curves.value(mesh_index, static_cast<long>(j));
        if (!std::isfinite(v)) continue;
        const bool wins =
            v < best_v ||
            (v == best_v && best != kNoModel &&
             (curves.models[j].subset.size() < curves.models[static_cast<std::size_t>(best)].subset.size() ||
              (curves.models[j].subset.size() == curves.models[static_cast<std::size_t>(best)].subset.size() &&
               curves.models[j].id < curves.models[static_cast<std::size_t>(best)].id)));
        if (wins) {
            best = static_cast<int>(j);
            best_v = v;
        }
    }
    return best == kNoModel ? kNoModel : curves.models[static_cast<std::size_t>(best)].id;
}

int select_model_at(const CvCurves& curves, double x1) {
    if (curves.mesh.empty()) return kNoModel;
    if (x1 < curves.mesh.front() || x1 > curves.mesh.back())
        throw ConfigError("x1 outside CV mesh range");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < curves.mesh.size(); ++m) {
        const double dist = std::fabs(curves.mesh[m] - x1);
        if (dist < best_d) {
            best_d = dist;
            best = m;
        }
    }
    return select_model(curves, static_cast<int>(best));
}

}  // namespace effiscan
