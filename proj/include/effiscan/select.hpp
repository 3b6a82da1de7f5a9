#pragma once

#include <Eigen/Dense>
#include <vector>

#include "effiscan/scan.hpp"

namespace effiscan {

/// Candidate covariate subset. The null model (intercept only) always has
/// id 0; model ids are stable across features.
struct ModelSpec {
    int id = 0;
    std::vector<int> subset;  // covariate indices; empty = null model
};

enum class ModelMode { Exhaustive, Backward };

// Exhaustive: the null model plus every subset containing the interest
// covariate (2^(d-1) models).
std::vector<ModelSpec> candidate_models(int d, int interest_index);

/// Per-(covered row, model) hat-adjusted LOO squared prediction errors.
/// NaN marks a model unavailable in a row's feature (undersized or rank
/// deficient fit) or a leverage-1 row.
struct GammaTable {
    std::vector<long> rows;  // covered rows, ascending
    Eigen::MatrixXd gamma;   // rows.size() x models.size()
};

// Fits each model on full feature membership S_k and evaluates LOO errors
// at the rows assigned to S_k'.
GammaTable loo_gamma_all(const Dataset& ds, const std::vector<Feature>& features,
                         const FeaturePartition& partition, const std::vector<ModelSpec>& models);

// Backward deletion path: greedily drops the non-interest covariate whose
// removal minimizes the aggregate mean LOO error, yielding d models plus
// null. The path is computed once, so ids are shared across features.
std::vector<ModelSpec> backward_models(const Dataset& ds, const std::vector<Feature>& features,
                                       const FeaturePartition& partition);

std::vector<ModelSpec> build_models(const Dataset& ds, const std::vector<Feature>& features,
                                    const FeaturePartition& partition, ModelMode mode);

// Nadaraya-Watson smooth with a Gaussian kernel and Silverman's bandwidth
// 0.9 * min(SD, IQR/1.34) * n^(-1/5). Mesh points where the kernel's
// effective sample size falls below 5 are NaN.
std::vector<double> smooth_gamma(const std::vector<double>& x, const std::vector<double>& g,
                                 const std::vector<double>& mesh);

std::vector<double> make_mesh(double lo, double hi, int points = 100);

struct CvCurves {
    std::vector<double> mesh;      // interest-covariate evaluation mesh
    std::vector<ModelSpec> models;
    Eigen::MatrixXd value;  // mesh.size() x models.size(), smoothed gamma
    Eigen::MatrixXd ratio;  // value relative to the null model's column
};

CvCurves build_cv_curves(const Dataset& ds, const GammaTable& table,
                         const std::vector<ModelSpec>& models, int mesh_points = 100);

constexpr int kNoModel = -1;

// argmin over defined models of the smoothed curve at mesh index m; ties to
// the smaller subset, then smaller id.
int select_model(const CvCurves& curves, int mesh_index);
// Same at an arbitrary x1 (nearest mesh point); x1 must lie in mesh range.
int select_model_at(const CvCurves& curves, double x1);

}  // namespace effiscan
