#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace effiscan {

/// Immutable sample: n rows of d covariates plus a response. The covariate
/// of interest is always stored in column 0 (loaders reorder columns so
/// downstream code can index the interest slope directly).
struct Dataset {
    Eigen::MatrixXd x;               // n x d
    Eigen::VectorXd y;               // n
    std::vector<std::string> names;  // covariate column labels, size d
    std::string response_name;
    int interest_index = 0;

    long n() const { return x.rows(); }
    int d() const { return static_cast<int>(x.cols()); }
};

// Validates invariants (finiteness, n >= d+2, unique labels, interest index
// in range) and throws ConfigError/DataError on violation.
void validate(const Dataset& ds);

struct TransformStep {
    enum class Kind { Log, Lag, LogReturn };
    Kind kind;
    std::string column;
    int periods = 1;  // Lag only
};

struct TransformSpec {
    std::vector<TransformStep> steps;
};

// Parses "log:col", "lag:col:k", "logreturn:col".
TransformStep parse_transform(const std::string& text);

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::string& interest);

void write_csv(const Dataset& ds, const std::string& path);

// Applies steps left to right, then drops the leading rows consumed by the
// largest lag so every retained row refers to one original time index.
Dataset apply_transforms(const Dataset& ds, const TransformSpec& spec);

}  // namespace effiscan
