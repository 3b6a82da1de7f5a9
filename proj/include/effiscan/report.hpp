#pragma once

#include <memory>
#include <string>

#include "effiscan/permute.hpp"
#include "effiscan/select.hpp"

namespace effiscan {

struct RunConfig {
    std::string input;  // CSV path
    std::string response;
    std::string interest;
    std::vector<std::string> transforms;
    int grid_interest = 15;
    int grid_other = 5;
    long min_points = -1;  // -1: max(d+2, 10)
    Criterion criterion = Criterion::OlsT1;
    bool eval_data_rows = false;  // evaluation points: grid (default) or data rows
    ModelMode model_mode = ModelMode::Exhaustive;
    bool cv_difference = false;  // CV curves as difference to null instead of ratio
    double alpha = 0.05;
    long B = 199;
    Sided sided = Sided::Two;
    Norm norm = Norm::Max;
    std::vector<double> x0;  // pointwise test target (real coordinates)
    std::uint64_t seed = 42;
    std::string out_dir = ".";
};

// Single JSON document mirroring the CLI flags; missing keys keep defaults.
RunConfig load_config_json(const std::string& path, RunConfig base = {});

/// Everything the plot emitters need, computed once per run.
struct Pipeline {
    Dataset ds;
    QuantileGrid grid;
    std::unique_ptr<CellTable> table;
    std::vector<Region> regions;
    long enumerated_pairs = 0;
    ScanResult scan;
    std::vector<int> mapping;  // per evaluation point
    std::vector<Feature> features;
    FeaturePartition partition;
};

Pipeline run_scan_pipeline(Dataset ds, const RunConfig& cfg);

Dataset load_input(const RunConfig& cfg);

// Plot-data emitters; every file carries a header row and %.17g doubles so
// identical runs are byte-identical.
void cmd_scan(const RunConfig& cfg);
void cmd_features(const RunConfig& cfg);
void cmd_cv(const RunConfig& cfg);
enum class LevelComparison { None, D1 };
void cmd_level(const RunConfig& cfg, LevelComparison comparison);
void cmd_permtest(const RunConfig& cfg);

// Maps real coordinates to the nearest interior grid point per dimension.
std::vector<int> nearest_grid_point(const QuantileGrid& grid, const std::vector<double>& x0);

}  // namespace effiscan
