#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "effiscan/errors.hpp"
#include "effiscan/report.hpp"
#include "effiscan/simulate.hpp"

using namespace effiscan;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string make_dir(const std::string& name) {
    const std::string dir = "/tmp/effiscan_report_" + name;
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    return dir;
}

RunConfig small_config(const std::string& out_dir) {
    RunConfig cfg;
    cfg.input = out_dir + "/data.csv";
    cfg.response = "y";
    cfg.interest = "x1";
    cfg.grid_interest = 8;
    cfg.grid_other = 3;
    cfg.out_dir = out_dir;
    write_csv(gen_simple(17, {400, 0.02}), cfg.input);
    return cfg;
}

}  // namespace

TEST_CASE("json config: missing keys keep defaults, present keys override") {
    const std::string dir = make_dir("cfg");
    const std::string path = dir + "/cfg.json";
    {
        std::ofstream out(path);
        out << R"({"input": "d.csv", "response": "y", "interest": "x1",
                   "grid_interest": 9, "b": 99, "sided": "right",
                   "norm": "sumsq", "criterion": "h0noise",
                   "transforms": ["log:y"], "x0": [0.5, 0.5], "seed": 7})";
    }
    const RunConfig cfg = load_config_json(path);
    CHECK(cfg.input == "d.csv");
    CHECK(cfg.grid_interest == 9);
    CHECK(cfg.grid_other == 5);  // untouched default
    CHECK(cfg.B == 99);
    CHECK(cfg.alpha == 0.05);
    CHECK(cfg.sided == Sided::Right);
    CHECK(cfg.norm == Norm::SumSq);
    CHECK(cfg.criterion == Criterion::H0NoiseT1);
    CHECK(cfg.transforms == std::vector<std::string>{"log:y"});
    CHECK(cfg.x0 == std::vector<double>{0.5, 0.5});
    CHECK(cfg.seed == 7);

    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_config_json(path), ConfigError);
    CHECK_THROWS_AS(load_config_json(dir + "/nope.json"), ConfigError);
}

TEST_CASE("nearest_grid_point snaps per dimension") {
    const Dataset ds = gen_simple(3, {300, 0.02});
    const QuantileGrid grid = build_grid(ds, GridSizes{5, 3});
    const std::vector<int> idx = nearest_grid_point(grid, {0.5, 0.0, 1.0});
    REQUIRE(idx.size() == 3);
    for (int j = 0; j < 3; ++j) {
        const double target = j == 0 ? 0.5 : (j == 1 ? 0.0 : 1.0);
        for (int k = 0; k < grid.size(j); ++k)
            CHECK(std::fabs(grid.cuts[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] - target) <=
                  std::fabs(grid.cuts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] - target));
    }
    CHECK_THROWS_AS(nearest_grid_point(grid, {0.5}), ConfigError);
}

TEST_CASE("pipeline: grid-point evaluation versus data-row evaluation") {
    const std::string dir = make_dir("pipe");
    RunConfig cfg = small_config(dir);
    const Pipeline grid_eval = run_scan_pipeline(load_input(cfg), cfg);
    CHECK(grid_eval.mapping.size() ==
          static_cast<std::size_t>(grid_eval.grid.total_points()));
    CHECK(!grid_eval.features.empty());
    CHECK(grid_eval.enumerated_pairs ==
          grid_eval.grid.total_points() * (grid_eval.grid.total_points() - 1) / 2);

    cfg.eval_data_rows = true;
    const Pipeline row_eval = run_scan_pipeline(load_input(cfg), cfg);
    CHECK(row_eval.mapping.size() == static_cast<std::size_t>(row_eval.ds.n()));
    CHECK(!row_eval.features.empty());
}

TEST_CASE("scan command emits consistent region and feature tables") {
    const std::string dir = make_dir("scan");
    const RunConfig cfg = small_config(dir);
    cmd_scan(cfg);

    const std::string raw = slurp(dir + "/raw_t.csv");
    CHECK(raw.rfind("t,interest_lo,interest_hi,coverage_fraction\n", 0) == 0);
    const std::string feats = slurp(dir + "/features.csv");
    CHECK(feats.rfind("rank,t,beta1,lo_x1,hi_x1,lo_x2,hi_x2,lo_x3,hi_x3,n_h,coverage_fraction\n",
                      0) == 0);
    // tstat rows are a subset of raw rows (features only)
    const std::string ts = slurp(dir + "/tstat.csv");
    CHECK(std::count(ts.begin(), ts.end(), '\n') <= std::count(raw.begin(), raw.end(), '\n'));
    CHECK(std::count(ts.begin(), ts.end(), '\n') ==
          std::count(feats.begin(), feats.end(), '\n'));
}

TEST_CASE("every command is byte-identical across reruns and thread counts") {
    const std::string dir_a = make_dir("det_a");
    const std::string dir_b = make_dir("det_b");
    RunConfig a = small_config(dir_a);
    RunConfig b = small_config(dir_b);
    b.input = a.input;  // same data, different output directory
    a.B = 29;
    b.B = 29;
    a.x0 = {0.5, 0.5, 0.5};
    b.x0 = a.x0;

    setenv("EFFISCAN_THREADS", "1", 1);
    cmd_scan(a);
    cmd_features(a);
    cmd_cv(a);
    cmd_level(a, LevelComparison::D1);
    cmd_permtest(a);
    setenv("EFFISCAN_THREADS", "6", 1);
    cmd_scan(b);
    cmd_features(b);
    cmd_cv(b);
    cmd_level(b, LevelComparison::D1);
    cmd_permtest(b);
    unsetenv("EFFISCAN_THREADS");

    for (const char* name :
         {"raw_t.csv", "tstat.csv", "features.csv", "feature_plot.csv", "cv_curves.csv",
          "selected_model.csv", "slope_plot.csv", "level_plot.csv", "permtest.json"}) {
        CHECK(slurp(dir_a + "/" + name) == slurp(dir_b + "/" + name));
    }
}

TEST_CASE("cv output: header names the models, ratios start at the null") {
    const std::string dir = make_dir("cv");
    const RunConfig cfg = small_config(dir);
    cmd_cv(cfg);
    const std::string curves = slurp(dir + "/cv_curves.csv");
    CHECK(curves.rfind("x1,model_0,model_1,model_2,model_3,model_4\n", 0) == 0);
    const std::string selected = slurp(dir + "/selected_model.csv");
    CHECK(selected.rfind("x1,model_id\n", 0) == 0);
    const std::string slope = slurp(dir + "/slope_plot.csv");
    CHECK(slope.rfind("x1,beta1\n", 0) == 0);
    CHECK(std::count(slope.begin(), slope.end(), '\n') > 10);
}

TEST_CASE("level plot carries points, a smooth curve, and the 1-d comparison") {
    const std::string dir = make_dir("level");
    const RunConfig cfg = small_config(dir);
    cmd_level(cfg, LevelComparison::D1);
    const std::string text = slurp(dir + "/level_plot.csv");
    CHECK(text.rfind("row_type,x1,value\n", 0) == 0);
    CHECK(text.find("\npoint,") != std::string::npos);
    CHECK(text.find("\ncurve,") != std::string::npos);
    CHECK(text.find("\ncurve_d1,") != std::string::npos);
}

TEST_CASE("permtest.json carries the documented fields") {
    const std::string dir = make_dir("perm");
    RunConfig cfg = small_config(dir);
    cfg.B = 19;
    cfg.x0 = {0.5, 0.5, 0.5};
    cmd_permtest(cfg);
    const std::string text = slurp(dir + "/permtest.json");
    for (const char* key : {"\"observed\"", "\"critical\"", "\"pvalue\"", "\"b\"", "\"seed\"",
                            "\"replicates\""})
        CHECK(text.find(key) != std::string::npos);

    // no x0: global test over the whole grid
    cfg.B = 19;
    cfg.x0.clear();
    cmd_permtest(cfg);
    CHECK(slurp(dir + "/permtest.json").find("\"pvalue\"") != std::string::npos);
}

TEST_CASE("missing input is a configuration error") {
    RunConfig cfg;
    CHECK_THROWS_AS(load_input(cfg), ConfigError);
    cfg.input = "/tmp/effiscan_missing.csv";
    CHECK_THROWS_AS(load_input(cfg), ConfigError);
}
