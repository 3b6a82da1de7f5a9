// Command-line front end: scans a dataset for regions where the response
// depends on a chosen covariate, then selects local models, draws plot data,
// and runs permutation tests. Also generates the built-in synthetic datasets.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "effiscan/errors.hpp"
#include "effiscan/report.hpp"
#include "effiscan/simulate.hpp"

namespace {

using namespace effiscan;

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; CLI flags override its keys");
    cmd->add_option("--input", cfg.input, "input CSV file");
    cmd->add_option("--response", cfg.response, "response column name");
    cmd->add_option("--interest", cfg.interest, "covariate of interest");
    cmd->add_option("--transform", cfg.transforms,
                    "column transform, e.g. log:col, lag:col:2, logreturn:col (repeatable)");
    cmd->add_option("--grid-interest", cfg.grid_interest, "grid size for the interest covariate");
    cmd->add_option("--grid-other", cfg.grid_other, "grid size for the other covariates");
    cmd->add_option("--min-points", cfg.min_points, "minimum points per region (-1: automatic)");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--out-dir", cfg.out_dir, "output directory");
}

Criterion criterion_from(const std::string& s) {
    if (s == "ols") return Criterion::OlsT1;
    if (s == "h0noise") return Criterion::H0NoiseT1;
    throw CLI::ValidationError("--criterion must be ols or h0noise");
}

struct CommonFlags {
    std::string config_path;
    std::string criterion = "";
    std::string eval = "";
    std::string model_mode = "";
    std::string cv_mode = "";
    std::string sided = "";
    std::string norm = "";
};

// Resolve the config file first, then re-apply any explicitly passed flags on
// top of it.
RunConfig resolve(CLI::App* cmd, const RunConfig& cli_cfg, const CommonFlags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) cfg = load_config_json(flags.config_path, cfg);
    auto take = [&](const char* name, auto member) {
        if (cmd->count(name) > 0) cfg.*member = cli_cfg.*member;
    };
    take("--input", &RunConfig::input);
    take("--response", &RunConfig::response);
    take("--interest", &RunConfig::interest);
    take("--transform", &RunConfig::transforms);
    take("--grid-interest", &RunConfig::grid_interest);
    take("--grid-other", &RunConfig::grid_other);
    take("--min-points", &RunConfig::min_points);
    take("--seed", &RunConfig::seed);
    take("--out-dir", &RunConfig::out_dir);
    if (cmd->count("--alpha") > 0) cfg.alpha = cli_cfg.alpha;
    if (cmd->count("--B") > 0) cfg.B = cli_cfg.B;
    if (cmd->count("--x0") > 0) cfg.x0 = cli_cfg.x0;

    if (!flags.criterion.empty()) cfg.criterion = criterion_from(flags.criterion);
    if (!flags.eval.empty()) {
        if (flags.eval != "grid" && flags.eval != "rows")
            throw CLI::ValidationError("--eval-points must be grid or rows");
        cfg.eval_data_rows = flags.eval == "rows";
    }
    if (!flags.model_mode.empty()) {
        if (flags.model_mode == "exhaustive") cfg.model_mode = ModelMode::Exhaustive;
        else if (flags.model_mode == "backward") cfg.model_mode = ModelMode::Backward;
        else throw CLI::ValidationError("--model-mode must be exhaustive or backward");
    }
    if (!flags.cv_mode.empty()) {
        if (flags.cv_mode != "ratio" && flags.cv_mode != "difference")
            throw CLI::ValidationError("--cv-mode must be ratio or difference");
        cfg.cv_difference = flags.cv_mode == "difference";
    }
    if (!flags.sided.empty()) {
        if (flags.sided == "two") cfg.sided = Sided::Two;
        else if (flags.sided == "left") cfg.sided = Sided::Left;
        else if (flags.sided == "right") cfg.sided = Sided::Right;
        else throw CLI::ValidationError("--sided must be two, left, or right");
    }
    if (!flags.norm.empty()) {
        if (flags.norm == "sum") cfg.norm = Norm::Sum;
        else if (flags.norm == "sumsq") cfg.norm = Norm::SumSq;
        else if (flags.norm == "max") cfg.norm = Norm::Max;
        else throw CLI::ValidationError("--norm must be sum, sumsq, or max");
    }
    return cfg;
}

int run_simulate(const std::string& scenario, long n, std::uint64_t seed, const std::string& out,
                 double sigma2, double sd, const std::vector<double>& theta,
                 const std::vector<double>& gamma, const std::vector<double>& x0c,
                 const std::string& shape) {
    Dataset ds;
    if (scenario == "simple") {
        SimpleOptions o;
        o.n = n;
        o.sigma2 = sigma2;
        ds = gen_simple(seed, o);
    } else if (scenario == "dep-noY3" || scenario == "dep-Y3") {
        DependentOptions o;
        o.n = n;
        o.sigma2 = sigma2;
        o.sd = sd;
        ds = gen_dependent(scenario == "dep-Y3" ? DependentCase::Y3 : DependentCase::NoY3, seed, o);
    } else if (scenario == "shrink") {
        ShrinkScenario sc;
        sc.n = n;
        sc.sigma2 = sigma2;
        sc.theta = theta;
        sc.gamma = gamma;
        sc.x0 = x0c;
        if (shape == "symmetric") sc.shape = BumpShape::Symmetric;
        else if (shape != "asymmetric")
            throw ConfigError("--shape must be asymmetric or symmetric");
        ds = gen_shrinking(sc, seed);
    } else {
        throw ConfigError("unknown scenario \"" + scenario + "\"");
    }
    write_csv(ds, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local efficacy scanning for covariate-dependence discovery"};
    app.require_subcommand(1);

    RunConfig cli_cfg;
    CommonFlags flags;

    auto* scan = app.add_subcommand("scan", "scan regions, emit raw_t/tstat/features CSVs");
    auto* features = app.add_subcommand("features", "emit per-member feature plot data");
    auto* cv = app.add_subcommand("cv", "cross-validated model selection and slope plot");
    auto* level = app.add_subcommand("level", "fitted response level plot");
    auto* permtest = app.add_subcommand("permtest", "permutation significance test");

    bool level_d1 = false;
    level->add_flag("--compare-d1", level_d1,
                    "also rerun with the interest covariate alone and plot its curve");

    for (CLI::App* cmd : {scan, features, cv, level, permtest}) {
        add_common(cmd, cli_cfg, flags.config_path);
        cmd->add_option("--criterion", flags.criterion, "region statistic: ols or h0noise");
        cmd->add_option("--eval-points", flags.eval, "evaluation points: grid or rows");
        cmd->add_option("--model-mode", flags.model_mode, "model set: exhaustive or backward");
        cmd->add_option("--cv-mode", flags.cv_mode, "curve scale: ratio or difference");
        cmd->add_option("--alpha", cli_cfg.alpha, "test level");
        cmd->add_option("--B", cli_cfg.B, "number of permutation replicates");
        cmd->add_option("--sided", flags.sided, "two, left, or right");
        cmd->add_option("--norm", flags.norm, "global test norm: sum, sumsq, or max");
        cmd->add_option("--x0", cli_cfg.x0, "pointwise test location (one value per covariate)");
    }

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset CSV");
    std::string scenario = "simple";
    long sim_n = 1000;
    std::uint64_t sim_seed = 42;
    std::string sim_out = "simulated.csv";
    double sim_sigma2 = 0.02;
    double sim_sd = 1.0;
    std::vector<double> sim_theta, sim_gamma, sim_x0c;
    std::string sim_shape = "asymmetric";
    simulate->add_option("--scenario", scenario, "simple, dep-noY3, dep-Y3, or shrink");
    simulate->add_option("--n", sim_n, "sample size");
    simulate->add_option("--seed", sim_seed, "random seed");
    simulate->add_option("--out", sim_out, "output CSV path");
    simulate->add_option("--sigma2", sim_sigma2, "noise variance");
    simulate->add_option("--sd", sim_sd, "SD of the dependent covariate pair");
    simulate->add_option("--theta", sim_theta, "shrink: per-dimension support half-widths");
    simulate->add_option("--gamma", sim_gamma, "shrink: per-dimension amplitudes");
    simulate->add_option("--x0c", sim_x0c, "shrink: per-dimension bump centers");
    simulate->add_option("--shape", sim_shape, "shrink: asymmetric or symmetric");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(scenario, sim_n, sim_seed, sim_out, sim_sigma2, sim_sd, sim_theta,
                                sim_gamma, sim_x0c, sim_shape);
        CLI::App* cmd = app.get_subcommands().front();
        const RunConfig cfg = resolve(cmd, cli_cfg, flags);
        if (scan->parsed()) cmd_scan(cfg);
        else if (features->parsed()) cmd_features(cfg);
        else if (cv->parsed()) cmd_cv(cfg);
        else if (level->parsed())
            cmd_level(cfg, level_d1 ? LevelComparison::D1 : LevelComparison::None);
        else if (permtest->parsed()) cmd_permtest(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
