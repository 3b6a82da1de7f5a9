#include "effiscan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "effiscan/errors.hpp"

namespace effiscan {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    const std::string path = cfg.out_dir.empty() ? name : cfg.out_dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path);
    return out;
}

Criterion parse_criterion(const std::string& s) {
    if (s == "ols") return Criterion::OlsT1;
    if (s == "h0noise") return Criterion::H0NoiseT1;
    throw ConfigError("unknown criterion \"" + s + "\"");
}

Sided parse_sided(const std::string& s) {
    if (s == "two") return Sided::Two;
    if (s == "left") return Sided::Left;
    if (s == "right") return Sided::Right;
    throw ConfigError("unknown sided mode \"" + s + "\"");
}

Norm parse_norm(const std::string& s) {
    if (s == "sum") return Norm::Sum;
    if (s == "sumsq") return Norm::SumSq;
    if (s == "max") return Norm::Max;
    throw ConfigError("unknown norm \"" + s + "\"");
}

}  // namespace

RunConfig load_config_json(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    RunConfig c = std::move(base);
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("response")) c.response = j["response"].get<std::string>();
    if (j.contains("interest")) c.interest = j["interest"].get<std::string>();
    if (j.contains("transforms")) c.transforms = j["transforms"].get<std::vector<std::string>>();
    if (j.contains("grid_interest")) c.grid_interest = j["grid_interest"].get<int>();
    if (j.contains("grid_other")) c.grid_other = j["grid_other"].get<int>();
    if (j.contains("min_points")) c.min_points = j["min_points"].get<long>();
    if (j.contains("criterion")) c.criterion = parse_criterion(j["criterion"].get<std::string>());
    if (j.contains("eval_points")) c.eval_data_rows = j["eval_points"].get<std::string>() == "rows";
    if (j.contains("model_mode"))
        c.model_mode = j["model_mode"].get<std::string>() == "backward" ? ModelMode::Backward
                                                                        : ModelMode::Exhaustive;
    if (j.contains("cv_mode")) c.cv_difference = j["cv_mode"].get<std::string>() == "difference";
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("b")) c.B = j["b"].get<long>();
    if (j.contains("sided")) c.sided = parse_sided(j["sided"].get<std::string>());
    if (j.contains("norm")) c.norm = parse_norm(j["norm"].get<std::string>());
    if (j.contains("x0")) c.x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    return c;
}

Dataset load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("no input file given (--input)");
    if (cfg.response.empty() || cfg.interest.empty())
        throw ConfigError("both --response and --interest are required");
    Dataset ds = load_csv(cfg.input, cfg.response, cfg.interest);
    if (!cfg.transforms.empty()) {
        TransformSpec spec;
        for (const auto& t : cfg.transforms) spec.steps.push_back(parse_transform(t));
        ds = apply_transforms(ds, spec);
    }
    return ds;
}

std::vector<int> nearest_grid_point(const QuantileGrid& grid, const std::vector<double>& x0) {
    if (static_cast<int>(x0.size()) != grid.dims())
        throw ConfigError("x0 dimension does not match the grid");
    std::vector<int> idx(x0.size());
    for (int j = 0; j < grid.dims(); ++j) {
        const auto& cuts = grid.cuts[static_cast<std::size_t>(j)];
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            const double dist = std::fabs(cuts[k] - x0[static_cast<std::size_t>(j)]);
            if (dist < best_d) {
                best_d = dist;
                best = static_cast<int>(k);
            }
        }
        idx[static_cast<std::size_t>(j)] = best;
    }
    return idx;
}

Pipeline run_scan_pipeline(Dataset ds, const RunConfig& cfg) {
    Pipeline p;
    p.ds = std::move(ds);
    p.grid = build_grid(p.ds, GridSizes{cfg.grid_interest, cfg.grid_other});
    p.table = std::make_unique<CellTable>(p.ds, p.grid);
    const long min_points = cfg.min_points >= 0 ? cfg.min_points : default_min_points(p.ds.d());
    EnumerationResult enumeration = enumerate_regions(p.grid, min_points, *p.table);
    p.regions = std::move(enumeration.regions);
    p.enumerated_pairs = enumeration.pairs;
    p.scan = scan_all(p.ds, *p.table, p.regions, cfg.criterion);

    if (cfg.eval_data_rows) {
        // evaluation at the data rows, real half-open containment
        p.mapping.assign(static_cast<std::size_t>(p.ds.n()), kUncovered);
        for (long i = 0; i < p.ds.n(); ++i) {
            const RegionEval* best = nullptr;
            for (const RegionEval& e : p.scan.entries) {
                const Region& r = p.regions[static_cast<std::size_t>(e.region_id)];
                if (!r.contains_row(p.grid, p.ds.x, i)) continue;
                if (!best || std::fabs(e.t) > std::fabs(best->t) ||
                    (std::fabs(e.t) == std::fabs(best->t) &&
                     (e.n_h > best->n_h || (e.n_h == best->n_h && e.region_id < best->region_id))))
                    best = &e;
            }
            if (best) p.mapping[static_cast<std::size_t>(i)] = best->region_id;
        }
    } else {
        p.mapping = best_region_per_point(p.scan, p.regions, interior_points(p.grid));
    }
    p.features = extract_features(p.scan, p.regions, p.mapping, p.ds, p.grid);
    p.partition = partition_features(p.features, p.ds);
    return p;
}

namespace {

void write_region_rows(std::ofstream& out, const Pipeline& p, bool features_only) {
    const int interest = p.ds.interest_index;
    const auto& cuts = p.grid.cuts[static_cast<std::size_t>(interest)];
    out << "t,interest_lo,interest_hi,coverage_fraction\n";
    if (features_only) {
        for (const Feature& f : p.features) {
            out << fmt(f.t) << ',' << fmt(cuts[static_cast<std::size_t>(f.region.lo[static_cast<std::size_t>(interest)])])
                << ',' << fmt(cuts[static_cast<std::size_t>(f.region.hi[static_cast<std::size_t>(interest)])]) << ','
                << fmt(f.coverage) << '\n';
        }
        return;
    }
    for (const RegionEval& e : p.scan.entries) {
        const Region& r = p.regions[static_cast<std::size_t>(e.region_id)];
        out << fmt(e.t) << ',' << fmt(cuts[static_cast<std::size_t>(r.lo[static_cast<std::size_t>(interest)])]) << ','
            << fmt(cuts[static_cast<std::size_t>(r.hi[static_cast<std::size_t>(interest)])]) << ',' << fmt(e.coverage)
            << '\n';
    }
}

void write_features_csv(std::ofstream& out, const Pipeline& p) {
    out << "rank,t,beta1";
    for (const auto& name : p.ds.names) out << ",lo_" << name << ",hi_" << name;
    out << ",n_h,coverage_fraction\n";
    for (const Feature& f : p.features) {
        out << f.rank << ',' << fmt(f.t) << ',' << fmt(f.beta1);
        for (int j = 0; j < p.ds.d(); ++j) {
            const auto& cuts = p.grid.cuts[static_cast<std::size_t>(j)];
            out << ',' << fmt(cuts[static_cast<std::size_t>(f.region.lo[static_cast<std::size_t>(j)])]) << ','
                << fmt(cuts[static_cast<std::size_t>(f.region.hi[static_cast<std::size_t>(j)])]);
        }
        out << ',' << f.n_h << ',' << fmt(f.coverage) << '\n';
    }
}

struct CvProducts {
    std::vector<ModelSpec> models;
    GammaTable gamma;
    CvCurves curves;
    // per (feature rank, model id): fit on the feature's full membership
    std::map<std::pair<int, int>, RowFit> fits;
};

CvProducts build_cv_products(const Pipeline& p, const RunConfig& cfg) {
    CvProducts cv;
    cv.models = build_models(p.ds, p.features, p.partition, cfg.model_mode);
    cv.gamma = loo_gamma_all(p.ds, p.features, p.partition, cv.models);
    cv.curves = build_cv_curves(p.ds, cv.gamma, cv.models);
    for (const Feature& f : p.features) {
        for (const ModelSpec& m : cv.models) {
            if (static_cast<long>(f.member_rows.size()) < static_cast<long>(m.subset.size()) + 2)
                continue;
            RowFit rf = fit_rows(p.ds, f.member_rows, m.subset);
            if (!rf.fit.rank_ok) continue;
            cv.fits.emplace(std::make_pair(f.rank, m.id), std::move(rf));
        }
    }
    return cv;
}

int full_model_id(const std::vector<ModelSpec>& models, int d) {
    for (const auto& m : models)
        if (static_cast<int>(m.subset.size()) == d) return m.id;
    return kNoModel;
}

// The model used for a covered row: the CV winner at its x1, falling back to
// the full model (then any available one) if that fit failed in the row's
// feature.
const RowFit* row_model_fit(const CvProducts& cv, const Pipeline& p, long row, int* model_id_out) {
    const int rank = p.partition.rank_of_row[static_cast<std::size_t>(row)];
    if (rank == 0) return nullptr;
    const double x1 = p.ds.x(row, p.ds.interest_index);
    int id = kNoModel;
    if (!cv.curves.mesh.empty() && x1 >= cv.curves.mesh.front() && x1 <= cv.curves.mesh.back())
        id = select_model_at(cv.curves, x1);
    auto it = id == kNoModel ? cv.fits.end() : cv.fits.find({rank, id});
    if (it == cv.fits.end()) {
        id = full_model_id(cv.models, p.ds.d());
        it = cv.fits.find({rank, id});
    }
    if (it == cv.fits.end()) return nullptr;
    if (model_id_out) *model_id_out = id;
    return &it->second;
}

double row_slope(const RowFit& rf) {
    return rf.fit.interest_pos >= 0 ? rf.fit.beta(rf.fit.interest_pos) : 0.0;
}

double row_fitted(const RowFit& rf, const Pipeline& p, long row) {
    // rows of a feature fit are its full membership in ascending order
    const Feature& f = p.features[static_cast<std::size_t>(p.partition.rank_of_row[static_cast<std::size_t>(row)] - 1)];
    const auto pos = std::lower_bound(f.member_rows.begin(), f.member_rows.end(), row);
    return rf.fitted(static_cast<long>(pos - f.member_rows.begin()));
}

}  // namespace

void cmd_scan(const RunConfig& cfg) {
    const Pipeline p = run_scan_pipeline(load_input(cfg), cfg);
    auto raw = open_out(cfg, "raw_t.csv");
    write_region_rows(raw, p, false);
    auto tstat = open_out(cfg, "tstat.csv");
    write_region_rows(tstat, p, true);
    auto feats = open_out(cfg, "features.csv");
    write_features_csv(feats, p);
}

void cmd_features(const RunConfig& cfg) {
    const Pipeline p = run_scan_pipeline(load_input(cfg), cfg);
    auto out = open_out(cfg, "feature_plot.csv");
    out << "rank,beta1,dim,coord,coverage\n";
    for (const Feature& f : p.features)
        for (long i : f.member_rows)
            for (int j = 0; j < p.ds.d(); ++j)
                out << f.rank << ',' << fmt(f.beta1) << ',' << p.ds.names[static_cast<std::size_t>(j)] << ','
                    << fmt(p.ds.x(i, j)) << ',' << fmt(f.coverage) << '\n';
}

void cmd_cv(const RunConfig& cfg) {
    const Pipeline p = run_scan_pipeline(load_input(cfg), cfg);
    const CvProducts cv = build_cv_products(p, cfg);

    auto curves = open_out(cfg, "cv_curves.csv");
    curves << "x1";
    for (const auto& m : cv.models) curves << ",model_" << m.id;
    curves << '\n';
    for (std::size_t mi = 0; mi < cv.curves.mesh.size(); ++mi) {
        curves << fmt(cv.curves.mesh[mi]);
        for (std::size_t j = 0; j < cv.models.size(); ++j) {
            double v;
            if (cfg.cv_difference) {
                v = cv.curves.value(static_cast<long>(mi), static_cast<long>(j)) -
                    cv.curves.value(static_cast<long>(mi), 0);
            } else {
                v = cv.curves.ratio(static_cast<long>(mi), static_cast<long>(j));
            }
            curves << ',' << fmt(v);
        }
        curves << '\n';
    }

    auto selected = open_out(cfg, "selected_model.csv");
    selected << "x1,model_id\n";
    for (std::size_t mi = 0; mi < cv.curves.mesh.size(); ++mi)
        selected << fmt(cv.curves.mesh[mi]) << ',' << select_model(cv.curves, static_cast<int>(mi))
                 << '\n';

    auto slope = open_out(cfg, "slope_plot.csv");
    slope << "x1,beta1\n";
    for (long i = 0; i < p.ds.n(); ++i) {
        if (p.partition.rank_of_row[static_cast<std::size_t>(i)] == 0) continue;
        const RowFit* rf = row_model_fit(cv, p, i, nullptr);
        if (!rf) continue;
        slope << fmt(p.ds.x(i, p.ds.interest_index)) << ',' << fmt(row_slope(*rf)) << '\n';
    }
}

void cmd_level(const RunConfig& cfg, LevelComparison comparison) {
    const Pipeline p = run_scan_pipeline(load_input(cfg), cfg);
    const CvProducts cv = build_cv_products(p, cfg);

    std::vector<double> xs, fitted;
    for (long i = 0; i < p.ds.n(); ++i) {
        if (p.partition.rank_of_row[static_cast<std::size_t>(i)] == 0) continue;
        const RowFit* rf = row_model_fit(cv, p, i, nullptr);
        if (!rf) continue;
        xs.push_back(p.ds.x(i, p.ds.interest_index));
        fitted.push_back(row_fitted(*rf, p, i));
    }

    auto out = open_out(cfg, "level_plot.csv");
    out << "row_type,x1,value\n";
    for (std::size_t k = 0; k < xs.size(); ++k)
        out << "point," << fmt(xs[k]) << ',' << fmt(fitted[k]) << '\n';

    if (!xs.empty()) {
        const double lo = *std::min_element(xs.begin(), xs.end());
        const double hi = *std::max_element(xs.begin(), xs.end());
        const std::vector<double> mesh = make_mesh(lo, hi);
        const std::vector<double> curve = smooth_gamma(xs, fitted, mesh);
        for (std::size_t m = 0; m < mesh.size(); ++m)
            if (std::isfinite(curve[m])) out << "curve," << fmt(mesh[m]) << ',' << fmt(curve[m]) << '\n';

        if (comparison == LevelComparison::D1) {
            // rerun the whole pipeline with only the interest covariate
            Dataset d1;
            d1.x = p.ds.x.col(p.ds.interest_index);
            d1.y = p.ds.y;
            d1.names = {p.ds.names[static_cast<std::size_t>(p.ds.interest_index)]};
            d1.response_name = p.ds.response_name;
            d1.interest_index = 0;
            const Pipeline q = run_scan_pipeline(std::move(d1), cfg);
            const CvProducts qcv = build_cv_products(q, cfg);
            std::vector<double> qx, qf;
            for (long i = 0; i < q.ds.n(); ++i) {
                if (q.partition.rank_of_row[static_cast<std::size_t>(i)] == 0) continue;
                const RowFit* rf = row_model_fit(qcv, q, i, nullptr);
                if (!rf) continue;
                qx.push_back(q.ds.x(i, 0));
                qf.push_back(row_fitted(*rf, q, i));
            }
            if (!qx.empty()) {
                const std::vector<double> curve1 = smooth_gamma(qx, qf, mesh);
                for (std::size_t m = 0; m < mesh.size(); ++m)
                    if (std::isfinite(curve1[m]))
                        out << "curve_d1," << fmt(mesh[m]) << ',' << fmt(curve1[m]) << '\n';
            }
        }
    }
}

void cmd_permtest(const RunConfig& cfg) {
    const Pipeline p = run_scan_pipeline(load_input(cfg), cfg);
    PermutationOptions opts;
    opts.B = cfg.B;
    opts.alpha = cfg.alpha;
    opts.sided = cfg.sided;
    opts.seed = cfg.seed;
    opts.criterion = cfg.criterion;
    opts.min_points = cfg.min_points;

    // the test needs the full box list; occupancy is enforced per replicate
    // inside the statistic so observed data and permutations face the same rule
    const std::vector<Region> boxes = enumerate_regions(p.grid, 0, *p.table).regions;
    PermutationResult res;
    if (!cfg.x0.empty()) {
        res = pointwise_test(p.ds, *p.table, boxes, nearest_grid_point(p.grid, cfg.x0), opts);
    } else {
        res = global_test(p.ds, *p.table, boxes, interior_points(p.grid), cfg.norm, opts);
    }

    nlohmann::json j;
    j["observed"] = res.observed;
    j["critical"] = res.critical;
    j["pvalue"] = res.pvalue;
    j["b"] = cfg.B;
    j["seed"] = res.seed;
    j["replicates"] = res.replicates;
    auto out = open_out(cfg, "permtest.json");
    out << j.dump(2) << '\n';
}

}  // namespace effiscan
