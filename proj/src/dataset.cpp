#include "effiscan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "effiscan/errors.hpp"

namespace effiscan {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

double parse_cell(const std::string& text, long row, const std::string& col) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // trailing whitespace is tolerated, anything else is not
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || !std::isfinite(v)) {
        throw ParseError("non-numeric cell at row " + std::to_string(row) +
                         ", column " + col + ": \"" + text + "\"");
    }
    return v;
}

}  // namespace

void validate(const Dataset& ds) {
    const long n = ds.n();
    const int d = ds.d();
    if (d < 1) throw ConfigError("dataset has no covariates");
    if (n < d + 2) {
        throw DataError("insufficient data: n=" + std::to_string(n) +
                        " < d+2=" + std::to_string(d + 2));
    }
    if (ds.interest_index < 0 || ds.interest_index >= d)
        throw ConfigError("interest index out of range");
    if (static_cast<int>(ds.names.size()) != d)
        throw ConfigError("column label count does not match d");
    std::set<std::string> seen(ds.names.begin(), ds.names.end());
    if (static_cast<int>(seen.size()) != d || seen.count(ds.response_name))
        throw ConfigError("column labels not unique");
    if (!ds.x.allFinite() || !ds.y.allFinite())
        throw DataError("dataset contains non-finite values");
}

TransformStep parse_transform(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() == 2 && parts[0] == "log") return {TransformStep::Kind::Log, parts[1], 0};
    if (parts.size() == 2 && parts[0] == "logreturn")
        return {TransformStep::Kind::LogReturn, parts[1], 1};
    if (parts.size() == 3 && parts[0] == "lag") {
        const int k = std::atoi(parts[2].c_str());
        if (k < 1) throw ConfigError("lag periods must be >= 1 in \"" + text + "\"");
        return {TransformStep::Kind::Lag, parts[1], k};
    }
    throw ConfigError("unrecognized transform \"" + text +
                      "\" (expected log:col, lag:col:k, logreturn:col)");
}

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::string& interest) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file " + path);
    const std::vector<std::string> header = split_csv_line(line);

    std::set<std::string> seen;
    for (const auto& h : header) {
        if (!seen.insert(h).second)
            throw ConfigError("duplicate header column \"" + h + "\" in " + path);
    }
    if (!seen.count(response)) throw ConfigError("response column \"" + response + "\" not found");
    if (!seen.count(interest)) throw ConfigError("interest column \"" + interest + "\" not found");
    if (response == interest) throw ConfigError("response and interest columns coincide");

    const int ncols = static_cast<int>(header.size());
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(ncols));
    long row = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++row;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != ncols) {
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(ncols));
        }
        for (int c = 0; c < ncols; ++c)
            cols[static_cast<std::size_t>(c)].push_back(parse_cell(cells[static_cast<std::size_t>(c)], row, header[static_cast<std::size_t>(c)]));
    }

    // interest covariate first, remaining covariates in file order
    std::vector<int> order;
    for (int c = 0; c < ncols; ++c)
        if (header[static_cast<std::size_t>(c)] == interest) order.push_back(c);
    for (int c = 0; c < ncols; ++c) {
        const auto& h = header[static_cast<std::size_t>(c)];
        if (h != interest && h != response) order.push_back(c);
    }
    int resp_col = 0;
    for (int c = 0; c < ncols; ++c)
        if (header[static_cast<std::size_t>(c)] == response) resp_col = c;

    Dataset ds;
    const long n = row;
    const int d = static_cast<int>(order.size());
    ds.x.resize(n, d);
    ds.y.resize(n);
    for (int j = 0; j < d; ++j) {
        ds.names.push_back(header[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
        for (long i = 0; i < n; ++i)
            ds.x(i, j) = cols[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])][static_cast<std::size_t>(i)];
    }
    for (long i = 0; i < n; ++i) ds.y(i) = cols[static_cast<std::size_t>(resp_col)][static_cast<std::size_t>(i)];
    ds.response_name = response;
    ds.interest_index = 0;
    validate(ds);
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path);
    char buf[64];
    for (int j = 0; j < ds.d(); ++j) out << ds.names[static_cast<std::size_t>(j)] << ',';
    out << ds.response_name << '\n';
    for (long i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.x(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", ds.y(i));
        out << buf << '\n';
    }
}

Dataset apply_transforms(const Dataset& ds, const TransformSpec& spec) {
    // Work on full-length columns; a lag of k marks the first k rows of that
    // column invalid. The final dataset drops max-invalid leading rows so all
    // columns align on the same original row index.
    struct Col {
        std::vector<double> v;
        long invalid = 0;
    };
    const long n = ds.n();
    std::vector<std::string> names = ds.names;
    std::vector<Col> cols(names.size() + 1);
    for (std::size_t j = 0; j < names.size(); ++j) {
        cols[j].v.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) cols[j].v[static_cast<std::size_t>(i)] = ds.x(i, static_cast<int>(j));
    }
    cols.back().v.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) cols.back().v[static_cast<std::size_t>(i)] = ds.y(i);

    auto find_col = [&](const std::string& name) -> Col& {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return cols[j];
        if (name == ds.response_name) return cols.back();
        throw ConfigError("transform references unknown column \"" + name + "\"");
    };

    auto log_inplace = [&](Col& c, const std::string& name) {
        for (long i = c.invalid; i < n; ++i) {
            double& v = c.v[static_cast<std::size_t>(i)];
            if (v <= 0.0) {
                throw DataError("log of nonpositive value " + std::to_string(v) + " at row " +
                                std::to_string(i + 1) + ", column " + name);
            }
            v = std::log(v);
        }
    };
    auto lag_inplace = [&](Col& c, int k) {
        for (long i = n - 1; i >= k; --i) c.v[static_cast<std::size_t>(i)] = c.v[static_cast<std::size_t>(i - k)];
        c.invalid += k;
    };

    for (const auto& step : spec.steps) {
        Col& c = find_col(step.column);
        switch (step.kind) {
            case TransformStep::Kind::Log:
                log_inplace(c, step.column);
                break;
            case TransformStep::Kind::Lag:
                lag_inplace(c, step.periods);
                break;
            case TransformStep::Kind::LogReturn: {
                // log(p_t) - log(p_{t-1})
                log_inplace(c, step.column);
                std::vector<double> lagged = c.v;
                for (long i = n - 1; i >= 1; --i) lagged[static_cast<std::size_t>(i)] = lagged[static_cast<std::size_t>(i - 1)];
                for (long i = n - 1; i >= 1; --i) c.v[static_cast<std::size_t>(i)] -= lagged[static_cast<std::size_t>(i)];
                c.invalid += 1;
                break;
            }
        }
    }

    long drop = 0;
    for (const auto& c : cols) drop = std::max(drop, c.invalid);
    const long m = n - drop;
    if (m < ds.d() + 2)
        throw DataError("transforms leave too few rows: " + std::to_string(m));

    Dataset out;
    out.names = names;
    out.response_name = ds.response_name;
    out.interest_index = ds.interest_index;
    out.x.resize(m, ds.d());
    out.y.resize(m);
    for (long i = 0; i < m; ++i) {
        for (int j = 0; j < ds.d(); ++j) out.x(i, j) = cols[static_cast<std::size_t>(j)].v[static_cast<std::size_t>(i + drop)];
        out.y(i) = cols.back().v[static_cast<std::size_t>(i + drop)];
    }
    validate(out);
    return out;
}

}  // namespace effiscan
