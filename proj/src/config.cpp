#include "rspline/config.hpp"

#include "rspline/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rspline {

using nlohmann::json;

namespace {

struct Position {
    std::size_t line = 1;
    std::size_t column = 1;
};

Position position_of(const std::string& text, std::size_t offset) {
    Position p;
    offset = std::min(offset, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

// nlohmann messages read "[json.exception...] parse error at line L, column C: detail".
std::string parse_detail(const std::string& what) {
    const std::size_t col = what.find("column");
    const std::size_t colon = col == std::string::npos ? col : what.find(": ", col);
    return colon == std::string::npos ? what : what.substr(colon + 2);
}

class Reader {
public:
    Reader(const std::string& text, std::string source)
        : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        // JSON values carry no positions; point at the key's first occurrence.
        const std::size_t at = key.empty() ? 0 : text_.find('"' + key + '"');
        const Position p = position_of(text_, at == std::string::npos ? 0 : at);
        throw ConfigError(source_ + ":" + std::to_string(p.line) + ":" +
                          std::to_string(p.column) + ": " + message);
    }

    double number(const json& v, const std::string& key) const {
        if (v.is_number()) return v.get<double>();
        if (v.is_string() && (v == "inf" || v == "infinity")) return kInfinity;
        fail(key, "'" + key + "' must be a number");
    }

    std::uint64_t count(const json& v, const std::string& key) const {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail(key, "'" + key + "' must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const json& v, const std::string& key) const {
        if (!v.is_string()) fail(key, "'" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const json& v, const std::string& key) const {
        if (!v.is_array()) fail(key, "'" + key + "' must be an array");
        std::vector<double> out;
        for (const json& e : v) out.push_back(number(e, key));
        return out;
    }

private:
    const std::string& text_;
    std::string source_;
};

void read_solver(const Reader& r, const json& s, ExperimentConfig& c) {
    if (!s.is_object()) r.fail("solver", "'solver' must be an object");
    for (const auto& [key, value] : s.items()) {
        if (key == "grad_tol") {
            c.solver.grad_tol = r.number(value, key);
            if (!(c.solver.grad_tol > 0.0)) r.fail(key, "'grad_tol' must be positive");
        } else if (key == "max_iters") {
            c.solver.max_iters = r.count(value, key);
        } else if (key == "substeps") {
            c.substeps = r.count(value, key);
            if (*c.substeps < 6) r.fail(key, "'substeps' must be at least 6");
        } else if (key == "newton_switch") {
            c.solver.newton_switch = r.number(value, key);
        } else {
            r.fail(key, "unknown solver option '" + key + "'");
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    ExperimentConfig c;
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) {
        return c;
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const Position p = position_of(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError(source + ":" + std::to_string(p.line) + ":" + std::to_string(p.column) +
                          ": malformed JSON: " + parse_detail(e.what()));
    }
    const Reader r(text, source);
    if (!doc.is_object()) r.fail("", "top level must be an object");

    for (const auto& [key, value] : doc.items()) {
        if (key == "manifold") {
            c.manifold = r.string(value, key);
            try {
                Manifold::parse(*c.manifold);
            } catch (const Error& e) {
                r.fail(key, e.what());
            }
        } else if (key == "curve") {
            c.curve = r.string(value, key);
        } else if (key == "methods") {
            if (!value.is_array() || value.empty()) r.fail(key, "'methods' must be a non-empty array");
            c.methods.clear();
            for (const json& m : value) {
                try {
                    c.methods.push_back(parse_method(r.string(m, key)));
                } catch (const ConfigError& e) {
                    r.fail(key, e.what());
                }
            }
        } else if (key == "h_ladder") {
            c.h_ladder = r.numbers(value, key);
        } else if (key == "p_list") {
            c.p_list = r.numbers(value, key);
        } else if (key == "solver") {
            read_solver(r, value, c);
        } else if (key == "output_dir") {
            c.output_dir = r.string(value, key);
        } else if (key == "seed") {
            c.seed = r.count(value, key);
        } else if (key == "threads") {
            c.threads = static_cast<unsigned>(r.count(value, key));
        } else if (key == "property_trials") {
            c.property_trials = r.count(value, key);
        } else {
            r.fail(key, "unknown key '" + key + "'");
        }
    }

    std::optional<Manifold> home;
    try {
        home = builtin_curve(c.curve).manifold;
    } catch (const ConfigError& e) {
        r.fail("curve", e.what());
    }
    if (c.manifold && Manifold::parse(*c.manifold) != *home) {
        r.fail("manifold",
               "curve '" + c.curve + "' lives on " + home->id() + ", not " + *c.manifold);
    }
    if (c.h_ladder.size() < 3) r.fail("h_ladder", "'h_ladder' needs at least three entries");
    for (std::size_t i = 0; i < c.h_ladder.size(); ++i) {
        const double h = c.h_ladder[i];
        const double n = std::round(1.0 / h);
        const auto in = static_cast<std::size_t>(n);
        if (!(h > 0.0) || std::abs(n * h - 1.0) > 1e-12 || (in & (in - 1)) != 0) {
            r.fail("h_ladder", "'h_ladder' entries must be 1/N with N a power of two");
        }
        if (i > 0 && !(h < c.h_ladder[i - 1])) {
            r.fail("h_ladder", "'h_ladder' must be strictly decreasing");
        }
    }
    if (c.p_list.empty()) r.fail("p_list", "'p_list' must not be empty");
    for (double p : c.p_list) {
        if (!(p >= 1.0)) r.fail("p_list", "'p_list' entries must be >= 1 or \"inf\"");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

int ExperimentResult::exit_code() const {
    if (solver_failure) return 2;
    const bool all = std::all_of(checks.begin(), checks.end(),
                                 [](const CheckResult& c) { return c.pass; });
    return all ? 0 : 1;
}

namespace {

std::string p_label(double p) { return std::isinf(p) ? "inf" : std::to_string(static_cast<int>(p)); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const TestCurve curve = builtin_curve(config.curve);
    StudyOptions opts;
    opts.solver = config.solver;
    opts.substeps = config.substeps;
    opts.threads = config.threads;

    ExperimentResult result;
    for (Method m : config.methods) {
        ConvergenceReport rep = run_study(curve, m, config.h_ladder, config.p_list, opts);
        const std::string prefix = to_string(m) + "/" + curve.name + "/";
        for (std::size_t j = 0; j < rep.p_values.size(); ++j) {
            const double order = rep.fits[j] ? rep.fits[j]->order
                                             : std::numeric_limits<double>::quiet_NaN();
            result.checks.push_back({prefix + "order_p" + p_label(rep.p_values[j]),
                                     rep.order_pass(j), order});
        }
        std::size_t failed = 0;
        for (const StudyRow& row : rep.rows) failed += row.ok ? 0 : 1;
        result.checks.push_back({prefix + "solves", failed == 0, static_cast<double>(failed)});
        result.checks.push_back({prefix + "diagnostics", rep.diagnostics_pass(), 0.0});
        if (failed > 0) result.solver_failure = true;
        result.reports.push_back(std::move(rep));
    }
    if (config.property_trials > 0) {
        const InterpTrialStats s =
            interp_trials(curve.manifold, config.seed, config.property_trials);
        result.checks.push_back(
            {"interp/linearity", s.linearity_error <= 1e-12, s.linearity_error});
        result.checks.push_back(
            {"interp/stability", s.stability_margin <= 1e-6, s.stability_margin});
    }
    return result;
}

namespace {

json number_or_null(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

}  // namespace

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "report.csv");
        if (!csv) throw ConfigError((dir / "report.csv").string() + ": cannot write");
        write_report_csv(csv, result.reports);
    }

    json summary;
    summary["version"] = kVersion;
    json cfg;
    cfg["curve"] = config.curve;
    cfg["manifold"] = builtin_curve(config.curve).manifold.id();
    cfg["methods"] = json::array();
    for (Method m : config.methods) cfg["methods"].push_back(to_string(m));
    cfg["h_ladder"] = config.h_ladder;
    cfg["p_list"] = json::array();
    for (double p : config.p_list) cfg["p_list"].push_back(number_or_null(p));
    cfg["grad_tol"] = config.solver.grad_tol;
    cfg["max_iters"] = config.solver.max_iters;
    cfg["substeps"] = config.substeps ? json(*config.substeps) : json("default");
    cfg["seed"] = config.seed;
    summary["config"] = cfg;

    summary["studies"] = json::array();
    for (const ConvergenceReport& rep : result.reports) {
        json s;
        s["method"] = to_string(rep.method);
        s["manifold"] = rep.manifold;
        s["curve"] = rep.curve;
        s["degraded"] = rep.degraded;
        s["fits"] = json::array();
        for (std::size_t j = 0; j < rep.p_values.size(); ++j) {
            json f;
            f["p"] = number_or_null(rep.p_values[j]);
            f["fitted_order"] = rep.fits[j] ? number_or_null(rep.fits[j]->order) : json(nullptr);
            f["ratios"] = rep.fits[j] ? json(rep.fits[j]->ratios) : json::array();
            f["pass"] = rep.order_pass(j);
            s["fits"].push_back(f);
        }
        s["rows"] = json::array();
        for (const StudyRow& row : rep.rows) {
            json r;
            r["h"] = row.h;
            r["substeps"] = row.substeps;
            r["status"] = row.ok ? "ok" : "failed";
            if (!row.ok) r["failure"] = row.failure;
            r["errors"] = json::array();
            for (double e : row.errors) r["errors"].push_back(number_or_null(e));
            r["iterations"] = row.stats.iterations;
            r["final_gradient_norm"] = number_or_null(row.stats.final_gradient_norm);
            r["el_residual_inf"] = number_or_null(row.stats.el_residual_inf);
            r["oracle_gap"] = number_or_null(row.oracle_gap);
            json d = json::object();
            for (const DiagnosticCheck& c : row.diagnostics) {
                d[c.name] = {{"lhs", number_or_null(c.lhs)},
                             {"rhs", number_or_null(c.rhs)},
                             {"pass", c.pass}};
            }
            r["diagnostics"] = d;
            s["rows"].push_back(r);
        }
        summary["studies"].push_back(s);
    }
    summary["checks"] = json::array();
    for (const CheckResult& c : result.checks) {
        summary["checks"].push_back({{"name", c.name},
                                     {"status", c.pass ? "pass" : "fail"},
                                     {"value", number_or_null(c.value)}});
    }
    const int code = result.exit_code();
    summary["status"] = code == 0 ? "pass" : code == 1 ? "fail" : "error";

    std::ofstream out(dir / "summary.json");
    if (!out) throw ConfigError((dir / "summary.json").string() + ": cannot write");
    out << summary.dump(2) << "\n";
}

}  // namespace rspline
