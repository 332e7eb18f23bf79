#include "mbvp/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mbvp/errors.hpp"

namespace mbvp {
namespace {

using json = nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) {
            throw ConfigError(join(prefix, key), "unknown key");
        }
    }
}

const json& require(const json& obj, const std::string& prefix, const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(join(prefix, key), "required key is missing");
    }
    return *it;
}

double as_number(const json& value, const std::string& key) {
    if (!value.is_number()) {
        throw ConfigError(key, "expected a number");
    }
    const double x = value.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(key, "expected a finite number");
    }
    return x;
}

double as_positive(const json& value, const std::string& key) {
    const double x = as_number(value, key);
    if (x <= 0.0) {
        throw ConfigError(key, "must be positive");
    }
    return x;
}

long long as_integer(const json& value, const std::string& key, long long lo, long long hi) {
    if (!value.is_number_integer()) {
        throw ConfigError(key, "expected an integer");
    }
    const auto x = value.get<long long>();
    if (x < lo || x > hi) {
        throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
}

std::uint64_t as_seed(const json& value, const std::string& key) {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
        throw ConfigError(key, "expected a nonnegative integer");
    }
    return value.get<std::uint64_t>();
}

Vec as_vector(const json& value, const std::string& key, Eigen::Index size) {
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != size) {
        throw ConfigError(key, "expected an array of " + std::to_string(size) + " numbers");
    }
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v[i] = as_number(value[static_cast<std::size_t>(i)], key + "[" + std::to_string(i) + "]");
    }
    return v;
}

Mat as_matrix(const json& value, const std::string& key, Eigen::Index size) {
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != size) {
        throw ConfigError(key, "expected " + std::to_string(size) + " rows");
    }
    Mat a(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        a.row(i) = as_vector(value[static_cast<std::size_t>(i)], key + "[" + std::to_string(i) + "]", size)
                       .transpose();
    }
    return a;
}

BoundaryOperator parse_boundary(const json& spec, const std::string& prefix, int q) {
    if (!spec.is_object()) {
        throw ConfigError(prefix, "expected an object with a \"kind\" entry");
    }
    const auto& kind_value = require(spec, prefix, "kind");
    const std::string kind_key = join(prefix, "kind");
    if (!kind_value.is_string()) {
        throw ConfigError(kind_key, "expected a string");
    }
    const auto text = kind_value.get<std::string>();
    const auto kind = parse_kind(text);
    if (!kind) {
        throw ConfigError(kind_key, "unknown boundary kind '" + text +
                                        "' (expected dirichlet, neumann, periodic, antiperiodic, linear_psd "
                                        "or projection)");
    }

    BoundaryParams params;
    std::string param_key = prefix;
    switch (*kind) {
        case BoundaryKind::LinearPSD:
            reject_unknown(spec, prefix, {"kind", "matrix"});
            param_key = join(prefix, "matrix");
            params.matrix = as_matrix(require(spec, prefix, "matrix"), param_key, 2 * q);
            break;
        case BoundaryKind::ProjectionProx: {
            const auto& set = require(spec, prefix, "set");
            param_key = join(prefix, "set");
            if (set == "box") {
                reject_unknown(spec, prefix, {"kind", "set", "lower", "upper"});
                const Vec lower = as_vector(require(spec, prefix, "lower"), join(prefix, "lower"), 2 * q);
                const Vec upper = as_vector(require(spec, prefix, "upper"), join(prefix, "upper"), 2 * q);
                if ((lower.array() > 0.0).any() || (upper.array() < 0.0).any()) {
                    throw ConfigError(join(prefix, "lower"), "the box must contain the origin");
                }
                params.projection = box_projection(lower, upper);
            } else if (set == "ball") {
                reject_unknown(spec, prefix, {"kind", "set", "radius"});
                const auto radius_key = join(prefix, "radius");
                params.projection = ball_projection(as_positive(require(spec, prefix, "radius"), radius_key));
            } else {
                throw ConfigError(param_key, "expected \"box\" or \"ball\"");
            }
            break;
        }
        default:
            reject_unknown(spec, prefix, {"kind"});
            break;
    }
    try {
        return build_boundary(*kind, q, std::move(params));
    } catch (const InvalidParams& e) {
        throw ConfigError(param_key, e.what());
    }
}

std::vector<Expression> parse_components(const json& value, const std::string& key, int count, int n, int m) {
    std::vector<std::string> texts;
    if (value.is_string() && count == 1) {
        texts.push_back(value.get<std::string>());
    } else if (value.is_array() && static_cast<int>(value.size()) == count) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (!value[i].is_string()) {
                throw ConfigError(key + "[" + std::to_string(i) + "]", "expected an expression string");
            }
            texts.push_back(value[i].get<std::string>());
        }
    } else {
        throw ConfigError(key, "expected an array of " + std::to_string(count) + " expression strings");
    }

    std::vector<Expression> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const std::string item = value.is_array() ? key + "[" + std::to_string(i) + "]" : key;
        try {
            out.push_back(Expression::parse(texts[i]));
        } catch (const ParseError& e) {
            throw ConfigError(item, e.what());
        }
        if (out.back().max_x_index() > n) {
            throw ConfigError(item, "uses x" + std::to_string(out.back().max_x_index()) + " but n = " +
                                        std::to_string(n));
        }
        if (out.back().max_y_index() > m) {
            throw ConfigError(item, "uses y" + std::to_string(out.back().max_y_index()) + " but m = " +
                                        std::to_string(m));
        }
    }
    return out;
}

StrategyChoice parse_strategy(const json& value, const std::string& key) {
    if (value == "auto") return StrategyChoice::Auto;
    if (value == "fixed_point") return StrategyChoice::FixedPointOnly;
    if (value == "newton") return StrategyChoice::NewtonOnly;
    if (value == "continuation") return StrategyChoice::ContinuationOnly;
    throw ConfigError(key, "expected auto, fixed_point, newton or continuation");
}

void parse_solver(const json& s, SolveOptions& opts) {
    const std::string prefix = "solver";
    if (!s.is_object()) throw ConfigError(prefix, "expected an object");
    reject_unknown(s, prefix,
                   {"tol", "theta", "lambda", "max_fp_iter", "max_newton_iter", "continuation_stages", "strategy"});
    if (s.contains("tol")) opts.tol = as_positive(s["tol"], "solver.tol");
    if (s.contains("theta")) {
        opts.theta = as_positive(s["theta"], "solver.theta");
        if (opts.theta > 1.0) throw ConfigError("solver.theta", "must lie in (0, 1]");
    }
    if (s.contains("lambda")) opts.lambda = as_positive(s["lambda"], "solver.lambda");
    if (s.contains("max_fp_iter")) {
        opts.max_fp_iter = static_cast<int>(as_integer(s["max_fp_iter"], "solver.max_fp_iter", 0, 1000000));
    }
    if (s.contains("max_newton_iter")) {
        opts.max_newton_iter =
            static_cast<int>(as_integer(s["max_newton_iter"], "solver.max_newton_iter", 1, 10000));
    }
    if (s.contains("continuation_stages")) {
        opts.continuation_stages =
            static_cast<int>(as_integer(s["continuation_stages"], "solver.continuation_stages", 1, 10000));
    }
    if (s.contains("strategy")) opts.strategy = parse_strategy(s["strategy"], "solver.strategy");
    opts.linear.lambda = opts.lambda;
}

GrowthSpec parse_growth_entry(const json& g, const std::string& prefix, const char* first, const char* second) {
    if (!g.is_object()) throw ConfigError(prefix, "expected an object");
    reject_unknown(g, prefix, {first, second, "delta"});
    GrowthSpec spec{as_number(require(g, prefix, first), join(prefix, first)),
                    as_number(require(g, prefix, second), join(prefix, second)), std::nullopt};
    if (g.contains("delta")) {
        spec.delta = as_number(g["delta"], join(prefix, "delta"));
        if (*spec.delta < 0.0) throw ConfigError(join(prefix, "delta"), "must be nonnegative");
    }
    return spec;
}

int check_grid_size(long long N, const std::string& key) {
    if (N % 2 != 0) throw ConfigError(key, "must be even");
    return static_cast<int>(N);
}

}  // namespace

VectorField compile_field(std::vector<Expression> components) {
    return [components = std::move(components)](double t, const Vec& x, const Vec& y) {
        Vec out(static_cast<Eigen::Index>(components.size()));
        for (std::size_t i = 0; i < components.size(); ++i) {
            out[static_cast<Eigen::Index>(i)] = components[i].evaluate(t, x, y);
        }
        return out;
    };
}

ProblemConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("<document>", "expected a JSON object");
    }
    reject_unknown(doc, "",
                   {"T", "n", "m", "N", "f1", "f2", "gamma", "eta", "solver", "growth", "sampling", "study",
                    "output"});

    const double T = as_positive(require(doc, "", "T"), "T");
    const int n = static_cast<int>(as_integer(require(doc, "", "n"), "n", 1, 64));
    const int m = static_cast<int>(as_integer(require(doc, "", "m"), "m", 1, 64));

    SolveOptions solve;
    if (doc.contains("N")) solve.N = check_grid_size(as_integer(doc["N"], "N", 16, 1 << 20), "N");

    auto f1 = parse_components(require(doc, "", "f1"), "f1", n, n, m);
    auto f2 = parse_components(require(doc, "", "f2"), "f2", m, n, m);
    auto gamma = parse_boundary(require(doc, "", "gamma"), "gamma", n);
    auto eta = parse_boundary(require(doc, "", "eta"), "eta", m);

    if (doc.contains("solver")) parse_solver(doc["solver"], solve);

    ProblemConfig cfg{SystemProblem{T, n, m, compile_field(f1), compile_field(f2), std::move(gamma), std::move(eta)},
                      std::move(f1), std::move(f2), std::move(solve), std::nullopt, std::nullopt, SampleBox{},
                      StudySpec{}, "mbvp_out"};

    if (doc.contains("growth")) {
        const auto& g = doc["growth"];
        if (!g.is_object()) throw ConfigError("growth", "expected an object");
        reject_unknown(g, "growth", {"f1", "f2"});
        if (g.contains("f1")) cfg.growth_f1 = parse_growth_entry(g["f1"], "growth.f1", "a", "b");
        if (g.contains("f2")) cfg.growth_f2 = parse_growth_entry(g["f2"], "growth.f2", "c", "d");
    }

    if (doc.contains("sampling")) {
        const auto& s = doc["sampling"];
        if (!s.is_object()) throw ConfigError("sampling", "expected an object");
        reject_unknown(s, "sampling", {"radius", "samples", "seed"});
        if (s.contains("radius")) cfg.sampling.radius = as_positive(s["radius"], "sampling.radius");
        if (s.contains("samples")) {
            cfg.sampling.samples = static_cast<int>(as_integer(s["samples"], "sampling.samples", 1000, 10000000));
        }
        if (s.contains("seed")) {
            cfg.sampling.seed = as_seed(s["seed"], "sampling.seed");
            cfg.solve.seed = cfg.sampling.seed;
        }
    }

    if (doc.contains("study")) {
        const auto& s = doc["study"];
        if (!s.is_object()) throw ConfigError("study", "expected an object");
        reject_unknown(s, "study", {"levels", "reference_N"});
        if (s.contains("levels")) {
            const auto& levels = s["levels"];
            if (!levels.is_array() || levels.empty()) {
                throw ConfigError("study.levels", "expected a nonempty array of grid sizes");
            }
            cfg.study.levels.clear();
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const auto key = "study.levels[" + std::to_string(i) + "]";
                cfg.study.levels.push_back(check_grid_size(as_integer(levels[i], key, 16, 1 << 20), key));
            }
        }
        if (s.contains("reference_N")) {
            cfg.study.reference_N =
                check_grid_size(as_integer(s["reference_N"], "study.reference_N", 16, 1 << 20), "study.reference_N");
        }
    }

    if (doc.contains("output")) {
        if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) {
            throw ConfigError("output", "expected a nonempty directory path");
        }
        cfg.output = doc["output"].get<std::string>();
    }
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void override_seed(ProblemConfig& config, std::uint64_t seed) {
    config.sampling.seed = seed;
    config.solve.seed = seed;
}

}  // namespace mbvp
