#include "mbvp/cli.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbvp/errors.hpp"

namespace mbvp {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kGrowthLabel = "sampled certificate";

// nlohmann prints doubles with its own digit generator; reports go through to_chars instead.
void dump(const ojson& value, std::ostream& os, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (value.type()) {
        case ojson::value_t::object: {
            if (value.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                if (!first) os << ",\n";
                first = false;
                os << pad << ojson(key).dump() << ": ";
                dump(item, os, depth + 1);
            }
            os << "\n" << close << "}";
            return;
        }
        case ojson::value_t::array: {
            if (value.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i > 0) os << ",\n";
                os << pad;
                dump(value[i], os, depth + 1);
            }
            os << "\n" << close << "]";
            return;
        }
        case ojson::value_t::number_float: {
            const double x = value.get<double>();
            os << (std::isfinite(x) ? format_real(x) : "null");
            return;
        }
        default:
            os << value.dump();
            return;
    }
}

std::string render_json(const ojson& value) {
    std::ostringstream os;
    dump(value, os, 0);
    os << "\n";
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError(path.string(), "cannot open for writing");
    }
    out << text;
}

ojson real_or_null(double x) {
    return std::isfinite(x) ? ojson(x) : ojson(nullptr);
}

std::string_view method_name(Lambda1Method m) {
    return m == Lambda1Method::Analytic ? "analytic" : "eig_fd";
}

ojson lambda1_json(const Lambda1Estimate& e) {
    return ojson{{"value", e.value}, {"method", method_name(e.method)}, {"grid_N", e.grid_N}};
}

ojson growth_json(const Certification& cert) {
    ojson list = ojson::array();
    for (const auto& c : cert.certificates) {
        ojson item;
        item["role"] = c.role;
        if (c.role == "f1") {
            item["a"] = c.constants.a;
            item["b"] = c.constants.b;
        } else {
            item["c"] = c.constants.c;
            item["d"] = c.constants.d;
        }
        item["delta"] = c.constants.delta;
        item["delta_source"] = c.delta_sampled ? "sampled" : "config";
        item["pass"] = c.check.pass;
        item["worst_violation"] = real_or_null(c.check.worst_violation);
        item["label"] = kGrowthLabel;
        list.push_back(std::move(item));
    }
    return list;
}

void add_selection(ojson& doc, const CaseSelection& sel) {
    doc["case"] = case_name(sel.which);
    doc["bound"] = real_or_null(sel.bound);
    if (sel.beta) {
        doc["beta"] = ojson{{"beta_u", sel.beta->beta_u}, {"beta_v", sel.beta->beta_v}};
    }
}

std::optional<std::uint64_t> seed_from_env() {
    const char* text = std::getenv("MBVP_SEED");
    if (text == nullptr || *text == '\0') return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view sv(text);
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), seed);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) {
        throw ConfigError("MBVP_SEED", "expected a nonnegative integer, got '" + std::string(sv) + "'");
    }
    return seed;
}

ProblemConfig load_with_overrides(const std::string& path, const std::string& out_dir) {
    auto cfg = load_config(path);
    if (const auto seed = seed_from_env()) override_seed(cfg, *seed);
    if (!out_dir.empty()) cfg.output = out_dir;
    return cfg;
}

fs::path prepare_output(const ProblemConfig& cfg) {
    const fs::path dir(cfg.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("output", "cannot create directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

ojson header_json(const ProblemConfig& cfg, int N) {
    ojson doc;
    doc["T"] = cfg.problem.T;
    doc["N"] = N;
    doc["n"] = cfg.problem.n;
    doc["m"] = cfg.problem.m;
    doc["gamma"] = kind_name(cfg.problem.gamma.kind());
    doc["eta"] = kind_name(cfg.problem.eta.kind());
    doc["seed"] = cfg.solve.seed;
    return doc;
}

int cmd_solve(const std::string& path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const auto cfg = load_with_overrides(path, out_dir);
    const auto dir = prepare_output(cfg);

    SolveReport report = [&] {
        try {
            return solve_system(cfg.problem, cfg.solve);
        } catch (const NoConvergence& e) {
            ojson doc = header_json(cfg, cfg.solve.N);
            doc["status"] = "no_convergence";
            doc["best_residual"] = real_or_null(e.best_residual());
            write_text(dir / "report.json", render_json(doc));
            throw;
        }
    }();

    const auto cert = certify(cfg);
    VerifyOptions vopts;
    vopts.tol = cfg.solve.tol;
    vopts.lambda = cfg.solve.lambda;
    const auto checklist = verify_report(cfg.problem, report, cert.hypotheses, vopts);

    ojson doc = header_json(cfg, report.grid.N());
    doc["status"] = "converged";
    doc["strategy"] = strategy_name(report.strategy);
    doc["iterations"] = report.iterations;
    doc["residuals"] = ojson{{"ode", report.ode_res}, {"bc", report.bc_res}};
    doc["residual_ok"] = checklist.residual_ok;
    doc["max_speed"] = ojson{{"u", report.state.u.max_speed()}, {"v", report.state.v.max_speed()}};
    doc["velocity_ok"] = checklist.velocity_ok;
    doc["norms"] = ojson{{"u_h1", report.norms.u_h1}, {"v_h1", report.norms.v_h1}, {"total", report.norms.total}};
    add_selection(doc, checklist.selection);
    doc["bound_ok"] = checklist.bound_ok ? ojson(*checklist.bound_ok) : ojson(nullptr);
    doc["lambda1"] = ojson{{"gamma", lambda1_json(checklist.gamma_l1)}, {"eta", lambda1_json(checklist.eta_l1)}};
    doc["growth"] = growth_json(cert);
    ojson stages = ojson::array();
    for (const auto& s : report.stages) {
        stages.push_back(ojson{{"s", s.s}, {"u_h1_sq", s.u_h1_sq}, {"v_h1_sq", s.v_h1_sq}, {"residual", s.residual}});
    }
    doc["stages"] = std::move(stages);

    write_solution_csv(dir / "solution.csv", report);
    write_text(dir / "report.json", render_json(doc));
    out << "converged by " << strategy_name(report.strategy) << " in " << report.iterations
        << " iterations; case " << case_name(checklist.selection.which) << "; wrote " << dir.string() << "\n";
    (void)err;
    return kExitSuccess;
}

int cmd_check(const std::string& path, const std::string& out_dir, std::ostream& out) {
    const auto cfg = load_with_overrides(path, out_dir);
    const auto dir = prepare_output(cfg);
    const auto cert = certify(cfg);

    const auto estimate = [&](const BoundaryOperator& op) -> std::optional<Lambda1Estimate> {
        try {
            return lambda1_estimate(op, cfg.problem.T);
        } catch (const Unsupported&) {
            return std::nullopt;
        }
    };
    const auto gamma_l1 = estimate(cfg.problem.gamma);
    const auto eta_l1 = estimate(cfg.problem.eta);
    const Lambda1Estimate zero{0.0, Lambda1Method::Analytic, 0};
    const auto selection = select_case(gamma_l1.value_or(zero), eta_l1.value_or(zero), cert.hypotheses, cfg.problem.T);

    ojson doc = header_json(cfg, cfg.solve.N);
    doc["status"] = selection.which == TheoremCase::None ? "not_certified" : "certified";
    add_selection(doc, selection);
    doc["lambda1"] = ojson{{"gamma", gamma_l1 ? lambda1_json(*gamma_l1) : ojson(nullptr)},
                           {"eta", eta_l1 ? lambda1_json(*eta_l1) : ojson(nullptr)}};
    doc["growth"] = growth_json(cert);
    write_text(dir / "report.json", render_json(doc));
    out << "case " << case_name(selection.which) << "; wrote " << (dir / "report.json").string() << "\n";
    return kExitSuccess;
}

int cmd_study(const std::string& path, const std::string& out_dir, std::ostream& out) {
    auto cfg = load_with_overrides(path, out_dir);
    const auto dir = prepare_output(cfg);

    SolveOptions ref_opts = cfg.solve;
    ref_opts.N = cfg.study.reference_N;
    const auto reference = solve_system(cfg.problem, ref_opts);

    std::ostringstream csv;
    csv << "N,h,err_sup,err_h1,ratio_sup,ode_res,bc_res,strategy\n";
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (const int N : cfg.study.levels) {
        SolveOptions opts = cfg.solve;
        opts.N = N;
        const Grid grid(cfg.problem.T, N);
        const SystemState ref{interpolate(reference.state.u, reference.grid, grid),
                              interpolate(reference.state.v, reference.grid, grid)};
        opts.initial_guess = ref;
        const auto report = solve_system(cfg.problem, opts);
        const double err_sup = std::max((report.state.u.u - ref.u.u).cwiseAbs().maxCoeff(),
                                        (report.state.v.u - ref.v.u).cwiseAbs().maxCoeff());
        const double err_h1 =
            std::sqrt(h1_distance_squared(grid, report.state.u, ref.u) + h1_distance_squared(grid, report.state.v, ref.v));
        csv << N << ',' << format_real(grid.step()) << ',' << format_real(err_sup) << ',' << format_real(err_h1)
            << ',' << (std::isfinite(previous) && err_sup > 0.0 ? format_real(previous / err_sup) : "") << ','
            << format_real(report.ode_res) << ',' << format_real(report.bc_res) << ','
            << strategy_name(report.strategy) << '\n';
        previous = err_sup;
    }
    write_text(dir / "study.csv", csv.str());
    out << "wrote " << (dir / "study.csv").string() << "\n";
    return kExitSuccess;
}

int cmd_lambda1(const std::string& bc, double T, int N, int dim, std::ostream& out) {
    const auto kind = parse_kind(bc);
    if (!kind) {
        throw ConfigError("--bc", "unknown boundary kind '" + bc + "'");
    }
    if (*kind == BoundaryKind::LinearPSD || *kind == BoundaryKind::ProjectionProx) {
        throw ConfigError("--bc", "'" + bc + "' needs parameters; use a config file with `check`");
    }
    const auto op = build_boundary(*kind, dim);
    const auto est = lambda1_estimate(op, T, N);
    ojson doc{{"bc", kind_name(*kind)}, {"T", T}, {"dim", dim}};
    doc["lambda1"] = est.value;
    doc["method"] = method_name(est.method);
    doc["grid_N"] = est.grid_N;
    out << render_json(doc);
    return kExitSuccess;
}

std::array<double, 4> parse_entries(const std::string& text) {
    std::array<double, 4> v{};
    std::size_t count = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        if (count == v.size()) {
            throw ConfigError("--entries", "expected exactly four comma-separated numbers");
        }
        const char* first = text.data() + start;
        const char* last = text.data() + comma;
        const auto res = std::from_chars(first, last, v[count]);
        if (res.ec != std::errc() || res.ptr != last) {
            throw ConfigError("--entries", "cannot parse '" + std::string(first, last) + "' as a number");
        }
        ++count;
        start = comma + 1;
    }
    if (count != v.size()) {
        throw ConfigError("--entries", "expected exactly four comma-separated numbers");
    }
    return v;
}

int cmd_matrix(const std::string& entries, std::optional<double> delta, std::optional<double> T, std::ostream& out) {
    if (delta.has_value() != T.has_value()) {
        throw ConfigError(delta ? "--T" : "--delta", "--delta and --T must be given together");
    }
    const auto e = parse_entries(entries);
    const ConvMatrix M(e[0], e[1], e[2], e[3]);
    const auto verdict = is_convergent_to_zero(M);
    ojson doc;
    doc["entries"] = ojson::array({ojson::array({e[0], e[1]}), ojson::array({e[2], e[3]})});
    doc["spectral_radius"] = verdict.spectral_radius;
    doc["convergent"] = verdict.convergent;
    if (verdict.convergent) {
        const auto inv = inverse_I_minus_M(M);
        doc["inverse_I_minus_M"] = ojson::array({ojson::array({inv(0, 0), inv(0, 1)}),
                                                 ojson::array({inv(1, 0), inv(1, 1)})});
        if (delta) {
            if (*delta < 0.0 || *T <= 0.0) {
                throw ConfigError("--delta", "need delta >= 0 and T > 0");
            }
            const auto b = apriori_bound_iv(M, *delta, *T);
            doc["bound"] = ojson{{"beta_u", b.beta_u}, {"beta_v", b.beta_v}, {"total", b.total}};
        }
    } else {
        doc["inverse_I_minus_M"] = nullptr;
        if (delta) doc["bound"] = nullptr;
    }
    out << render_json(doc);
    return kExitSuccess;
}

}  // namespace

std::string format_real(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

Certification certify(const ProblemConfig& cfg) {
    Certification cert;
    const auto& p = cfg.problem;
    const auto run = [&](const char* role, const VectorField& f, GrowthRole which, GrowthConstants c,
                         const std::optional<double>& delta) {
        const bool sampled = !delta.has_value();
        c.delta = sampled ? sampled_delta(f, which, c, cfg.sampling, p.T, p.n, p.m) : *delta;
        const auto check = check_growth(f, which, c, cfg.sampling, p.T, p.n, p.m);
        cert.certificates.push_back({role, c, sampled, check});
        return check.pass ? std::optional<GrowthConstants>(c) : std::nullopt;
    };
    if (cfg.growth_f1) {
        GrowthConstants c;
        c.a = cfg.growth_f1->first;
        c.b = cfg.growth_f1->second;
        cert.hypotheses.f1 = run("f1", p.f1, GrowthRole::F1, c, cfg.growth_f1->delta);
    }
    if (cfg.growth_f2) {
        GrowthConstants c;
        c.c = cfg.growth_f2->first;
        c.d = cfg.growth_f2->second;
        cert.hypotheses.f2 = run("f2", p.f2, GrowthRole::F2, c, cfg.growth_f2->delta);
    }
    return cert;
}

void write_solution_csv(const fs::path& path, const SolveReport& report) {
    const auto& u = report.state.u;
    const auto& v = report.state.v;
    const Mat du = u.velocity();
    const Mat dv = v.velocity();

    std::string text = "t";
    for (int j = 1; j <= u.dim(); ++j) text += ",u" + std::to_string(j);
    for (int j = 1; j <= v.dim(); ++j) text += ",v" + std::to_string(j);
    for (int j = 1; j <= u.dim(); ++j) text += ",du" + std::to_string(j);
    for (int j = 1; j <= v.dim(); ++j) text += ",dv" + std::to_string(j);
    text += '\n';
    for (int i = 0; i < report.grid.nodes(); ++i) {
        text += format_real(report.grid.node(i));
        for (const Mat* block : {&u.u, &v.u, &du, &dv}) {
            for (Eigen::Index j = 0; j < block->cols(); ++j) {
                text += ',';
                text += format_real((*block)(i, j));
            }
        }
        text += '\n';
    }
    write_text(path, text);
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solver for coupled boundary value problems with the relativistic operator", "mbvp"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* solve = app.add_subcommand("solve", "Solve the problem and write solution.csv and report.json");
    solve->add_option("config", config_path, "Problem file (JSON)")->required();
    solve->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* check = app.add_subcommand("check", "Certify growth hypotheses and write report.json without solving");
    check->add_option("config", config_path, "Problem file (JSON)")->required();
    check->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* study = app.add_subcommand("study", "Grid convergence study against a fine reference; writes study.csv");
    study->add_option("config", config_path, "Problem file (JSON)")->required();
    study->add_option("--out", out_dir, "Output directory (overrides the config)");

    std::string bc;
    double T = 1.0;
    int N = 400;
    int dim = 1;
    auto* lambda1 = app.add_subcommand("lambda1", "First eigenvalue of the boundary operator's domain");
    lambda1->add_option("--bc", bc, "Boundary kind")->required();
    lambda1->add_option("--T", T, "Interval length")->required()->check(CLI::PositiveNumber);
    lambda1->add_option("--N", N, "Grid subintervals")->required();
    lambda1->add_option("--dim", dim, "Dimension q")->check(CLI::Range(1, 64));

    std::string entries;
    std::optional<double> delta;
    std::optional<double> matrix_T;
    auto* matrix = app.add_subcommand("matrix", "Spectral radius, (I - M)^-1 and a priori bound of a 2x2 matrix");
    matrix->add_option("--entries", entries, "a,b,c,d")->required();
    matrix->add_option("--delta", delta, "Growth constant delta");
    matrix->add_option("--T", matrix_T, "Interval length");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitConfigError;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path, out_dir, out, err);
        if (check->parsed()) return cmd_check(config_path, out_dir, out);
        if (study->parsed()) return cmd_study(config_path, out_dir, out);
        if (lambda1->parsed()) return cmd_lambda1(bc, T, N, dim, out);
        if (matrix->parsed()) return cmd_matrix(entries, delta, matrix_T, out);
    } catch (const NoConvergence& e) {
        err << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const NewtonDivergence& e) {
        err << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const InvalidParams& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const NegativeEntry& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}

}  // namespace mbvp
