#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "config_schemas.h"
#include "field_io.h"
#include "kazdan_warner.h"
#include "theta_bundle.h"
#include "torus_field.h"
#include "version.h"
#include "vortex_pipeline.h"

using nlohmann::json;
using namespace conevortex;
namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

// Anything wrong with the invocation itself (config, schema, files): exit 64.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// schema validation (the subset of JSON Schema the published schemas use)

void validate_node(const json& value, const json& schema, const std::string& path,
                   std::vector<std::string>& errs) {
    if (schema.contains("$ref")) {
        if (schema["$ref"] == "grid") {
            validate_node(value, json::parse(schemas::kGridFragment), path, errs);
            return;
        }
        errs.push_back(path + ": unresolved $ref");
        return;
    }
    const std::string type = schema.value("type", "");
    if (type == "object") {
        if (!value.is_object()) {
            errs.push_back(path + ": expected object");
            return;
        }
        for (const auto& req : schema.value("required", json::array()))
            if (!value.contains(req.get<std::string>()))
                errs.push_back(path + ": missing required key '" + req.get<std::string>() + "'");
        const json props = schema.value("properties", json::object());
        const bool extra_ok = schema.value("additionalProperties", true);
        for (const auto& [key, sub] : value.items()) {
            if (props.contains(key)) {
                validate_node(sub, props.at(key), path + "." + key, errs);
            } else if (!extra_ok) {
                errs.push_back(path + ": unknown key '" + key + "'");
            }
        }
        return;
    }
    if (type == "array") {
        if (!value.is_array()) {
            errs.push_back(path + ": expected array");
            return;
        }
        if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>())
            errs.push_back(path + ": fewer than " + std::to_string(schema["minItems"].get<int>()) +
                           " items");
        if (schema.contains("items"))
            for (std::size_t i = 0; i < value.size(); ++i)
                validate_node(value[i], schema["items"], path + "[" + std::to_string(i) + "]", errs);
        return;
    }
    if (type == "string") {
        if (!value.is_string()) {
            errs.push_back(path + ": expected string");
            return;
        }
        if (schema.contains("enum")) {
            bool hit = false;
            for (const auto& e : schema["enum"]) hit = hit || (e == value);
            if (!hit) errs.push_back(path + ": value not in enum");
        }
        return;
    }
    if (type == "integer" || type == "number") {
        if (type == "integer" ? !value.is_number_integer() : !value.is_number()) {
            errs.push_back(path + ": expected " + type);
            return;
        }
        const double x = value.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            errs.push_back(path + ": below minimum");
        if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
            errs.push_back(path + ": must exceed " +
                           std::to_string(schema["exclusiveMinimum"].get<double>()));
        return;
    }
    if (type == "boolean" && !value.is_boolean()) errs.push_back(path + ": expected boolean");
}

json load_validated_config(const std::string& path, const char* schema_text) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json config;
    try {
        config = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    std::vector<std::string> errs;
    validate_node(config, json::parse(schema_text), "config", errs);
    if (!errs.empty()) {
        std::string msg = "config fails schema validation:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return config;
}

// ---------------------------------------------------------------------------
// run context and shared helpers

struct RunContext {
    json config;
    fs::path out_dir;
    std::uint64_t seed = 0;
    Backend backend = Backend::spectral;
    bool quiet = false;
    std::string config_hash;
    std::optional<long> threads_cap;
};

void say(const RunContext& ctx, const std::string& line) {
    if (!ctx.quiet) std::cout << line << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const RunContext& ctx, const std::string& subcommand) {
    json m;
    m["tool"] = "conevortex";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config_hash"] = ctx.config_hash;
    m["seed"] = ctx.seed;
    m["backend"] = backend_name(ctx.backend);
    if (ctx.threads_cap) m["threads_cap"] = *ctx.threads_cap;
    write_json_file(ctx.out_dir / "manifest.json", m);
}

std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

TorusGrid grid_from_config(const json& config) {
    const json& g = config.at("grid");
    return TorusGrid(g.at("nx").get<int>(), g.at("ny").get<int>(), g.value("lx", 1.0),
                     g.value("ly", 1.0));
}

KwOptions kw_options(const RunContext& ctx) {
    KwOptions opts;
    opts.backend = ctx.backend;
    if (ctx.config.contains("tol")) opts.tol = ctx.config["tol"].get<double>();
    if (ctx.config.contains("max_iter")) opts.max_iter = ctx.config["max_iter"].get<int>();
    return opts;
}

std::vector<cd> coeffs_from_json(const json& arr) {
    std::vector<cd> out;
    for (const auto& pair : arr) out.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return out;
}

json coeffs_to_json(const std::vector<cd>& coeffs) {
    json out = json::array();
    for (const auto& c : coeffs) out.push_back({c.real(), c.imag()});
    return out;
}

// Seeded coefficients via the raw generator; pinned across runs.
std::vector<cd> seeded_coeffs(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1p-53 * 2.0 - 1.0; };
    std::vector<cd> out(static_cast<std::size_t>(d));
    for (auto& c : out) c = {unit(), unit()};
    return out;
}

json divisor_report(const PiMapResult& pm) {
    json j;
    if (pm.divisor) {
        j["points"] = json::array();
        for (const auto& p : pm.divisor->points) j["points"].push_back({p[0], p[1]});
        j["multiplicities"] = pm.divisor->multiplicities;
        j["degree"] = pm.divisor->degree();
    } else {
        j["no_divisor"] = true;
    }
    j["min_mu"] = pm.min_mu;
    j["max_mu"] = pm.max_mu;
    return j;
}

json residual_json(const SvResidual& r) {
    return json{{"dbar_sup", r.dbar_sup}, {"moment_sup", r.moment_sup}, {"f02_sup", r.f02_sup}};
}

void dump_connection(const RunContext& ctx, const UnitaryConnection& A) {
    write_cvf1(ctx.out_dir / "A_ax.cvf1", A.a_x);
    write_cvf1(ctx.out_dir / "A_ay.cvf1", A.a_y);
    write_cvf1(ctx.out_dir / "A_curv.cvf1", A.curvature);
}

json solution_manifest(const std::string& kind, int n, int d, double tau, const TorusGrid& grid,
                       const std::vector<std::vector<cd>>& coeffs,
                       const std::vector<std::string>& section_files) {
    json s;
    s["kind"] = kind;
    s["n"] = n;
    s["degree"] = d;
    s["tau"] = tau;
    s["metric"] = "gaussian-y";
    s["periods"] = {grid.lx, grid.ly};
    s["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"lx", grid.lx}, {"ly", grid.ly}};
    s["coeffs"] = json::array();
    for (const auto& c : coeffs) s["coeffs"].push_back(coeffs_to_json(c));
    s["files"] = {{"sections", section_files},
                  {"a_x", "A_ax.cvf1"},
                  {"a_y", "A_ay.cvf1"},
                  {"curvature", "A_curv.cvf1"},
                  {"log_gauge", "f.cvf1"}};
    return s;
}

// ---------------------------------------------------------------------------
// subcommands

int run_kw_solve(RunContext& ctx) {
    RealField B = read_cvf1_real(ctx.config.at("B").get<std::string>());
    RealField w = read_cvf1_real(ctx.config.at("w").get<std::string>());
    KwProblem problem(std::move(B), std::move(w));
    const KwOptions opts = kw_options(ctx);
    const bool picard = ctx.config.value("method", "newton") == std::string("picard");

    write_manifest(ctx, "kw-solve");
    KwSolution sol;
    try {
        sol = picard ? kw_solve_picard(problem, opts) : kw_solve(problem, opts);
    } catch (const InfeasibleProblem& e) {
        write_json_file(ctx.out_dir / "certificate.json",
                        json{{"status", "infeasible"}, {"reason", kw_infeasibility_name(e.reason)}});
        std::cerr << "kw-solve: " << e.what() << "\n";
        return 2;
    } catch (const MaxIterationsExceeded& e) {
        write_json_file(ctx.out_dir / "certificate.json",
                        json{{"status", "max_iterations"},
                             {"best_residual", e.best_residual},
                             {"iterations", e.iterations}});
        std::cerr << "kw-solve: " << e.what() << "\n";
        return 3;
    }

    write_cvf1(ctx.out_dir / "f.cvf1", sol.f);
    std::string csv = "iteration,energy\n";
    for (std::size_t i = 0; i < sol.energy_trace.size(); ++i)
        csv += std::to_string(i) + "," + fmt_g17(sol.energy_trace[i]) + "\n";
    write_text(ctx.out_dir / "energy_trace.csv", csv);
    write_json_file(ctx.out_dir / "certificate.json",
                    json{{"status", "converged"},
                         {"residual_sup", sol.residual_sup},
                         {"residual_sup_stencil", sol.residual_sup_stencil},
                         {"iterations", sol.iterations},
                         {"method", picard ? "picard" : "newton"},
                         {"energy", sol.energy_trace.back()}});
    say(ctx, "kw-solve: converged in " + std::to_string(sol.iterations) +
                 " iterations, residual " + fmt_g17(sol.residual_sup));
    return 0;
}

int run_vortex_make(RunContext& ctx) {
    const TorusGrid grid = grid_from_config(ctx.config);
    const int d = ctx.config.at("d").get<int>();
    const double tau = ctx.config.at("tau").get<double>();
    std::vector<cd> coeffs = ctx.config.contains("coeffs")
                                 ? coeffs_from_json(ctx.config["coeffs"])
                                 : seeded_coeffs(d, ctx.seed);
    if (static_cast<int>(coeffs.size()) != d)
        throw ConfigError("vortex-make: need exactly d coefficient pairs");

    HkOptions opts;
    opts.backend = ctx.backend;
    opts.kw = kw_options(ctx);

    write_manifest(ctx, "vortex-make");
    std::optional<TauVortexResult> solved;
    try {
        solved = tau_vortex_solve(coeffs, d, tau, grid, opts);
    } catch (const BelowThreshold& e) {
        write_json_file(ctx.out_dir / "certificate.json",
                        json{{"status", "below_threshold"}, {"tau", e.tau}, {"threshold", e.threshold}});
        std::cerr << "vortex-make: " << e.what() << "\n";
        return 2;
    } catch (const MaxIterationsExceeded& e) {
        std::cerr << "vortex-make: " << e.what() << "\n";
        return 3;
    }
    TauVortexResult& vx = *solved;

    write_cvf1_section_values(ctx.out_dir / "phi.cvf1", vx.phi);
    dump_connection(ctx, vx.A);
    write_cvf1(ctx.out_dir / "f.cvf1", vx.f);
    write_json_file(ctx.out_dir / "solution.json",
                    solution_manifest("tau-vortex", 1, d, tau, grid, {coeffs}, {"phi.cvf1"}));

    const Divisor div = divisor_extract_stable(vx.phi);
    write_text(ctx.out_dir / "divisor.json", divisor_to_json(div));

    const double integral = integrate(vx.phi.pointwise_norm_sq());
    const double predicted = 2.0 * (tau * grid.vol() - kTwoPi * d);
    json cert = residual_json(vx.residual);
    cert["status"] = "converged";
    cert["kw_iterations"] = vx.kw.iterations;
    cert["threshold_margin"] = vx.threshold_margin;
    cert["integral_phi_sq"] = integral;
    cert["predicted_integral"] = predicted;
    cert["integral_rel_err"] = std::abs(integral - predicted) / std::abs(predicted);
    write_json_file(ctx.out_dir / "certificate.json", cert);
    say(ctx, "vortex-make: divisor degree " + std::to_string(div.degree()) +
                 ", integral rel err " + fmt_g17(cert["integral_rel_err"].get<double>()));
    return 0;
}

int run_sv_gaugefix(RunContext& ctx) {
    const TorusGrid grid = grid_from_config(ctx.config);
    const int d = ctx.config.at("d").get<int>();
    const int n = ctx.config.at("n").get<int>();
    const double tau = ctx.config.at("tau").get<double>();

    std::vector<std::vector<cd>> coeffs;
    if (ctx.config.contains("coeffs")) {
        for (const auto& comp : ctx.config["coeffs"]) coeffs.push_back(coeffs_from_json(comp));
        if (static_cast<int>(coeffs.size()) != n)
            throw ConfigError("sv-gaugefix: need one coefficient list per component");
    } else {
        for (int k = 0; k < n; ++k) coeffs.push_back(seeded_coeffs(d, ctx.seed + k));
    }
    for (const auto& c : coeffs)
        if (static_cast<int>(c.size()) != d)
            throw ConfigError("sv-gaugefix: each component needs d coefficient pairs");

    HkOptions opts;
    opts.backend = ctx.backend;
    opts.kw = kw_options(ctx);

    write_manifest(ctx, "sv-gaugefix");
    std::vector<ComplexSection> u0;
    for (const auto& c : coeffs) u0.push_back(theta_combination(d, grid, c));
    std::optional<GaugeFixResult> solved;
    try {
        solved = hk_gauge_fix(u0, background_connection(d, grid), tau, opts);
    } catch (const BelowThreshold& e) {
        write_json_file(ctx.out_dir / "certificate.json",
                        json{{"status", "below_threshold"}, {"tau", e.tau}, {"threshold", e.threshold}});
        std::cerr << "sv-gaugefix: " << e.what() << "\n";
        return 2;
    } catch (const Unstable& e) {
        write_json_file(ctx.out_dir / "certificate.json", json{{"status", "unstable"}});
        std::cerr << "sv-gaugefix: " << e.what() << "\n";
        return 2;
    } catch (const MaxIterationsExceeded& e) {
        std::cerr << "sv-gaugefix: " << e.what() << "\n";
        return 3;
    }
    GaugeFixResult& gf = *solved;

    std::vector<std::string> files;
    for (int k = 0; k < n; ++k) {
        files.push_back("u_" + std::to_string(k) + ".cvf1");
        write_cvf1_section_values(ctx.out_dir / files.back(), gf.cfg.u[k]);
    }
    dump_connection(ctx, gf.cfg.A);
    write_cvf1(ctx.out_dir / "f.cvf1", gf.f);
    write_json_file(ctx.out_dir / "solution.json",
                    solution_manifest("sv-solution", n, d, tau, grid, coeffs, files));
    json cert = residual_json(gf.residual);
    cert["status"] = "converged";
    cert["kw_iterations"] = gf.kw.iterations;
    cert["threshold_margin"] = gf.threshold_margin;
    write_json_file(ctx.out_dir / "certificate.json", cert);
    say(ctx, "sv-gaugefix: moment residual " + fmt_g17(gf.residual.moment_sup));
    return 0;
}

// Reads a solution directory written by vortex-make or sv-gaugefix and
// rebuilds the configuration with full analytic section data.
Configuration load_solution(const fs::path& dir) {
    std::ifstream is(dir / "solution.json");
    if (!is) throw ConfigError("cannot open " + (dir / "solution.json").string());
    json s = json::parse(is);
    const json& gj = s.at("grid");
    const TorusGrid grid(gj.at("nx").get<int>(), gj.at("ny").get<int>(), gj.value("lx", 1.0),
                         gj.value("ly", 1.0));
    const int d = s.at("degree").get<int>();
    const double tau = s.at("tau").get<double>();
    const LineBundle bundle(d, grid);

    RealField log_gauge = read_cvf1_real(dir / s.at("files").at("log_gauge").get<std::string>());
    std::vector<ComplexSection> sections;
    const auto section_files = s.at("files").at("sections").get<std::vector<std::string>>();
    for (std::size_t k = 0; k < section_files.size(); ++k) {
        SectionBasisData data;
        data.coeffs = coeffs_from_json(s.at("coeffs").at(k));
        data.log_gauge = log_gauge;
        ComplexSection sec = ComplexSection::from_basis(bundle, std::move(data));
        // integrity: the dumped samples must match the analytic rebuild
        ComplexField dumped = read_cvf1_complex(dir / section_files[k]);
        if (dumped.grid != grid)
            throw ConfigError("solution dir " + dir.string() + ": grid mismatch in " +
                              section_files[k]);
        double gap = 0.0, scale = 1e-300;
        for (std::size_t i = 0; i < sec.v.size(); ++i) {
            gap = std::max(gap, std::abs(sec.v[i] - dumped.v[i]));
            scale = std::max(scale, std::abs(sec.v[i]));
        }
        if (gap > 1e-10 * scale)
            throw ConfigError("solution dir " + dir.string() + ": section samples in " +
                              section_files[k] + " do not match the manifest data");
        sections.push_back(std::move(sec));
    }

    UnitaryConnection A(bundle, read_cvf1_real(dir / s.at("files").at("a_x").get<std::string>()),
                        read_cvf1_real(dir / s.at("files").at("a_y").get<std::string>()),
                        read_cvf1_real(dir / s.at("files").at("curvature").get<std::string>()));
    return Configuration(std::move(sections), std::move(A), tau);
}

int run_pi_map(RunContext& ctx) {
    Configuration cfg = load_solution(ctx.config.at("solution_dir").get<std::string>());
    write_manifest(ctx, "pi-map");
    const PiMapResult pm = pi_map(cfg, 1e-6, 1e-6, ctx.backend);
    write_cvf1(ctx.out_dir / "modulus_sq.cvf1", pm.modulus_sq);
    write_json_file(ctx.out_dir / "divisor.json", divisor_report(pm));
    say(ctx, pm.divisor ? "pi-map: divisor degree " + std::to_string(pm.divisor->degree())
                        : "pi-map: no divisor (min mu " + fmt_g17(pm.min_mu) + ")");
    return 0;
}

int run_threshold_scan(RunContext& ctx) {
    const TorusGrid grid = grid_from_config(ctx.config);
    const int d = ctx.config.at("d").get<int>();
    std::vector<double> taus = ctx.config.at("tau_list").get<std::vector<double>>();
    std::sort(taus.begin(), taus.end());
    std::vector<cd> coeffs = ctx.config.contains("coeffs")
                                 ? coeffs_from_json(ctx.config["coeffs"])
                                 : seeded_coeffs(d, ctx.seed);
    if (static_cast<int>(coeffs.size()) != d)
        throw ConfigError("threshold-scan: need exactly d coefficient pairs");

    HkOptions opts;
    opts.backend = ctx.backend;
    opts.kw = kw_options(ctx);

    const double threshold = kTwoPi * d / grid.vol();
    for (double tau : taus)
        if (tau - threshold < opts.threshold_margin_rel * std::max(1.0, std::abs(tau))) {
            std::cerr << "threshold-scan: tau = " << tau << " does not clear the threshold "
                      << threshold << "\n";
            return 2;
        }

    write_manifest(ctx, "threshold-scan");
    std::string csv = "tau,integral_mu,predicted,rel_err\n";
    for (double tau : taus) {
        TauVortexResult vx = tau_vortex_solve(coeffs, d, tau, grid, opts);
        const double integral = integrate(vx.phi.pointwise_norm_sq());
        const double predicted = 2.0 * grid.vol() * (tau - threshold);
        const double rel = std::abs(integral - predicted) / std::abs(predicted);
        csv += fmt_g17(tau) + "," + fmt_g17(integral) + "," + fmt_g17(predicted) + "," +
               fmt_g17(rel) + "\n";
    }
    write_text(ctx.out_dir / "scan.csv", csv);
    say(ctx, "threshold-scan: " + std::to_string(taus.size()) + " points written");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"abelian vortex workbench on the flat torus"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_override, backend_override = "spectral";
    std::uint64_t seed_override = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_override, "output directory");
    app.add_option("--seed", seed_override, "64-bit seed for randomized inputs");
    app.add_option("--backend", backend_override, "spectral|stencil")
        ->check(CLI::IsMember({"spectral", "stencil"}));
    app.add_flag("--quiet", quiet, "suppress progress lines");

    std::map<std::string, std::pair<const char*, int (*)(RunContext&)>> commands = {
        {"kw-solve", {schemas::kKwSolve, run_kw_solve}},
        {"vortex-make", {schemas::kVortexMake, run_vortex_make}},
        {"sv-gaugefix", {schemas::kSvGaugeFix, run_sv_gaugefix}},
        {"pi-map", {schemas::kPiMap, run_pi_map}},
        {"threshold-scan", {schemas::kThresholdScan, run_threshold_scan}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name);
    CLI::App* print_schema =
        app.add_subcommand("print-schema", "print the JSON schema for a subcommand config");
    std::string schema_name;
    print_schema->add_option("name", schema_name, "subcommand name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    if (print_schema->parsed()) {
        if (schema_name == "grid") {
            std::cout << schemas::kGridFragment << "\n";
            return 0;
        }
        auto it = commands.find(schema_name);
        if (it == commands.end()) {
            std::cerr << "unknown subcommand '" << schema_name << "'\n";
            return 64;
        }
        std::cout << it->second.first << "\n";
        return 0;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    const auto [schema_text, runner] = commands.at(sub);

    try {
        if (config_path.empty()) throw ConfigError("--config is required");
        RunContext ctx;
        ctx.config = load_validated_config(config_path, schema_text);
        ctx.quiet = quiet;
        ctx.config_hash = hex64(fnv1a64(ctx.config.dump()));
        ctx.seed = app.count("--seed") ? seed_override
                                       : ctx.config.value("seed", std::uint64_t{0});
        ctx.backend = app.count("--backend")
                          ? backend_from_name(backend_override)
                          : backend_from_name(ctx.config.value("backend", "spectral"));
        std::string out = !out_override.empty() ? out_override : ctx.config.value("out_dir", "");
        if (out.empty()) throw ConfigError("no output directory (set out_dir or pass --out)");
        ctx.out_dir = out;
        fs::create_directories(ctx.out_dir);
        if (const char* threads = std::getenv("CONEVORTEX_THREADS"))
            ctx.threads_cap = std::strtol(threads, nullptr, 10);
        return runner(ctx);
    } catch (const ConfigError& e) {
        std::cerr << sub << ": " << e.what() << "\n";
        return 64;
    } catch (const json::exception& e) {
        std::cerr << sub << ": malformed data: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << sub << ": " << e.what() << "\n";
        return 1;
    }
}
