#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "field_io.h"
#include "json.hpp"

using namespace conevortex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "conevortex_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CONEVORTEX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

}  // namespace

TEST_CASE("kw-solve: constant fixture converges, infeasible fixture exits 2") {
    const fs::path dir = work_dir() / "kw";
    fs::create_directories(dir);
    TorusGrid g(64, 64);
    write_cvf1(dir / "B.cvf1", RealField(g, 1.0));
    write_cvf1(dir / "w.cvf1", RealField(g, 2.0));
    write_cvf1(dir / "w_zero.cvf1", RealField(g, 0.0));

    write_file(dir / "ok.json", "{\"B\": \"" + (dir / "B.cvf1").string() + "\", \"w\": \"" +
                                    (dir / "w.cvf1").string() + "\", \"out_dir\": \"" +
                                    (dir / "out").string() + "\"}");
    CHECK(run_cli("kw-solve --config " + (dir / "ok.json").string()) == 0);
    RealField f = read_cvf1_real(dir / "out" / "f.cvf1");
    CHECK(sup_distance(f, RealField(g, 0.5 * std::log(2.0))) <= 1e-12);

    std::ifstream cert_in(dir / "out" / "certificate.json");
    json cert = json::parse(cert_in);
    CHECK(cert["status"] == "converged");
    CHECK(cert["residual_sup"].get<double>() <= 1e-10);
    CHECK(fs::exists(dir / "out" / "energy_trace.csv"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));

    write_file(dir / "bad.json", "{\"B\": \"" + (dir / "B.cvf1").string() + "\", \"w\": \"" +
                                     (dir / "w_zero.cvf1").string() + "\", \"out_dir\": \"" +
                                     (dir / "out2").string() + "\"}");
    CHECK(run_cli("kw-solve --config " + (dir / "bad.json").string()) == 2);
    std::ifstream bad_in(dir / "out2" / "certificate.json");
    json bad = json::parse(bad_in);
    CHECK(bad["reason"] == "NonPositiveMeanW");

    write_file(dir / "picard.json", "{\"B\": \"" + (dir / "B.cvf1").string() + "\", \"w\": \"" +
                                        (dir / "w.cvf1").string() +
                                        "\", \"method\": \"picard\", \"out_dir\": \"" +
                                        (dir / "out3").string() + "\"}");
    CHECK(run_cli("kw-solve --config " + (dir / "picard.json").string()) == 0);
    std::ifstream pc_in(dir / "out3" / "certificate.json");
    json pc = json::parse(pc_in);
    CHECK(pc["method"] == "picard");
    RealField fp = read_cvf1_real(dir / "out3" / "f.cvf1");
    CHECK(sup_distance(fp, RealField(g, 0.5 * std::log(2.0))) <= 1e-10);
}

TEST_CASE("kw-solve: forward-constructed fixture certifies at 1e-8") {
    const fs::path dir = work_dir() / "kw_mfg";
    fs::create_directories(dir);
    TorusGrid g(64, 64);
    RealField f_star = RealField::sample(g, [](double x, double y) {
        return 0.3 * std::cos(kTwoPi * x) * std::sin(kTwoPi * y);
    });
    RealField B = RealField::sample(g, [](double, double y) {
        return 1.0 + 0.5 * std::cos(kTwoPi * y);
    });
    RealField w = laplacian(f_star);
    for (std::size_t i = 0; i < w.v.size(); ++i)
        w.v[i] += B.v[i] * std::exp(2.0 * f_star.v[i]);
    write_cvf1(dir / "B.cvf1", B);
    write_cvf1(dir / "w.cvf1", w);
    write_file(dir / "cfg.json", "{\"B\": \"" + (dir / "B.cvf1").string() + "\", \"w\": \"" +
                                     (dir / "w.cvf1").string() + "\", \"out_dir\": \"" +
                                     (dir / "out").string() + "\"}");
    CHECK(run_cli("kw-solve --config " + (dir / "cfg.json").string()) == 0);
    std::ifstream cert_in(dir / "out" / "certificate.json");
    json cert = json::parse(cert_in);
    CHECK(cert["residual_sup"].get<double>() <= 1e-8);
    RealField f = read_cvf1_real(dir / "out" / "f.cvf1");
    CHECK(sup_distance(f, f_star) <= 1e-8);
}

TEST_CASE("sv-gaugefix feeds pi-map; independent components give NoDivisor") {
    const fs::path dir = work_dir() / "svpi";
    fs::create_directories(dir);
    write_file(dir / "sv.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 2, \"tau\": 20.0, \"n\": 2, "
               "\"coeffs\": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]], "
               "\"out_dir\": \"" + (dir / "sv").string() + "\"}");
    CHECK(run_cli("sv-gaugefix --config " + (dir / "sv.json").string()) == 0);
    CHECK(fs::exists(dir / "sv" / "u_0.cvf1"));
    CHECK(fs::exists(dir / "sv" / "u_1.cvf1"));
    std::ifstream cert_in(dir / "sv" / "certificate.json");
    json cert = json::parse(cert_in);
    CHECK(cert["moment_sup"].get<double>() <= 1e-8);
    CHECK(cert.contains("kw_iterations"));
    CHECK(cert.contains("threshold_margin"));

    write_file(dir / "pi.json", "{\"solution_dir\": \"" + (dir / "sv").string() +
                                    "\", \"out_dir\": \"" + (dir / "pi").string() + "\"}");
    CHECK(run_cli("pi-map --config " + (dir / "pi.json").string()) == 0);
    std::ifstream pi_in(dir / "pi" / "divisor.json");
    json pi = json::parse(pi_in);
    CHECK(pi.value("no_divisor", false));
    CHECK(pi["min_mu"].get<double>() > 0.0);
    CHECK(fs::exists(dir / "pi" / "modulus_sq.cvf1"));
}

TEST_CASE("config violations exit with the usage code") {
    const fs::path dir = work_dir() / "usage";
    fs::create_directories(dir);
    write_file(dir / "broken.json", "{\"tau\": not json");
    CHECK(run_cli("kw-solve --config " + (dir / "broken.json").string()) == 64);
    write_file(dir / "extra.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 1, \"tau\": 10.0, \"whatever\": 1, "
               "\"out_dir\": \"" + (dir / "o").string() + "\"}");
    CHECK(run_cli("vortex-make --config " + (dir / "extra.json").string()) == 64);
    CHECK(run_cli("vortex-make") == 64);  // no config at all
    CHECK(run_cli("pi-map --config " + (dir / "missing.json").string()) == 64);
}

TEST_CASE("vortex-make: threshold exit and divisor output") {
    const fs::path dir = work_dir() / "vm";
    fs::create_directories(dir);
    write_file(dir / "low.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 1, \"tau\": 6.0, "
               "\"coeffs\": [[1.0, 0.0]], \"out_dir\": \"" + (dir / "low").string() + "\"}");
    CHECK(run_cli("vortex-make --config " + (dir / "low.json").string()) == 2);

    write_file(dir / "ok.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 1, \"tau\": 10.0, "
               "\"coeffs\": [[1.0, 0.0]], \"out_dir\": \"" + (dir / "ok").string() + "\"}");
    CHECK(run_cli("vortex-make --config " + (dir / "ok.json").string()) == 0);
    std::ifstream div_in(dir / "ok" / "divisor.json");
    Divisor div = divisor_from_json(std::string(std::istreambuf_iterator<char>(div_in), {}));
    CHECK(div.degree() == 1);
    std::ifstream cert_in(dir / "ok" / "certificate.json");
    json cert = json::parse(cert_in);
    CHECK(cert["integral_rel_err"].get<double>() <= 1e-4);

    // pi-map consumes the solution directory
    write_file(dir / "pi.json", "{\"solution_dir\": \"" + (dir / "ok").string() +
                                    "\", \"out_dir\": \"" + (dir / "pi").string() + "\"}");
    CHECK(run_cli("pi-map --config " + (dir / "pi.json").string()) == 0);
    std::ifstream pi_in(dir / "pi" / "divisor.json");
    json pi = json::parse(pi_in);
    CHECK(pi["degree"].get<int>() == 1);
}

TEST_CASE("threshold-scan: csv rows above threshold, rejection below") {
    const fs::path dir = work_dir() / "scan";
    fs::create_directories(dir);
    write_file(dir / "ok.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 1, \"tau_list\": [8.0, 10.0], "
               "\"coeffs\": [[1.0, 0.0]], \"out_dir\": \"" + (dir / "out").string() + "\"}");
    CHECK(run_cli("threshold-scan --config " + (dir / "ok.json").string()) == 0);
    std::ifstream csv(dir / "out" / "scan.csv");
    std::string header, row1, row2, extra;
    std::getline(csv, header);
    CHECK(header == "tau,integral_mu,predicted,rel_err");
    CHECK(static_cast<bool>(std::getline(csv, row1)));
    CHECK(static_cast<bool>(std::getline(csv, row2)));
    CHECK_FALSE(static_cast<bool>(std::getline(csv, extra)));
    CHECK(row1.substr(0, 2) == "8,");   // ordered by tau
    CHECK(row2.substr(0, 3) == "10,");
    const double rel = std::stod(row1.substr(row1.rfind(',') + 1));
    CHECK(rel <= 1e-4);

    write_file(dir / "low.json",
               "{\"grid\": {\"nx\": 64, \"ny\": 64}, \"d\": 1, \"tau_list\": [5.0, 8.0], "
               "\"coeffs\": [[1.0, 0.0]], \"out_dir\": \"" + (dir / "out2").string() + "\"}");
    CHECK(run_cli("threshold-scan --config " + (dir / "low.json").string()) == 2);
}

TEST_CASE("flags override config values") {
    const fs::path dir = work_dir() / "flags";
    fs::create_directories(dir);
    write_file(dir / "cfg.json",
               "{\"grid\": {\"nx\": 32, \"ny\": 32}, \"d\": 1, \"tau\": 10.0, \"seed\": 3}");
    CHECK(run_cli("vortex-make --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "out").string() + " --seed 11 --quiet") == 0);
    std::ifstream m_in(dir / "out" / "manifest.json");
    json m = json::parse(m_in);
    CHECK(m["seed"].get<std::uint64_t>() == 11);
    CHECK(m["backend"] == "spectral");
    CHECK(m["version"].is_string());
    CHECK(m["config_hash"].is_string());
}
