#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kwe/cli_io.hpp"
#include "kwe/fluxes.hpp"

using namespace kwe;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kwe_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("config defaults and overrides") {
    const RunConfig d = parse_config("{}");
    CHECK(d.grid.n == 401);
    CHECK(d.forcing.eps == 0.01);
    CHECK(d.quad.panels_per_decade == QuadratureConfig{}.panels_per_decade);
    const RunConfig c = parse_config(R"({"grid": {"x_min": -5, "x_max": 5, "n": 11},
        "quadrature": {"panels_per_decade": 6}, "symbol": {"b": [1.2]}, "tol_scale": 2.0})");
    CHECK(c.grid.x_min == -5.0);
    CHECK(c.grid.n == 11);
    CHECK(c.quad.panels_per_decade == 6);
    CHECK(c.symbol.b == std::vector<double>{1.2});
    CHECK(c.tol_scale == 2.0);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"grdi": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"grid": {"n": "many"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"grid": {"n": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"forcing": {"delta": 0.2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"symbol": {"d1": 0.3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"quadrature": {"gauss_order": 0}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/kwe.json"), ConfigError);
}

TEST_CASE("spectrum CSV round trip") {
    const fs::path dir = scratch_dir("csv");
    const LogGrid g(-3.0, 3.0, 31);
    const Spectrum s = sample(g, [](double w) { return std::pow(w, -1.1) * (1.0 + 0.2 * std::sin(std::log(w))); }, 1.1, 1.2);
    const std::string path = (dir / "s.csv").string();
    write_spectrum_csv(path, s);
    const Spectrum r = read_spectrum_csv(path);
    CHECK(r.grid().size() == g.size());
    CHECK(r.grid().x_min() == g.x_min());
    CHECK(r.grid().x_max() == doctest::Approx(g.x_max()).epsilon(1e-15));
    CHECK((r.u() - s.u()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.tails().c0 == s.tails().c0);
    CHECK(r.tails().alpha == s.tails().alpha);
    CHECK(r.tails().c_inf == s.tails().c_inf);
    CHECK(r.tails().beta == s.tails().beta);
    CHECK(fmt17(0.1) == "0.10000000000000001");

    // Without the sidecar the tails are matched KZ power laws.
    fs::remove(dir / "s.tails.json");
    const Spectrum m = read_spectrum_csv(path);
    CHECK(m.tails().alpha == kKZ);
    CHECK(m.tails().beta == kKZ);
    CHECK(m.tails().c0 == doctest::Approx(s.u()[0]).epsilon(1e-15));

    std::ofstream(dir / "bad.csv") << "x,omega,f\n0,1,1\n";
    CHECK_THROWS_AS(read_spectrum_csv((dir / "bad.csv").string()), ConfigError);
    std::ofstream(dir / "nonuniform.csv") << "x,omega,u,f\n0,1,1,1\n0.1,1.1,1,1\n0.3,1.3,1,1\n";
    CHECK_THROWS_AS(read_spectrum_csv((dir / "nonuniform.csv").string()), ConfigError);
}

TEST_CASE("flux command on the KZ spectrum") {
    const fs::path dir = scratch_dir("flux");
    const LogGrid g(-4.0, 4.0, 17);
    write_spectrum_csv((dir / "kz.csv").string(), power_law(1.0, kKZ, g));
    RunConfig cfg = parse_config(R"({"forcing": {"eps": 0}})");
    cfg.out_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_flux(cfg, (dir / "kz.csv").string(), log) == kExitOk);
    std::ifstream is(dir / "flux_profile.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,omega,JM,JE");
    std::ifstream js(dir / "flux_limits.json");
    const nlohmann::json j = nlohmann::json::parse(js);
    const double jstar = kz_constant(cfg.quad);
    CHECK(j.at("jm_limit_0").get<double>() == doctest::Approx(-jstar).epsilon(1e-6));
}

TEST_CASE("winding command") {
    const fs::path dir = scratch_dir("winding");
    RunConfig cfg = parse_config("{}");
    cfg.out_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_winding(cfg, log) == kExitOk);
    cfg.symbol.winding_samples = 8;
    CHECK(cmd_winding(cfg, log) == kExitTolerance);
    std::ifstream js(dir / "winding.json");
    const nlohmann::json j = nlohmann::json::parse(js);
    CHECK_FALSE(j.at("pass").get<bool>());
}

TEST_CASE("verify-kz exit codes") {
    const fs::path dir = scratch_dir("verify");
    RunConfig cfg = parse_config("{}");
    cfg.out_dir = dir.string();
    std::ostringstream log;
    // The KZ integrands are resolved by the singular grading, so one panel
    // per decade still passes; a shallow grading does not.
    cfg.quad.panels_per_decade = 1;
    CHECK(cmd_verify_kz(cfg, log) == kExitOk);
    cfg.quad.refinement_levels = 4;
    CHECK(cmd_verify_kz(cfg, log) == kExitTolerance);
    std::ifstream js(dir / "verify_kz.json");
    const nlohmann::json j = nlohmann::json::parse(js);
    CHECK_FALSE(j.at("pass").get<bool>());
    CHECK(j.at("stationarity").size() == 5);
}

TEST_SUITE_END();
