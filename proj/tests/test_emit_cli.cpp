#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rotor/cli.hpp"
#include "rotor/emit.hpp"
#include "rotor/errors.hpp"

using namespace rotor::app;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rotor_bands_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_SUITE("emit") {

TEST_CASE("doubles use 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1.0");
    CHECK(format_double(0.0) == "0.0");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv layout") {
    Result r;
    r.columns = {"a", "b"};
    r.rows = {{1.0, 2LL}, {std::string("x"), true}};
    r.footers = {{"widths", {0.5, 0.25}}};
    const auto l = lines(render_csv(r));
    REQUIRE(l.size() == 4);
    CHECK(l[0] == "a,b");
    CHECK(l[1] == "1.0,2");
    CHECK(l[2] == "x,true");
    CHECK(l[3] == "widths,0.5,0.25");
}

TEST_CASE("json layout") {
    Result r;
    r.columns = {"a", "b"};
    r.rows = {{0.1, std::numeric_limits<double>::quiet_NaN()}};
    r.footers = {{"widths", {0.0, 0.0}}};
    nlohmann::ordered_json meta;
    meta["version"] = "x";
    const auto text = render_json(r, meta);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["meta"]["version"] == "x");
    REQUIRE(doc["data"].size() == 1);
    CHECK(doc["data"][0]["a"].get<double>() == 0.1);
    CHECK(doc["data"][0]["b"].is_null());
    CHECK(doc["extras"]["widths"] == nlohmann::json::array({0.0, 0.0}));
    CHECK(text.find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("empty results are valid") {
    Result r;
    r.columns = {"a", "b"};
    CHECK(render_csv(r) == "a,b\n");
    const auto doc = nlohmann::json::parse(render_json(r, nlohmann::ordered_json::object()));
    CHECK(doc["data"].is_array());
    CHECK(doc["data"].empty());

    const auto path = scratch("empty.csv");
    emit(r, Format::Csv, {}, path);
    CHECK(slurp(path) == "a,b\n");
}

TEST_CASE("unwritable output raises IoError") {
    Result r;
    r.columns = {"a"};
    CHECK_THROWS_AS(emit(r, Format::Csv, {}, "/nonexistent-dir/x/out.csv"), rotor::IoError);
}

}

TEST_SUITE("cli") {

TEST_CASE("bands csv") {
    const auto r = run_cli({"bands", "--p", "1", "--q", "3", "--beta", "0.5", "--mu", "0.5", "--grid", "256", "--format",
                            "csv"});
    CHECK(r.code == kExitOk);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 258);
    CHECK(l[0] == "theta,phase_1,phase_2,phase_3");
    CHECK(l.back().rfind("widths,", 0) == 0);
    CHECK(r.err.find("bands:") != std::string::npos);
}

TEST_CASE("anti-resonance flatness") {
    const auto r = run_cli({"flatness", "--P", "2", "--Q", "2", "--beta", "0", "--mu", "1.0"});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("all bands flat") != std::string::npos);
}

TEST_CASE("anti-resonance widths in json") {
    const auto r = run_cli({"bands", "--P", "2", "--Q", "2", "--beta", "0", "--mu", "1.0", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    const auto& w = doc["extras"]["widths"];
    REQUIRE(w.size() == 2);
    CHECK(w[0].get<double>() < 1e-12);
    CHECK(w[1].get<double>() < 1e-12);
    CHECK(doc["meta"]["config"]["command"] == "bands");
}

TEST_CASE("invalid beta is a usage error") {
    const auto r = run_cli({"bands", "--p", "1", "--q", "3", "--beta", "0.3", "--mu", "0.5"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("not resonant") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == kExitUsage);
    CHECK(run_cli({"nonsense"}).code == kExitUsage);
    CHECK(run_cli({"bands", "--q", "3", "--format", "xml"}).code == kExitUsage);
    CHECK(run_cli({"gauss", "--p", "1", "--q", "9", "--N", "1", "--j", "1", "--T", "3"}).code == kExitUsage);
}

TEST_CASE("gamma json") {
    const auto r = run_cli({"gamma", "--format", "json", "--quadrature-points", "1000"});
    REQUIRE(r.code == kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    const auto& row = doc["data"][0];
    CHECK(row.contains("x_star"));
    CHECK(row.contains("lambda_star"));
    CHECK(row["value"].get<double>() == doctest::Approx(-0.0016).epsilon(0.05));
}

TEST_CASE("output file and summary") {
    const auto path = scratch("gauss.csv");
    fs::remove(path);
    const auto r = run_cli({"gauss", "--p", "2", "--q", "5", "--beta", "0.5", "--N", "3", "--j", "1", "--T", "5",
                            "--output", path.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("full-period") != std::string::npos);
    const auto l = lines(slurp(path));
    REQUIRE(l.size() == 2);
    CHECK(l[0] == "value_re,value_im,magnitude_squared,case,bound,satisfied");
}

TEST_CASE("unwritable output exits 1") {
    const auto r = run_cli({"detgd", "--p", "1", "--q", "3", "--output", "/nonexistent-dir/x/out.csv"});
    CHECK(r.code == kExitFailure);
}

TEST_CASE("config file supplies flags and flags win") {
    const auto cfg = scratch("config.json");
    {
        std::ofstream f(cfg);
        f << R"({"p": 1, "q": 3, "beta": 0.5, "mu": 0.5, "grid": 32, "format": "json"})";
    }
    const auto from_file = run_cli({"bands", "--config", cfg.string()});
    REQUIRE(from_file.code == kExitOk);
    auto doc = nlohmann::json::parse(from_file.out);
    CHECK(doc["meta"]["config"]["mu"].get<double>() == 0.5);
    CHECK(doc["data"].size() == 32);

    const auto overridden = run_cli({"bands", "--config", cfg.string(), "--mu", "0.25"});
    REQUIRE(overridden.code == kExitOk);
    doc = nlohmann::json::parse(overridden.out);
    CHECK(doc["meta"]["config"]["mu"].get<double>() == 0.25);

    CHECK(run_cli({"bands", "--config", scratch("missing.json").string()}).code == kExitUsage);
}

TEST_CASE("output is byte-identical across thread counts") {
    const std::vector<std::string> base{"bands", "--p", "2", "--q", "7", "--beta", "0.5", "--mu", "1.0", "--grid", "128"};
    auto one = base;
    one.insert(one.end(), {"--threads", "1"});
    auto many = base;
    many.insert(many.end(), {"--threads", "6"});
    const auto a = run_cli(one);
    const auto b = run_cli(many);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);

    const std::vector<std::string> dc{"decomp-check", "--p", "1", "--q", "3", "--beta", "0.5", "--mu", "1", "--grid",
                                      "192", "--seed", "5"};
    auto c1 = dc;
    c1.insert(c1.end(), {"--threads", "1"});
    auto c2 = dc;
    c2.insert(c2.end(), {"--threads", "3"});
    const auto x = run_cli(c1);
    CHECK(x.code == kExitOk);
    CHECK(x.out == run_cli(c2).out);
}

TEST_CASE("detgd and decay") {
    const auto d = run_cli({"detgd", "--p", "1", "--q", "12", "--format", "json"});
    REQUIRE(d.code == kExitOk);
    const auto doc = nlohmann::json::parse(d.out);
    CHECK(doc["data"][0]["det_modulus"].get<double>() == doctest::Approx(0.00035255543569080885).epsilon(1e-10));

    const auto f = run_cli({"decay", "--q-list", "3,5,7,11,13", "--p", "1"});
    CHECK(f.code == kExitOk);
    CHECK(f.err.find("-1.87") != std::string::npos);
}

TEST_CASE("coeffs and scaling") {
    const auto c = run_cli({"coeffs", "--p", "1", "--q", "3", "--format", "json"});
    REQUIRE(c.code == kExitOk);
    const auto doc = nlohmann::json::parse(c.out);
    REQUIRE(doc["data"].size() == 2);
    CHECK(doc["data"][0]["alpha"] == 2);
    CHECK(doc["data"][0]["relative_gap"].get<double>() < 0.02);

    const auto s = run_cli({"scaling", "--p", "1", "--q", "3", "--j", "1", "--mu-list", "1e-4,2e-4,5e-4,1e-3"});
    CHECK(s.code == kExitOk);
    CHECK(s.out.find("exponent,") != std::string::npos);
}

TEST_CASE("version") {
    const auto r = run_cli({"--version"});
    CHECK(r.code == kExitOk);
    CHECK(r.out == std::string(ROTOR_VERSION) + "\n");
}

}
