#include "longrun/config.hpp"
#include "longrun/errors.hpp"
#include "longrun/oracles.hpp"
#include "longrun/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace longrun;
using nlohmann::json;

TEST_CASE("minimal configuration and generated seed") {
    const RunConfig c = parse_config(json::parse(R"({"model": {"name": "exponential"}})"));
    CHECK(c.seed_generated);
    CHECK(c.run.seed.has_value());
    const RunConfig again = parse_config(c.to_json());
    CHECK_FALSE(again.seed_generated);
    CHECK(again.seed() == c.seed());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "exponential"}, "extra": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "exponential", "colour": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "cauchy"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "normal"}, "run": {"L": "many"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "normal"}, "run": {"center_shift": "x"}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "normal"}, "event": {"a": 1, "probability": 0.1}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"name": "normal"}, "output": {"formats": ["xml"]}})")),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("levels from probabilities") {
    const RunConfig c = parse_config(json::parse(
        R"({"model": {"name": "exponential"}, "event": {"kind": "exceedance", "probability": 1e-2, "n": 100}, "run": {"seed": 5}})"));
    const auto model = make_model(c.model);
    const double a = resolve_level(*model, c.event);
    CHECK(oracle::gamma_tail_exact(100, a) == doctest::Approx(std::log(1e-2)).epsilon(1e-9));
    GammaModel gamma(2.0, 1.0);
    const double b = saddlepoint_level_for_probability(gamma, 50, 1e-4);
    CHECK(b > 2.0);
    const ConditioningEvent e = make_event(*model, c.event);
    CHECK(e.kind == EventKind::ExceedanceSet);
}

TEST_CASE("custom model block") {
    const RunConfig c = parse_config(json::parse(R"j({
        "model": {"name": "custom", "custom": {
            "base_logpdf": "-(x + 1)", "cgf": "-t - log(1 - t)",
            "t_domain": ["-inf", 1], "u_support": [-1, "inf"], "x_support": [-1, "inf"], "sample_range": [-1, 40]}},
        "run": {"seed": 1}})j"));
    const auto m = make_model(c.model);
    CHECK(m->cgf_d1(0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(parse_config(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("report formatting round trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123456789}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CsvTable t{{"a", "b"}, {}};
    t.add_row({csv_cell(0.1), csv_cell(std::string("x,\"y\""))});
    t.add_row({csv_cell(3), csv_cell(true)});
    const auto rows = parse_csv(t.str());
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "0.10000000000000001");
    CHECK(rows[1][1] == "x,\"y\"");
    CHECK(rows[2][1] == "1");
    CHECK_THROWS_AS(t.add_row({"1"}), Error);

    const auto dir = std::filesystem::temp_directory_path() / "longrun_report_test";
    ensure_directory(dir.string());
    const std::string path = (dir / "out.csv").string();
    write_file_atomic(path, t.str());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == t.str());
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove_all(dir);
}
