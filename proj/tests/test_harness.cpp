#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mtfd/config.hpp"
#include "mtfd/csv.hpp"
#include "mtfd/expression.hpp"

using namespace mtfd;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("mtfd_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

nlohmann::json benchmark_json() {
    return nlohmann::json::parse(R"json({
      "problem": {
        "x_lo": 0, "x_hi": "pi",
        "diffusion": "1",
        "initial": "sin(x)",
        "orders": [0.8, 0.4],
        "weights": ["1", "1 + x*(pi - x)/4"]
      },
      "discretization": { "N": 64, "K": 32, "grading": 3.0, "T": 0.5 },
      "solver": "l1",
      "seed": 7
    })json");
}

}  // namespace

TEST_CASE("expression grammar") {
    CHECK(parse_expression("1 + 2*3")(0.0) == doctest::Approx(7.0));
    CHECK(parse_expression("2^3^2")(0.0) == doctest::Approx(512.0));  // right assoc
    CHECK(parse_expression("-x^2")(3.0) == doctest::Approx(-9.0));
    CHECK(parse_expression("(1 - 2) * (3 + 4)")(0.0) == doctest::Approx(-7.0));
    CHECK(parse_expression("sin(x)^2 + cos(x)^2")(0.7) == doctest::Approx(1.0));
    CHECK(parse_expression("exp(-x)")(2.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(parse_expression("pi/2")(0.0) == doctest::Approx(M_PI / 2.0));
    CHECK(parse_expression("1 + x*(pi - x)/4")(M_PI / 2.0) ==
          doctest::Approx(1.0 + M_PI * M_PI / 16.0));
    CHECK(parse_expression("6/3/2")(0.0) == doctest::Approx(1.0));  // left assoc
    CHECK(parse_expression("2 - 3 - 4")(0.0) == doctest::Approx(-5.0));
    CHECK(parse_number("pi") == doctest::Approx(M_PI));

    CHECK_THROWS_AS(parse_expression("1 +"), spec_error);
    CHECK_THROWS_AS(parse_expression("sin x"), spec_error);
    CHECK_THROWS_AS(parse_expression("(1 + 2"), spec_error);
    CHECK_THROWS_AS(parse_expression("foo(3)"), spec_error);
    CHECK_THROWS_AS(parse_expression("1 2"), spec_error);
    CHECK_THROWS_AS(parse_expression(""), spec_error);
}

TEST_CASE("csv writer round trip at full precision") {
    TempDir tmp;
    auto p = (tmp.path / "t.csv").string();
    double v1 = M_PI, v2 = 1.0 / 3.0, v3 = 1.2345678901234567e-89;
    {
        CsvWriter w(p);
        w.header({"t", "u"});
        w.row({v1, v2});
        w.row({0.0, v3});
    }
    CsvTable t = read_csv(p);
    REQUIRE(t.names.size() == 2);
    CHECK(t.names[0] == "t");
    CHECK(t.column("t").size() == 2);
    // bit-exact round trip through 17 significant digits
    CHECK(t.column("t")[0] == v1);
    CHECK(t.column("u")[0] == v2);
    CHECK(t.column("u")[1] == v3);

    CHECK_THROWS_AS(t.column("missing"), spec_error);
    CHECK_THROWS_AS(read_csv((tmp.path / "absent.csv").string()), spec_error);

    // malformed rows rejected
    {
        std::ofstream bad(tmp.path / "bad.csv");
        bad << "a,b\n1.0\n";
    }
    CHECK_THROWS_AS(read_csv((tmp.path / "bad.csv").string()), spec_error);
    {
        std::ofstream bad(tmp.path / "bad2.csv");
        bad << "a\nhello\n";
    }
    CHECK_THROWS_AS(read_csv((tmp.path / "bad2.csv").string()), spec_error);
}

TEST_CASE("csv writer is byte deterministic") {
    TempDir tmp;
    auto write = [&](const std::string& name) {
        CsvWriter w((tmp.path / name).string());
        w.header({"x", "y"});
        for (int i = 0; i < 50; ++i) w.row({std::sqrt(2.0) * i, std::exp(-0.1 * i)});
    };
    write("a.csv");
    write("b.csv");
    std::ifstream fa(tmp.path / "a.csv"), fb(tmp.path / "b.csv");
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(sa.size() > 0);
}

TEST_CASE("config parsing: benchmark round trip") {
    ExperimentConfig cfg = parse_config(benchmark_json());
    CHECK(cfg.problem.x_hi == doctest::Approx(M_PI));
    CHECK(cfg.problem.orders.ell() == 2);
    CHECK(cfg.problem.orders.alphas[0] == doctest::Approx(0.8));
    CHECK(cfg.problem.weights[1](M_PI / 2.0) == doctest::Approx(1.0 + M_PI * M_PI / 16.0));
    CHECK(cfg.problem.initial(M_PI / 2.0) == doctest::Approx(1.0));
    CHECK(cfg.disc.N == 64);
    CHECK(cfg.disc.T == doctest::Approx(0.5));
    CHECK(cfg.solver == "l1");
    CHECK(cfg.seed == 7);
    CHECK(!cfg.crosscheck);
    CHECK(!cfg.invert);

    // the parsed problem assembles
    Grid1D grid(cfg.problem.x_lo, cfg.problem.x_hi, cfg.disc.N);
    DiscreteProblem d = assemble(cfg.problem, grid);
    CHECK(d.weights[0].maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("config parsing: tabulated samples and defaults") {
    auto j = benchmark_json();
    j["problem"]["diffusion"] = {1.0, 2.0, 3.0};  // linear ramp over [0, pi]
    ExperimentConfig cfg = parse_config(j);
    CHECK(cfg.problem.diffusion(0.0) == doctest::Approx(1.0));
    CHECK(cfg.problem.diffusion(M_PI / 2.0) == doctest::Approx(2.0));
    CHECK(cfg.problem.diffusion(M_PI) == doctest::Approx(3.0));
    CHECK(cfg.problem.diffusion(M_PI / 4.0) == doctest::Approx(1.5));
    // endpoints clamp
    CHECK(cfg.problem.diffusion(-1.0) == doctest::Approx(1.0));

    // defaults: potential/convection absent -> zero
    CHECK(cfg.problem.potential(1.0) == 0.0);
    CHECK(cfg.problem.convection(1.0) == 0.0);

    // weights absent -> all ones
    j = benchmark_json();
    j["problem"].erase("weights");
    ExperimentConfig c2 = parse_config(j);
    CHECK(c2.problem.weights.size() == 2);
    CHECK(c2.problem.weights[1](1.0) == doctest::Approx(1.0));
}

TEST_CASE("config parsing: violations named and rejected") {
    auto drop = [&](const char* sec, const char* key) {
        auto j = benchmark_json();
        j[sec].erase(key);
        return j;
    };
    CHECK_THROWS_AS(parse_config(drop("problem", "initial")), spec_error);
    CHECK_THROWS_AS(parse_config(drop("problem", "orders")), spec_error);

    auto j = benchmark_json();
    j["problem"]["orders"] = {0.4, 0.8};  // not decreasing
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["solver"] = "unknown";
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["discretization"]["N"] = 1;
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["discretization"]["grading"] = 0.5;
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["problem"]["x_hi"] = -1.0;
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["crosscheck"] = {{"solvers", {"l1"}}};
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["invert"] = {{"observation", "/nonexistent/file.csv"}, {"x0", 1.5}};
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["problem"]["initial"] = "sin(y)";  // unknown identifier
    CHECK_THROWS_AS(parse_config(j), spec_error);
}

TEST_CASE("load_config from disk, including parse failure") {
    TempDir tmp;
    auto good = tmp.path / "good.json";
    {
        std::ofstream out(good);
        out << benchmark_json().dump(2);
    }
    ExperimentConfig cfg = load_config(good.string());
    CHECK(cfg.disc.K == 32);

    auto bad = tmp.path / "bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(bad.string()), spec_error);
    CHECK_THROWS_AS(load_config((tmp.path / "absent.json").string()), spec_error);

    // wrong JSON types surface as spec_error, not raw json exceptions
    auto wrong = tmp.path / "wrong.json";
    {
        std::ofstream out(wrong);
        out << R"json({"problem": {"initial": "sin(x)", "orders": "oops"}})json";
    }
    CHECK_THROWS_AS(load_config(wrong.string()), spec_error);
}

TEST_CASE("config contour overrides validated at load") {
    auto j = benchmark_json();
    j["contour"] = {{"theta", 0.1}};  // below pi/2
    CHECK_THROWS_AS(parse_config(j), spec_error);

    j = benchmark_json();
    j["contour"] = {{"m", 2000}};
    ExperimentConfig cfg = parse_config(j);
    REQUIRE(cfg.contour.has_value());
    CHECK(cfg.contour->m == 2000);
    CHECK(cfg.contour->theta > M_PI / 2.0);
}
