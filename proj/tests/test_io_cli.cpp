#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polykr/external_oracle.hpp"
#include "polykr/io.hpp"
#include "polykr/metrics.hpp"
#include "support.hpp"

namespace io = polykr::io;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "polykr_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("surrogate files round-trip bit-exactly") {
    polykr::RngStream rng(20);
    auto g = testsupport::random_positive_surrogate(3, 17, rng);
    g.info().method = "wls";
    g.info().evaluations = 1234;
    g.info().rounds = 2;
    g.info().seed = 99;

    const auto path = temp_dir() / "roundtrip.poly";
    io::save_surrogate(g, path);
    const auto loaded = io::load_surrogate(path);

    REQUIRE(loaded.size() == g.size());
    REQUIRE(loaded.dimension() == g.dimension());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(loaded.coefficients()[i] == g.coefficients()[i]);
        CHECK(std::equal(loaded.index_set()[i].begin(), loaded.index_set()[i].end(),
                         g.index_set()[i].begin()));
    }
    CHECK(loaded.info().method == "wls");
    CHECK(loaded.info().evaluations == 1234);
    CHECK(loaded.info().rounds == 2);
    REQUIRE(loaded.info().seed.has_value());
    CHECK(*loaded.info().seed == 99);

    // a second save is byte-identical
    const auto path2 = temp_dir() / "roundtrip2.poly";
    io::save_surrogate(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("surrogate loader rejects malformed files") {
    const auto path = temp_dir() / "bad.poly";
    {
        std::ofstream out(path);
        out << "not a surrogate\n";
    }
    CHECK_THROWS_AS(io::load_surrogate(path), polykr::io_error);
    CHECK_THROWS_AS(io::load_surrogate(temp_dir() / "missing.poly"), polykr::io_error);
}

TEST_CASE("points csv round trip") {
    const std::vector<double> pts{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const auto path = temp_dir() / "points.csv";
    io::write_points_csv(path, pts, 3, 2);
    const auto file = io::read_points_csv(path);
    CHECK(file.dim == 2);
    CHECK(file.count == 3);
    CHECK(file.values == pts);

    // header only for zero rows
    io::write_points_csv(path, {}, 0, 2);
    CHECK(slurp(path) == "x1,x2\n");
}

TEST_CASE("convergence csv format") {
    polykr::metrics::ConvergenceRecord record;
    record.push_back({10, 200, false, 0.5, std::nullopt, "wls", 0.25});
    record.push_back({20, 400, true, 0.0, std::nullopt, "wls", 0.5});
    const auto path = temp_dir() / "study.csv";
    io::write_convergence_csv(path, record);
    const auto text = slurp(path);
    CHECK(text.rfind("cardinality,evaluations,hellinger,method,seconds\n", 0) == 0);
    CHECK(text.find("10,200,0.5,wls,0.25\n") != std::string::npos);
    CHECK(text.find("20,400,failed,wls,0.5\n") != std::string::npos);
}

TEST_CASE("double formatting survives parse round trips") {
    polykr::RngStream rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform() * 20 - 10);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK_THROWS_AS(io::parse_double("abc"), polykr::io_error);
}

TEST_CASE("external oracle speaks the line protocol") {
    // constant density: one value per input line
    const polykr::ExternalOracle oracle("while read line; do echo 1.0; done", 2);
    const std::vector<double> x{0.25, 0.75};
    CHECK(oracle(x) == 1.0);
    CHECK(oracle(x) == 1.0);
    CHECK(oracle.evaluations() == 2);
}

TEST_CASE("external oracle detects protocol violations") {
    SECTION("child exits without answering") {
        const polykr::ExternalOracle oracle("true", 1);
        const std::vector<double> x{0.5};
        CHECK_THROWS_AS(oracle(x), polykr::io_error);
    }
    SECTION("non-numeric reply") {
        const polykr::ExternalOracle oracle("while read line; do echo banana; done", 1);
        const std::vector<double> x{0.5};
        CHECK_THROWS_AS(oracle(x), polykr::io_error);
    }
}

TEST_CASE("cli: fit, sample, invert, convergence end to end") {
    const char* cli = std::getenv("POLYKR_CLI");
    if (!cli) SKIP("POLYKR_CLI not set");
    const auto dir = temp_dir() / "cli";
    fs::create_directories(dir);

    const auto config = dir / "fit.json";
    {
        std::ofstream out(config);
        out << R"({
  "target": {"name": "rosenbrock"},
  "method": {"type": "wls"},
  "index_set": {"weights": [1.0, 1.0], "level": 5},
  "seed": 11
})";
    }
    const auto surrogate = dir / "g.poly";
    auto run = [&](const std::string& args) {
        return std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
    };

    REQUIRE(run("fit --config " + config.string() + " --out " + surrogate.string()) == 0);
    REQUIRE(fs::exists(surrogate));
    REQUIRE(fs::exists(surrogate.string() + ".config.json"));

    const auto samples = dir / "samples.csv";
    REQUIRE(run("sample --surrogate " + surrogate.string() +
                " --count 16 --iterations 48 --seed 3 --out " + samples.string()) == 0);
    const auto pts = io::read_points_csv(samples);
    CHECK(pts.count == 16);
    CHECK(pts.dim == 2);

    // identity surrogate from the uniform target: invert S then T
    // recovers the input to bisection accuracy
    const auto uni_config = dir / "uniform.json";
    {
        std::ofstream out(uni_config);
        out << R"({
  "target": {"name": "uniform", "dimension": 2},
  "method": {"type": "wls"},
  "index_set": {"weights": [1.0, 1.0], "level": 1},
  "seed": 5
})";
    }
    const auto identity = dir / "identity.poly";
    REQUIRE(run("fit --config " + uni_config.string() + " --out " + identity.string()) == 0);

    const auto forward = dir / "forward.csv";
    const auto back = dir / "back.csv";
    REQUIRE(run("invert --surrogate " + identity.string() + " --points " + samples.string() +
                " --direction S --out " + forward.string()) == 0);
    REQUIRE(run("invert --surrogate " + identity.string() + " --points " + forward.string() +
                " --direction T --iterations 48 --out " + back.string()) == 0);
    const auto original = io::read_points_csv(samples);
    const auto recovered = io::read_points_csv(back);
    REQUIRE(recovered.count == original.count);
    for (std::size_t i = 0; i < original.values.size(); ++i)
        CHECK_THAT(recovered.values[i],
                   Catch::Matchers::WithinAbs(original.values[i], 1e-9));

    // out-of-domain rows are rejected with the row number
    const auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "x1,x2\n1.5,0\n";
    }
    CHECK(run("invert --surrogate " + surrogate.string() + " --points " + bad.string() +
              " --direction S --out " + (dir / "unused.csv").string()) != 0);

    // missing config is a config error (exit 2)
    CHECK(run("fit --config " + (dir / "nope.json").string() + " --out " +
              (dir / "x.poly").string()) != 0);

    // one-level convergence study on the uniform target
    const auto study_config = dir / "study.json";
    {
        std::ofstream out(study_config);
        out << R"({
  "target": {"name": "uniform", "dimension": 2},
  "method": {"type": "wls"},
  "index_set": {"weights": [1.0, 1.0]},
  "levels": [1.0],
  "seed": 7
})";
    }
    const auto study_csv = dir / "study.csv";
    REQUIRE(run("convergence --config " + study_config.string() + " --out " +
                study_csv.string()) == 0);
    const auto text = slurp(study_csv);
    CHECK(text.rfind("cardinality,evaluations,hellinger,method,seconds\n", 0) == 0);
    CHECK(text.find("\n1,") != std::string::npos);
}
