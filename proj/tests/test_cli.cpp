#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/swdist.hpp"

using namespace swgeo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case, removed on exit.
class Scratch {
public:
    Scratch() {
        static int counter = 0;
        dir_ = fs::temp_directory_path() / ("swgeo_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(dir_);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }
    std::string write(const std::string& name, const DiscreteMeasure& mu) const {
        std::ostringstream s;
        write_measure_csv(s, mu);
        return write(name, s.str());
    }

private:
    fs::path dir_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<double> numbers_of(const std::string& row) {
    std::vector<double> out;
    std::istringstream in(row);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
    return out;
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "[swdist]\n"
        "mu = a.csv   ; trailing comment\n"
        "\n"
        "nu=b.csv\n"
        "[rate]\n"
        "n = 16,32\n");
    const auto sections = cli::parse_config(in);
    REQUIRE(sections.size() == 2);
    CHECK(sections[0].name == "swdist");
    REQUIRE(sections[0].entries.size() == 2);
    CHECK(sections[0].entries[0] == std::pair<std::string, std::string>{"mu", "a.csv"});
    CHECK(sections[0].entries[1] == std::pair<std::string, std::string>{"nu", "b.csv"});
    CHECK(sections[0].lines == std::vector<std::size_t>{3, 5});
    CHECK(sections[1].entries[0].second == "16,32");
    CHECK(sections[1].lines[0] == 7);
}

TEST_CASE("config parsing errors name the line") {
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            cli::parse_config(in);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("key = 1\n").find("line 1") != std::string::npos);
    CHECK(message("[a]\nno equals sign\n").find("line 2") != std::string::npos);
    CHECK(message("[a]\n\n[open\n").find("line 3") != std::string::npos);
    CHECK(message("[]\n").find("line 1") != std::string::npos);
    CHECK(message("[a]\n = 3\n").find("missing key") != std::string::npos);
}

TEST_CASE("config with an unknown key is rejected before running") {
    Scratch tmp;
    const std::string a = tmp.write("a.csv", from_points({{0.0, 0.0}, {1.0, 0.0}}));
    const std::string cfg = tmp.write("bad.cfg", "[swdist]\nmu = " + a + "\nnu = " + a + "\nbogus = 3\n");
    const Outcome r = call({"run", cfg});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find(cfg + ":4") != std::string::npos);
    CHECK(r.err.find("bogus") != std::string::npos);
    CHECK(r.out.empty());

    const std::string section = tmp.write("section.cfg", "[nonsense]\nx = 1\n");
    const Outcome s = call({"run", section});
    CHECK(s.code == cli::kInputError);
    CHECK(s.err.find("nonsense") != std::string::npos);
}

TEST_CASE("config runs its sections in order") {
    Scratch tmp;
    const std::string a = tmp.write("a.csv", from_points({{0.0, 0.0}}));
    const std::string b = tmp.write("b.csv", from_points({{1.0, 1.0}}));
    const std::string cfg =
        tmp.write("ok.cfg", "[swdist]\nmu = " + a + "\nnu = " + b + "\ndirs = 8\n[swdist]\nmu = " + b + "\nnu = " + b + "\n");
    const Outcome r = call({"run", cfg});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "sw_p,w2_over_sqrtd,lsw_upper");
    CHECK(numbers_of(rows[1])[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(numbers_of(rows[3])[0] == 0.0);
}

TEST_CASE("swdist prints three distances") {
    Scratch tmp;
    const DiscreteMeasure mu = from_points({{0.0, 0.0}, {1.0, 0.5}, {-0.3, 0.8}});
    const DiscreteMeasure nu = from_points({{0.2, -0.1}, {0.9, 0.9}, {-0.5, 0.4}});
    const Outcome r = call({"swdist", "--mu", tmp.write("mu.csv", mu), "--nu", tmp.write("nu.csv", nu), "--dirs", "180"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "sw_p,w2_over_sqrtd,lsw_upper");
    const auto v = numbers_of(rows[1]);
    REQUIRE(v.size() == 3);
    const DirectionSet dirs = make_directions(2, 180);
    CHECK(v[0] == doctest::Approx(sw_p(Measure{mu}, Measure{nu}, 2.0, dirs)).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(w2_discrete(mu, nu) / std::sqrt(2.0)).epsilon(1e-15));
    // Atomic slices have no density to weight the linear path.
    CHECK(std::isinf(v[2]));
    CHECK(v[0] <= v[1] * (1.0 + 1e-12));

    // Full precision: the row round-trips the library value.
    CHECK(v[0] == sw_p(Measure{mu}, Measure{nu}, 2.0, dirs));
}

TEST_CASE("swdist on grid densities") {
    Scratch tmp;
    const GridField square = make_field({{-1.0, -1.0}, {1.0, 1.0}}, {32, 32}, [](std::span<const double> x) {
        return std::abs(x[0]) < 0.5 && std::abs(x[1]) < 0.5 ? 1.0 : 0.0;
    });
    std::ostringstream g;
    write_grid(g, square);
    const std::string path = tmp.write("square.grid", g.str());
    const Outcome r = call({"swdist", "--mu", path, "--nu", path, "--dirs", "16"});
    REQUIRE(r.code == cli::kOk);
    const auto v = numbers_of(lines_of(r.out)[1]);
    CHECK(v[0] == 0.0);
    CHECK(std::isnan(v[1]));
    CHECK(v[2] == 0.0);
}

TEST_CASE("verify identity-delta passes") {
    const Outcome r = call({"verify", "identity-delta", "--n-atoms", "10", "--seed", "3"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("PASS 1 identity-delta") != std::string::npos);
    const auto rows = lines_of(r.out);
    CHECK(std::find(rows.begin(), rows.end(), "id,name,passed,metric,threshold") != rows.end());
}

TEST_CASE("verify reports tolerance failures with exit code 2") {
    const Outcome r = call({"verify", "sw-below-w", "--tol-scale", "1e-300"});
    CHECK(r.code == cli::kToleranceFailure);
    CHECK(r.out.find("FAIL 2 sw-below-w") != std::string::npos);
    CHECK(call({"verify", "no-such-check"}).code == cli::kInputError);
}

TEST_CASE("reports are byte identical across runs and thread counts") {
    Scratch tmp;
    const std::string one = tmp.path("one.csv"), two = tmp.path("two.csv");
    const std::vector<std::string> base{"compare-discrete", "--trials", "4", "--eps", "0.1,0.01", "--dirs", "64", "--seed", "5"};
    auto with = [&](const std::string& out, const std::string& threads) {
        std::vector<std::string> args = base;
        args.insert(args.end(), {"--out", out, "--threads", threads});
        return call(args);
    };
    REQUIRE(with(one, "1").code == cli::kOk);
    REQUIRE(with(two, "4").code == cli::kOk);
    const std::string a = slurp(one);
    CHECK(a == slurp(two));
    const auto rows = lines_of(a);
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == "eps,trial,w2_over_d,sw2,winfty,ratio1,ratio2");

    // Timing and the config echo live in the metadata file.
    const std::string meta = slurp(one + ".meta.json");
    for (const char* key : {"\"version\"", "\"config\"", "\"wall_time_seconds\"", "\"started_utc\"", "\"min_gap\""})
        CHECK(meta.find(key) != std::string::npos);
    CHECK(meta.find("\"eps\": \"0.1,0.01\"") != std::string::npos);
}

TEST_CASE("rate report schema") {
    const Outcome r = call({"rate", "--density", "uniform-square", "--n", "16,32", "--trials", "10", "--grid", "48",
                            "--dirs", "16", "--seed", "1"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 21);
    CHECK(rows[0] == "n,trial,sw,lsw_upper,bound");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto v = numbers_of(rows[i]);
        REQUIRE(v.size() == 5);
        CHECK(v[0] == (i <= 10 ? 16.0 : 32.0));
        CHECK(v[2] <= v[3] * (1.0 + 1e-12));
    }
    CHECK(call({"rate", "--n", "32,16", "--trials", "10", "--grid", "48"}).code == cli::kInputError);
}

TEST_CASE("slope report schema") {
    Scratch tmp;
    const std::string atoms = tmp.write("atoms.csv", from_points({{0.1, 0.0}, {-0.05, 0.08}, {0.0, -0.1}}));
    const Outcome d = call({"slope", "--measure", atoms, "--potential", "gaussian", "--width", "0.3", "--dirs", "64"});
    REQUIRE(d.code == cli::kOk);
    const auto rows = lines_of(d.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "w_slope,sw_slope_lo,sw_slope_hi,hdot_slope");
    const auto v = numbers_of(rows[1]);
    REQUIRE(v.size() == 4);
    CHECK(v[1] == doctest::Approx(std::sqrt(2.0) * v[0]).epsilon(1e-12));
    CHECK(v[1] == v[2]);

    const Outcome mismatch = call({"slope", "--measure", atoms, "--mode", "ac"});
    CHECK(mismatch.code == cli::kInputError);
    CHECK(mismatch.err.find("mode") != std::string::npos);

    const Outcome ac = call({"slope", "--measure", "uniform-disk", "--grid", "64", "--dirs", "32"});
    REQUIRE(ac.code == cli::kOk);
    const auto w = numbers_of(lines_of(ac.out)[1]);
    REQUIRE(w.size() == 4);
    // The lower/upper ordering needs finer grids; see the slope tests.
    for (double x : w) CHECK((std::isfinite(x) && x > 0.0));
}

TEST_CASE("input errors exit with code 1") {
    CHECK(call({}).code == cli::kInputError);
    CHECK(call({"swdist", "--mu", "/nonexistent.csv", "--nu", "/nonexistent.csv"}).code == cli::kInputError);
    CHECK(call({"swdist", "--bogus"}).code == cli::kInputError);
    CHECK(call({"compare-discrete", "--eps", "5"}).code == cli::kInputError);
    Scratch tmp;
    const std::string broken = tmp.write("broken.csv", "dim,n\n2,2\n0,0,0.5\n");
    const Outcome r = call({"swdist", "--mu", broken, "--nu", broken});
    CHECK(r.code == cli::kInputError);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("help and version") {
    const Outcome h = call({"--help"});
    CHECK(h.code == cli::kOk);
    for (const char* sub : {"swdist", "radon-check", "sobolev-check", "slope", "rate", "compare-discrete", "midpoint-gap", "verify"})
        CHECK(h.out.find(sub) != std::string::npos);
    const Outcome v = call({"--version"});
    CHECK(v.code == cli::kOk);
    CHECK(v.out.rfind("swgeo ", 0) == 0);
}
