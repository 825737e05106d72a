#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conslaw/config.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/experiments.hpp"

using namespace conslaw;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("conslaw_test_config_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// rows end in CRLF
std::vector<std::string> split(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

CsvTable read_csv(const fs::path& p) {
    std::istringstream in(read_file(p));
    CsvTable t;
    std::string line;
    if (std::getline(in, line)) t.header = split(line);
    while (std::getline(in, line))
        if (line.size() > 1) t.rows.push_back(split(line));
    return t;
}

// small chernoff run
Config tiny() {
    Config c(default_config());
    for (const char* s : {"mc.excursions=500", "mc.excursion_steps=64", "mc.chernoff_paths=500",
                          "grids.chernoff_step=0.0078125", "grids.density_t_step=0.25", "grids.density_t_max=2"})
        c.set(s);
    return c;
}

}  // namespace

TEST_CASE("hash function") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("missing seed names the field") {
    nlohmann::json doc = default_config();
    doc.erase("seed");
    const Config c(doc);
    try {
        (void)c.seed();
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "seed");
    }
    Config neg(default_config());
    neg.set("seed=-3");
    CHECK_THROWS_AS((void)neg.seed(), ConfigError);
}

TEST_CASE("syntax errors report line and column") {
    try {
        Config::parse("{\n  \"seed\": 1,\n  \"t\": ]\n}", "bad.json");
        FAIL("no error");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("bad.json") != std::string::npos);
        CHECK(what.find("line 3") != std::string::npos);
        CHECK(what.find("column 8") != std::string::npos);
    }
    CHECK_THROWS_AS(Config::parse("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/conslaw.json"), ConfigError);
}

TEST_CASE("dotted overrides") {
    Config c(default_config());
    c.set("mc.excursions=123");
    CHECK(c.count("mc.excursions") == 123);
    c.set("new.nested.key=true");
    CHECK(c.flag("new.nested.key"));
    c.set("label=plain text");
    CHECK(c.text("label") == "plain text");
    c.set("phi={\"family\":\"quadratic\",\"params\":{\"a\":3}}");
    CHECK(c.function("phi").second_derivative(0.7) == doctest::Approx(3.0));
    CHECK_THROWS_AS(c.set("no_equals_sign"), ConfigError);
    CHECK_THROWS_AS(c.set("a..b=1"), ConfigError);

    try {
        c.set("mc.excursions=0");
        (void)c.count("mc.excursions");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "mc.excursions");
    }
    try {
        c.set("phi.family=cubic");
        (void)c.function("phi");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(e.field().rfind("phi", 0) == 0);
    }
}

TEST_CASE("shipped default config matches the built-in one") {
    const Config shipped = Config::load(fs::path(CONSLAW_SOURCE_DIR) / "config" / "default.json");
    CHECK(shipped.doc() == default_config());
    CHECK(shipped.hash() == Config(default_config()).hash());
}

TEST_CASE("hash depends on content only") {
    const Config a(default_config());
    Config b = Config::parse(a.doc().dump(4));
    CHECK(a.hash() == b.hash());
    b.set("seed=7");
    CHECK(a.hash() != b.hash());
}

TEST_CASE("chernoff command writes matching grids, reproducibly") {
    const fs::path one = scratch("one"), two = scratch("two");
    const ExperimentResult r = run_command("chernoff", tiny(), one);
    CHECK(r.files.size() == 2);
    const CsvTable dens = read_csv(one / "chernoff_density.csv");
    const CsvTable hist = read_csv(one / "chernoff_mc_hist.csv");
    CHECK(dens.header == std::vector<std::string>{"t", "density", "std_error"});
    CHECK(hist.header == std::vector<std::string>{"t", "density", "std_error", "count"});
    REQUIRE(dens.rows.size() == hist.rows.size());
    REQUIRE(dens.rows.size() == 17);
    for (std::size_t i = 0; i < dens.rows.size(); ++i) CHECK(dens.rows[i][0] == hist.rows[i][0]);

    run_command("chernoff", tiny(), two);
    CHECK(read_file(one / "chernoff_density.csv") == read_file(two / "chernoff_density.csv"));
    CHECK(read_file(one / "chernoff_mc_hist.csv") == read_file(two / "chernoff_mc_hist.csv"));
    CHECK(same_csv_files(one, two));

    CHECK_THROWS_AS(run_command("nope", tiny(), one), DomainError);
}
