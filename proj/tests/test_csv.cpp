#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "maas/csv.hpp"

using namespace maas;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << content;
    return p.string();
}

}  // namespace

TEST_CASE("csv reads header and pads short rows") {
    std::string p = temp_file("t_basic.csv", "a,b,c\n1,2,3\n4,5\n");
    CsvTable t = read_csv(p);
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1] == std::vector<std::string>{"4", "5", ""});
    CHECK(t.col("b") == 1);
    CHECK(t.col("missing") == -1);
}

TEST_CASE("csv trims and skips blank lines") {
    std::string p = temp_file("t_trim.csv", "x , y\n 1, 2 \n\n3,4\n");
    CsvTable t = read_csv(p);
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "2"});
}

TEST_CASE("csv missing file throws") {
    CHECK_THROWS(read_csv("/nonexistent/nowhere.csv"));
}

TEST_CASE("csv write then read round-trips") {
    fs::path p = fs::temp_directory_path() / "t_round.csv";
    write_csv(p.string(), {"k", "v"}, {{"a", "1"}, {"b", "2"}});
    CsvTable t = read_csv(p.string());
    CHECK(t.header == std::vector<std::string>{"k", "v"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "a");
    CHECK(t.rows[1][1] == "2");
}

TEST_CASE("parse_double rejects garbage and empties") {
    CHECK(parse_double("2.5", "t") == doctest::Approx(2.5));
    CHECK(parse_double("1e-4", "t") == doctest::Approx(1e-4));
    CHECK_THROWS(parse_double("", "t"));
    CHECK_THROWS(parse_double("12abc", "t"));
    CHECK_THROWS(parse_double("abc", "t"));
}

TEST_CASE("config file parses key=value with comments") {
    std::string p = temp_file("t_conf", "# heading\nalpha_t = 2\n\nseed=7 # inline\n");
    auto kv = read_config_file(p);
    CHECK(kv.size() == 2);
    CHECK(kv.at("alpha_t") == "2");
    CHECK(kv.at("seed") == "7");
}

TEST_CASE("trim strips surrounding whitespace only") {
    CHECK(trim("  a b  ") == "a b");
    CHECK(trim("") == "");
    CHECK(trim(" \t ") == "");
}
