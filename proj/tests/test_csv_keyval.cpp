#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"
#include "milcarb/keyval.hpp"

using namespace milcarb;

namespace {
std::string write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}
}  // namespace

TEST_CASE("csv parses header, quoted cells and empty cells") {
  auto path = write_temp("milcarb_csv1.csv",
                         "a,b,c\n1,\"x,y\",\n2,\"he said \"\"hi\"\"\",3\n");
  auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[0][2] == "");
  CHECK(t.rows[1][1] == "he said \"hi\"");
  CHECK(t.column("b") == 1);
  CHECK(t.column("zz") == -1);
  CHECK_THROWS_AS(t.require_column("zz"), DataError);
}

TEST_CASE("csv rejects ragged rows and bad numerics") {
  auto path = write_temp("milcarb_csv2.csv", "a,b\n1\n");
  CHECK_THROWS_AS(read_csv(path), DataError);
  CHECK(std::isnan(parse_numeric("", "ctx")));
  CHECK(parse_numeric("-1.5e3", "ctx") == doctest::Approx(-1500.0));
  CHECK_THROWS_AS(parse_numeric("abc", "ctx"), DataError);
}

TEST_CASE("atomic write leaves no temp file") {
  auto path = (std::filesystem::temp_directory_path() / "milcarb_atomic.txt");
  write_text_atomic(path.string(), "hello");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("keyval parses comments, lists and numbers") {
  auto kv = KeyValueFile::parse(
      "# comment\nbeta = 0.98\nname = hello world\nsets = a; b ;c\n", "mem");
  CHECK(kv.get_double("beta") == doctest::Approx(0.98));
  CHECK(kv.get("name") == "hello world");
  CHECK(kv.get_list_or("sets") == std::vector<std::string>{"a", "b", "c"});
  CHECK(kv.get_double_or("missing", 7.0) == 7.0);
  CHECK_THROWS_AS(kv.get("missing"), ConfigError);
  CHECK_THROWS_AS(KeyValueFile::parse("no equals sign", "mem"), ConfigError);
}
