#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "effort/dataset.hpp"
#include "effort/error.hpp"
#include "effort/numerics.hpp"
#include "effort/registry.hpp"

using namespace effort;

namespace {

const char* kMinimal =
    "@relation tiny\n"
    "@attribute size numeric\n"
    "@attribute effort numeric\n"
    "@data\n"
    "1,2\n"
    "2,4\n"
    "3,6\n";

const char* kCommented =
    "% header comment\n"
    "@RELATION tiny\n"
    "% between attributes\n"
    "@Attribute size NUMERIC\n"
    "@attribute effort numeric\n"
    "\n"
    "@DATA\n"
    "% inside data\n"
    "1,2\n"
    "2,4\n"
    "%another\n"
    "3,6\n";

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

ExpectedColumn expected(std::string name, const char* mn, const char* mx, const char* mean,
                        const char* sd) {
  return {std::move(name), PrintedValue::parse(mn), PrintedValue::parse(mx),
          PrintedValue::parse(mean), PrintedValue::parse(sd)};
}

} // namespace

TEST_CASE("arff: minimal file") {
  Dataset d = parse_arff(kMinimal);
  REQUIRE(d.cols() == 1);
  CHECK(d.rows() == 3);
  CHECK(d.features[0].name == "size");
  CHECK(d.features[0].values == std::vector<double>{1, 2, 3});
  CHECK(d.target.name == "effort");
  CHECK(d.target.values == std::vector<double>{2, 4, 6});
}

TEST_CASE("arff: comments are ignored") {
  Dataset a = parse_arff(kMinimal);
  Dataset b = parse_arff(kCommented);
  CHECK(a == b);
}

TEST_CASE("arff: arity mismatch names the line") {
  std::string text = "@relation r\n@attribute a numeric\n@attribute b numeric\n@data\n1,2\n3\n4,5\n";
  std::string msg = error_of([&] { parse_arff(text); });
  CHECK(msg.find("line 6") != std::string::npos);
  CHECK(msg.find("1 fields, 2 declared") != std::string::npos);
}

TEST_CASE("arff: guards") {
  CHECK_THROWS_AS(parse_arff("@relation r\n@data\n1\n"), DataError);
  CHECK_THROWS_AS(parse_arff("@attribute a numeric\n@data\n"), DataError);
  CHECK_THROWS_AS(parse_arff("@relation r\n@attribute a numeric\n@attribute b numeric\n"), DataError);
  std::string bad = "@relation r\n@attribute a numeric\n@attribute b numeric\n@data\n1,x\n2,3\n4,5\n";
  std::string msg = error_of([&] { parse_arff(bad); });
  CHECK(msg.find("line 5") != std::string::npos);
  CHECK(msg.find("non-numeric") != std::string::npos);
  std::string missing = "@relation r\n@attribute a numeric\n@attribute b numeric\n@data\n1,2\n?,3\n4,5\n6,7\n";
  msg = error_of([&] { parse_arff(missing); });
  CHECK(msg.find("missing value") != std::string::npos);
  CHECK(msg.find("line 6") != std::string::npos);
}

TEST_CASE("arff: missing values in drop-listed columns drop the row") {
  std::string text =
      "@relation r\n@attribute a numeric\n@attribute team numeric\n@attribute e numeric\n@data\n"
      "1,2,3\n2,?,4\n3,1,5\n4,1,6\n";
  LoadOptions opt;
  opt.drop_rows_missing = {"team"};
  Dataset d = parse_arff(text, opt);
  CHECK(d.rows() == 3);
  CHECK(d.dropped_rows == 1);
  CHECK(d.target.values == std::vector<double>{3, 5, 6});

  // Missingness confined to a column outside the selected set keeps the row.
  LoadOptions cols;
  cols.columns = std::vector<std::string>{"a"};
  Dataset kept = parse_arff(text, cols);
  CHECK(kept.rows() == 4);
  CHECK(kept.cols() == 1);
}

TEST_CASE("arff: nominal attributes map to level indices") {
  std::string text =
      "@relation r\n@attribute lang {cobol,  'c++', pl1}\n@attribute e numeric\n@data\n"
      "pl1,1\ncobol,2\n'c++',3\n";
  Dataset d = parse_arff(text);
  REQUIRE(d.cols() == 1);
  CHECK(d.features[0].nominal);
  CHECK(d.features[0].levels == std::vector<std::string>{"cobol", "c++", "pl1"});
  CHECK(d.features[0].values == std::vector<double>{2, 0, 1});
  CHECK_THROWS_AS(parse_arff("@relation r\n@attribute l {a,b}\n@attribute e numeric\n@data\nz,1\na,2\nb,3\n"),
                  DataError);
}

TEST_CASE("arff: explicit target") {
  LoadOptions opt;
  opt.target = "size";
  Dataset d = parse_arff(kMinimal, opt);
  CHECK(d.target.name == "size");
  CHECK(d.features[0].name == "effort");
  opt.target = "nope";
  CHECK_THROWS_AS(parse_arff(kMinimal, opt), DataError);
}

TEST_CASE("csv: basic load") {
  Dataset d = parse_csv("x,Effort\n1,2\n2,4\n3,6\n", "Effort");
  REQUIRE(d.cols() == 1);
  CHECK(d.features[0].name == "x");
  CHECK(d.features[0].values == std::vector<double>{1, 2, 3});
  CHECK(d.target.values == std::vector<double>{2, 4, 6});
}

TEST_CASE("csv: guards") {
  std::string msg = error_of([] { parse_csv("x,Cost\n1,2\n2,4\n3,6\n", "Effort"); });
  CHECK(msg.find("target") != std::string::npos);
  msg = error_of([] { parse_csv("x,Effort\n1,2\n1\n3,6\n", "Effort"); });
  CHECK(msg.find("ragged") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK_THROWS_AS(parse_csv("", "Effort"), DataError);
}

TEST_CASE("csv: quoted fields and CRLF") {
  Dataset d = parse_csv("\"Simple UC\",\"a,b\",Effort\r\n1,2,3\r\n4,5,6\r\n7,8,9\r\n", "Effort");
  REQUIRE(d.cols() == 2);
  CHECK(d.features[0].name == "Simple UC");
  CHECK(d.features[1].name == "a,b");
  CHECK(d.target.values == std::vector<double>{3, 6, 9});
}

TEST_CASE("select_schema") {
  std::string text = "a,b,c,Effort\n1,2,3,4\n5,6,7,8\n9,10,11,12\n";
  Dataset d = parse_csv(text, "Effort");
  Dataset full = select_schema(d, {"a", "b", "c"});
  CHECK(full == d);
  Dataset with_target = select_schema(d, {"a", "b", "c", "Effort"});
  CHECK(with_target == d);
  Dataset sub = select_schema(d, {"c", "a"});
  REQUIRE(sub.cols() == 2);
  CHECK(sub.features[0].name == "c");
  CHECK(sub.features[1].name == "a");
  CHECK(sub.target == d.target);
  CHECK_THROWS_AS(select_schema(d, {"a", "Bogus"}), DataError);

  // Profile of the full selection equals the original profile on shared columns.
  ProfileStats p = compute_profile(d);
  ProfileStats q = compute_profile(sub);
  for (const auto& c : q.columns) {
    const ColumnProfile* o = p.find(c.name);
    REQUIRE(o != nullptr);
    CHECK(o->min == c.min);
    CHECK(o->max == c.max);
    CHECK(o->mean == c.mean);
    CHECK(o->std_dev == c.std_dev);
  }
}

TEST_CASE("profile: examples") {
  ColumnProfile c = profile_column("c", {5, 5, 5});
  CHECK(c.min == 5);
  CHECK(c.max == 5);
  CHECK(c.mean == 5);
  CHECK(c.std_dev == 0);
  ColumnProfile t = profile_column("t", {0, 2});
  CHECK(t.mean == 1);
  CHECK(t.std_dev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(t.std_dev - 1.41421) < 1e-5);
}

TEST_CASE("profile: invariants on random columns") {
  RngStream rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.next_below(40);
    std::vector<double> v(n);
    bool constant = rng.next_below(5) == 0;
    for (auto& x : v) x = constant ? 3.25 : rng.next_uniform(-1e3, 1e3) * 1e-3 * (1 + trial);
    ColumnProfile p = profile_column("x", v);
    CHECK(p.min <= p.mean);
    CHECK(p.mean <= p.max);
    CHECK(p.std_dev >= 0);
    if (constant || n == 1) CHECK(p.std_dev == 0);
    else CHECK(p.std_dev > 0);
  }
}

TEST_CASE("printed values") {
  PrintedValue p = PrintedValue::parse("21.875");
  CHECK(p.value == 21.875);
  CHECK(p.decimals == 3);
  CHECK(p.last_unit() == doctest::Approx(0.001));
  CHECK(PrintedValue::parse("113930").decimals == 0);
  CHECK(PrintedValue::parse("113930").last_unit() == 1);
  CHECK(PrintedValue::parse("10499.90").decimals == 2);
  CHECK_THROWS_AS(PrintedValue::parse("abc"), DataError);
}

TEST_CASE("validate_profile: examples") {
  CHECK(cell_matches(21.875, PrintedValue::parse("21.875"), 0.0));
  CHECK(cell_matches(21.875, PrintedValue::parse("21.88"), 0.0));
  CHECK_FALSE(cell_matches(30.0, PrintedValue::parse("21.875"), 0.01));
  CHECK_FALSE(cell_matches(21.877, PrintedValue::parse("21.875"), 0.0));
  CHECK(cell_matches(21.877, PrintedValue::parse("21.875"), 1e-3));

  ProfileStats stats;
  stats.columns.push_back({"Effort", 0.5, 105.2, 30.0, 28.417});
  ExpectedProfile exp;
  exp.columns.push_back(expected("Effort", "0.5", "105.2", "21.875", "28.417"));
  ValidationReport r = validate_profile(stats, exp, 0.01);
  CHECK(r.cells.size() == 4);
  CHECK(r.failures() == 1);
  CHECK_FALSE(r.ok());
  for (const auto& c : r.cells) CHECK(c.pass == (c.stat != "mean"));

  ValidationReport w = validate_profile(stats, exp, 0.01, {{"Effort", "mean", "typo"}});
  CHECK(w.ok());
  CHECK(w.waived() == 1);
  // A waiver on a passing cell is not applied.
  ValidationReport unused = validate_profile(stats, exp, 0.01, {{"Effort", "max", "x"}});
  CHECK(unused.waived() == 0);
  CHECK(unused.failures() == 1);

  ExpectedProfile other;
  other.columns.push_back(expected("Cost", "0", "1", "0.5", "0.1"));
  CHECK_THROWS_AS(validate_profile(stats, other, 0.01), DataError);
}

TEST_CASE("csv round trip") {
  RngStream rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t rows = 3 + rng.next_below(20);
    std::size_t cols = 1 + rng.next_below(5);
    Dataset d;
    d.id = "rt";
    for (std::size_t j = 0; j < cols; ++j) {
      FeatureColumn f{"f" + std::to_string(j), {}, false, {}};
      for (std::size_t i = 0; i < rows; ++i) f.values.push_back(rng.next_uniform(-1e6, 1e6) / 3.0);
      d.features.push_back(std::move(f));
    }
    d.target.name = "Effort";
    for (std::size_t i = 0; i < rows; ++i) d.target.values.push_back(std::ldexp(rng.next_unit(), 40) / 7.0);
    Dataset back = parse_csv(to_csv(d), "Effort");
    CHECK(back == d);
  }
}

TEST_CASE("ingestion is deterministic") {
  auto dir = std::filesystem::temp_directory_path() / "effort_test_dataset";
  std::filesystem::create_directories(dir);
  Dataset d = parse_arff(kMinimal);
  write_csv(d, dir / "a.csv");
  Dataset a = load_csv(dir / "a.csv", "effort");
  Dataset b = load_csv(dir / "a.csv", "effort");
  CHECK(a == b);
  CHECK(a.source_checksum == b.source_checksum);
  CHECK(a.source_checksum == sha256_hex(read_file(dir / "a.csv")));
  CHECK(a == d);
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("dataset validation") {
  Dataset d = parse_arff(kMinimal);
  d.id = "x";
  CHECK_NOTHROW(d.validate());
  Dataset two = d;
  two.features[0].values.pop_back();
  two.target.values.pop_back();
  CHECK_THROWS_AS(two.validate(), DataError);
  Dataset ragged = d;
  ragged.features[0].values.pop_back();
  CHECK_THROWS_AS(ragged.validate(), DataError);
  Dataset nan = d;
  nan.features[0].values[1] = std::nan("");
  CHECK_THROWS_AS(nan.validate(), DataError);
  Dataset none = d;
  none.features.clear();
  CHECK_THROWS_AS(none.validate(), DataError);
}

TEST_CASE("registry: vendored datasets reproduce their profiles") {
  Registry reg = Registry::load(std::filesystem::path(EFFORT_SOURCE_DIR) / "data" / "registry.json");
  CHECK(reg.ids().size() == 8);
  for (const auto& e : reg.entries()) {
    if (!e.vendored()) continue;
    CAPTURE(e.id);
    Dataset d = load_dataset(e);
    CHECK(d.cols() == e.schema.size());
    ProfileStats p = compute_profile(d);
    for (const auto& c : p.columns) {
      CHECK(c.min <= c.mean);
      CHECK(c.mean <= c.max);
      CHECK(c.std_dev >= 0);
    }
    ValidationReport r = validate_profile(p, e.expected_profile, 0.0, e.waivers);
    CHECK(r.ok());
    for (const auto& c : r.cells)
      if (c.waiver) CHECK_FALSE(c.waiver->empty());
  }
  CHECK_THROWS_AS(reg.at("bogus"), ConfigError);
}

TEST_CASE("registry: checksum mismatch and absent files") {
  auto dir = std::filesystem::temp_directory_path() / "effort_test_registry";
  std::filesystem::create_directories(dir);
  {
    std::FILE* f = std::fopen((dir / "t.csv").c_str(), "w");
    std::fputs("x,Effort\n1,2\n2,4\n3,6\n", f);
    std::fclose(f);
  }
  std::string json = R"([{"id":"t","title":"t","path":"t.csv","format":"csv","target":"Effort","schema":["x"],
    "sha256":"00","expected_profile":{"x":{"min":"1","max":"3","mean":"2","std":"1"},
    "Effort":{"min":"2","max":"6","mean":"4","std":"2"}}},
    {"id":"gone","title":"g","path":"gone.csv","format":"csv","target":"Effort","schema":["x"],
    "expected_profile":{"x":{"min":"1","max":"3","mean":"2","std":"1"},
    "Effort":{"min":"2","max":"6","mean":"4","std":"2"}}}])";
  Registry reg = Registry::parse(json, dir);
  std::string msg = error_of([&] { load_dataset(reg.at("t")); });
  CHECK(msg.find("checksum") != std::string::npos);
  msg = error_of([&] { load_dataset(reg.at("gone")); });
  CHECK(msg.find("not vendored") != std::string::npos);
  CHECK_THROWS_AS(Registry::parse("{}", dir), ConfigError);
}
