#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlq/suite.hpp"

using namespace mlq;
namespace fs = std::filesystem;

namespace {

const fs::path shipped = MLQ_CORPUS_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("the shipped corpus matches the built-in one") {
  auto loaded = load_manifest(shipped / "manifest.json");
  auto built = corpus();
  REQUIRE(loaded.size() == built.size());
  for (std::size_t i = 0; i < built.size(); ++i) {
    CAPTURE(built[i].name);
    CHECK(loaded[i].name == built[i].name);
    CHECK(loaded[i].gamma == built[i].gamma);
    CHECK(loaded[i].lhs == built[i].lhs);
    CHECK(loaded[i].rhs == built[i].rhs);
    CHECK(loaded[i].expected == built[i].expected);
    CHECK(loaded[i].expected_by_method == built[i].expected_by_method);
    CHECK(loaded[i].side_conditions.size() == built[i].side_conditions.size());
  }
}

TEST_CASE("exporting reproduces the shipped files byte for byte") {
  auto dir = fs::temp_directory_path() / "mlq_corpus_export_test";
  fs::remove_all(dir);
  export_corpus(corpus(), dir);
  std::size_t files = 0;
  for (const auto& f : fs::directory_iterator(shipped)) {
    CAPTURE(f.path().filename().string());
    CHECK(slurp(f.path()) == slurp(dir / f.path().filename()));
    ++files;
  }
  CHECK(files == 2 * corpus().size() + 1);
  fs::remove_all(dir);
}

TEST_CASE("side conditions are discharged") {
  Budget b;
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    CHECK(check_side_conditions(e, b));
  }
  CorpusEntry bad = corpus().front();
  bad.side_conditions = {{"terminates", "apply (fun f/0() -> apply f/0())()"}};
  CHECK_FALSE(check_side_conditions(bad, b));
  bad.side_conditions = {{"halts", "1"}};
  CHECK_FALSE(check_side_conditions(bad, b));
}

TEST_CASE("closed-only methods skip open entries") {
  for (const auto& e : corpus()) {
    auto ms = applicable_methods(e, method_names());
    if (e.gamma.empty()) {
      CHECK(ms.size() == method_names().size());
    } else {
      for (const auto& m : ms) CHECK_FALSE(closed_only(m));
    }
  }
}

TEST_CASE("a small suite run matches and reports consistently") {
  Budget b;
  b.depth = 2;
  b.samples = 150;
  auto entries = corpus();
  auto rep = run_suite(entries, {"ciu", "discriminator"}, b);
  CHECK(rep.mismatched() == 0);
  CHECK(rep.failed_side_conditions.empty());
  auto j = to_json(rep, false);
  CHECK(j["summary"]["rows"] == rep.rows.size());
  CHECK(j["summary"]["matched"] == rep.matched());
  CHECK_FALSE(j["rows"][0].contains("elapsed_ms"));
  CHECK(to_json(rep, true)["rows"][0].contains("elapsed_ms"));
}

TEST_CASE("malformed manifests are errors") {
  auto dir = fs::temp_directory_path() / "mlq_bad_manifest";
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{\"entries\": [{\"name\": 1}]}";
  CHECK_THROWS_AS(load_manifest(dir / "manifest.json"), Error);
  std::ofstream(dir / "manifest.json") << "not json";
  CHECK_THROWS_AS(load_manifest(dir / "manifest.json"), Error);
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), Error);
  fs::remove_all(dir);
}
