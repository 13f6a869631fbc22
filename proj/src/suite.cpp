#include "mlq/suite.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "mlq/scoping.hpp"
#include "mlq/surface.hpp"

namespace mlq {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t RunReport::matched() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.match ? 1 : 0;
  return n;
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CorpusEntry> load_manifest(const fs::path& manifest) {
  json j;
  try {
    j = json::parse(slurp(manifest));
  } catch (const json::exception& e) {
    throw Error(manifest.string() + ": " + e.what());
  }
  const fs::path dir = manifest.parent_path();
  std::vector<CorpusEntry> out;
  try {
    for (const auto& row : j.at("entries")) {
      CorpusEntry e;
      e.name = row.at("name").get<std::string>();
      e.description = row.value("description", "");
      e.gamma = parse_gamma(row.value("gamma", ""));
      e.lhs_src = slurp(dir / row.at("lhs").get<std::string>());
      e.rhs_src = slurp(dir / row.at("rhs").get<std::string>());
      e.lhs = to_core(parse_expr(e.lhs_src));
      e.rhs = to_core(parse_expr(e.rhs_src));
      for (const auto& sc : row.value("side_conditions", json::array())) {
        e.side_conditions.push_back({sc.at("kind").get<std::string>(), sc.at("expr").get<std::string>()});
      }
      e.expected = expected_from_string(row.at("expected").get<std::string>());
      const json by_method = row.value("expected_by_method", json::object());
      for (const auto& [m, v] : by_method.items()) {
        e.expected_by_method[m] = expected_from_string(v.get<std::string>());
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(manifest.string() + ": " + e.what());
  }
  return out;
}

void export_corpus(const std::vector<CorpusEntry>& entries, const fs::path& dir) {
  fs::create_directories(dir);
  json rows = json::array();
  for (const auto& e : entries) {
    const std::string lhs = e.name + ".lhs.mlq", rhs = e.name + ".rhs.mlq";
    std::ofstream(dir / lhs) << "% " << e.name << ": " << e.description << "\n" << e.lhs_src << "\n";
    std::ofstream(dir / rhs) << "% " << e.name << ": " << e.description << "\n" << e.rhs_src << "\n";
    json row{{"name", e.name},
             {"description", e.description},
             {"gamma", gamma_to_string(e.gamma)},
             {"lhs", lhs},
             {"rhs", rhs},
             {"expected", to_string(e.expected)}};
    json sc = json::array();
    for (const auto& s : e.side_conditions) sc.push_back({{"kind", s.kind}, {"expr", s.expr_src}});
    row["side_conditions"] = sc;
    json bm = json::object();
    for (const auto& [m, v] : e.expected_by_method) bm[m] = to_string(v);
    row["expected_by_method"] = bm;
    rows.push_back(row);
  }
  std::ofstream(dir / "manifest.json") << json{{"entries", rows}}.dump(2) << "\n";
}

bool check_side_conditions(const CorpusEntry& e, const Budget& b) {
  for (const auto& sc : e.side_conditions) {
    if (sc.kind != "terminates") return false;
    Expr x = to_core(parse_expr(sc.expr_src));
    if (!closed(x)) return false;
    auto r = detect_divergence(Configuration{{}, x}, b.probe_fuel);
    if (!std::holds_alternative<divergence::Terminates>(r)) return false;
  }
  return true;
}

std::vector<std::string> applicable_methods(const CorpusEntry& e, const std::vector<std::string>& methods) {
  std::vector<std::string> out;
  for (const auto& m : methods) {
    if (!e.gamma.empty() && closed_only(m)) continue;
    out.push_back(m);
  }
  return out;
}

RunReport run_suite(const std::vector<CorpusEntry>& entries, const std::vector<std::string>& methods,
                    const Budget& b) {
  RunReport rep;
  rep.budget = b;
  for (const auto& e : entries) {
    const bool side_ok = check_side_conditions(e, b);
    if (!side_ok) rep.failed_side_conditions.push_back(e.name);
    for (const auto& m : applicable_methods(e, methods)) {
      ReportRow row;
      row.name = e.name;
      row.method = m;
      row.expected = e.expected_for(m);
      auto t0 = std::chrono::steady_clock::now();
      row.verdict = equivalence(m, e.gamma, e.lhs, e.rhs, b);
      row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      row.match = side_ok && row.verdict.kind == row.expected;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

json to_json(const RunReport& r, bool with_timing) {
  json rows = json::array();
  std::map<std::string, std::size_t> tally;
  for (const auto& row : r.rows) {
    json j{{"name", row.name},
           {"method", row.method},
           {"verdict", to_string(row.verdict.kind)},
           {"expected", to_string(row.expected)},
           {"match", row.match}};
    if (!row.verdict.reason.empty()) j["reason"] = row.verdict.reason;
    if (row.verdict.witness) j["witness"] = to_json(*row.verdict.witness);
    if (with_timing) j["elapsed_ms"] = row.elapsed_ms;
    rows.push_back(j);
    ++tally[to_string(row.verdict.kind)];
  }
  json summary{{"rows", r.rows.size()}, {"matched", r.matched()}, {"mismatched", r.mismatched()}};
  for (const auto& [k, n] : tally) summary[k] = n;
  return {{"budget", to_json(r.budget)},
          {"rows", rows},
          {"failed_side_conditions", r.failed_side_conditions},
          {"summary", summary}};
}

}  // namespace mlq
