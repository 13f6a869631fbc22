// mlq: parse, run and compare programs of the distilled Core Erlang.
//
// Exit codes: 0 consistent / success, 1 counterexample (or a suite
// mismatch, or an unscoped term for `scope`), 2 inconclusive, 3 usage or
// precondition error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlq/equivalence.hpp"
#include "mlq/machine.hpp"
#include "mlq/scoping.hpp"
#include "mlq/suite.hpp"
#include "mlq/surface.hpp"

using namespace mlq;
using nlohmann::json;

namespace {

constexpr int kUsage = 3;

struct Options {
  bool human = false;

  std::string file;
  std::string file_b;
  bool core = false;

  std::size_t fuel = 10000;
  std::string stack_file;
  bool trace = false;
  bool certify = false;

  std::string gamma;

  std::string method = "ciu";
  std::size_t probe_fuel = 50000;
  std::size_t depth = 3;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  bool accept_fuel = false;
  bool serial = false;

  std::string manifest = "corpus/manifest.json";
  std::vector<std::string> methods;
  bool no_timing = false;
};

std::string read_source(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    ss << in.rdbuf();
  }
  return ss.str();
}

void emit(const Options& o, const json& j, const std::string& human) {
  if (o.human) {
    std::cout << human << "\n";
  } else {
    std::cout << j.dump() << "\n";
  }
}

int cmd_parse(const Options& o) {
  NamedExpr e = parse_expr(read_source(o.file));
  Expr c = to_core(e);
  json j = to_json(o.core ? c : e.term);
  emit(o, j, o.core ? pretty_core(c) : pretty(e));
  return 0;
}

int cmd_eval(const Options& o) {
  Expr e = to_core(parse_expr(read_source(o.file)));
  FrameStack k;
  if (!o.stack_file.empty()) k = parse_framestack(read_source(o.stack_file));
  if (!closed(e)) throw PreconditionError("program is not closed: free " + to_string(free_names(e)));
  if (!frames_closed(k)) throw PreconditionError("frame stack is not closed");

  if (o.certify) {
    auto r = detect_divergence(Configuration{k, e}, o.fuel);
    json j;
    std::string h;
    if (auto* d = std::get_if<divergence::Diverges>(&r)) {
      j = {{"outcome", "diverges"}, {"certificate", {{"mu", d->cert.mu}, {"lambda", d->cert.lambda}}}};
      h = "diverges (cycle of length " + std::to_string(d->cert.lambda) + " after " + std::to_string(d->cert.mu) +
          " steps)";
    } else if (auto* t = std::get_if<divergence::Terminates>(&r)) {
      j = {{"outcome", "terminated"}, {"value", pretty_core(t->value)}, {"steps", t->steps}};
      h = pretty_core(t->value) + "  (" + std::to_string(t->steps) + " steps)";
    } else {
      auto& u = std::get<divergence::Unknown>(r);
      j = {{"outcome", u.stuck ? "stuck" : "out_of_fuel"}, {"reason", u.reason}};
      h = std::string(u.stuck ? "stuck: " : "out of fuel: ") + u.reason;
    }
    emit(o, j, h);
    return 0;
  }

  TraceFn trace;
  if (o.trace) {
    trace = [&](std::size_t n, const Configuration& c) {
      json line{{"n", n}, {"stack_depth", c.stack.size()}, {"redex", pretty_core(c.expr)}};
      if (o.human) {
        std::cout << n << "  [" << c.stack.size() << "]  " << pretty_core(c.expr) << "\n";
      } else {
        std::cout << line.dump() << "\n";
      }
    };
  }
  auto r = eval(e, k, o.fuel, trace);
  json j;
  std::string h;
  if (auto* t = std::get_if<outcome::Terminated>(&r)) {
    j = {{"outcome", "terminated"}, {"value", pretty_core(t->value)}, {"steps", t->steps}};
    h = pretty_core(t->value) + "  (" + std::to_string(t->steps) + " steps)";
  } else if (auto* s = std::get_if<outcome::Stuck>(&r)) {
    j = {{"outcome", "stuck"}, {"reason", s->reason}, {"steps", s->steps}, {"at", pretty_core(s->at.expr)}};
    h = "stuck after " + std::to_string(s->steps) + " steps: " + s->reason;
  } else {
    j = {{"outcome", "out_of_fuel"}, {"steps", o.fuel}};
    h = "out of fuel after " + std::to_string(o.fuel) + " steps";
  }
  emit(o, j, h);
  return 0;
}

int cmd_scope(const Options& o) {
  Expr e = to_core(parse_expr(read_source(o.file)));
  ScopeCtx g = parse_gamma(o.gamma);
  bool ok = exp_scoped(g, e);
  json fn = json::array();
  for (const auto& n : free_names(e)) fn.push_back(n.str());
  json j{{"gamma", gamma_to_string(g)},
         {"scoped", ok},
         {"value_scoped", val_scoped(g, e)},
         {"is_value", is_value(e)},
         {"free_names", fn}};
  emit(o, j, std::string(ok ? "scoped" : "not scoped") + " in {" + gamma_to_string(g) + "}, free names {" +
                 to_string(free_names(e)) + "}");
  return ok ? 0 : 1;
}

Budget budget_of(const Options& o) {
  Budget b;
  b.fuel = o.fuel;
  b.probe_fuel = o.probe_fuel;
  b.depth = o.depth;
  b.samples = o.samples;
  b.seed = o.seed;
  b.accept_fuel_refutation = o.accept_fuel;
  b.parallel = !o.serial;
  return b;
}

int exit_code(Expected v) {
  switch (v) {
    case Expected::Consistent: return 0;
    case Expected::Counterexample: return 1;
    case Expected::Inconclusive: return 2;
  }
  return kUsage;
}

std::string describe(const Verdict& v) {
  std::string s = to_string(v.kind);
  if (!v.reason.empty()) s += ": " + v.reason;
  if (v.witness) {
    const Witness& w = *v.witness;
    s += "\n  direction  " + w.direction;
    if (w.context) {
      s += "\n  context    " + pretty(*w.context);
    } else {
      s += "\n  stack      " + pretty(w.stack);
    }
    for (const auto& [n, val] : w.closing) s += "\n  closing    " + n.str() + " := " + pretty_core(val);
    s += "\n  lhs        " + to_string(w.lhs.kind) + (w.lhs.value ? " " + pretty_core(*w.lhs.value) : "");
    s += "\n  rhs        " + to_string(w.rhs.kind) + (w.rhs.value ? " " + pretty_core(*w.rhs.value) : "");
    s += "\n  certified  " + w.certification;
  }
  s += "\n  probes     " + std::to_string(v.probes);
  return s;
}

int cmd_equiv(const Options& o) {
  ScopeCtx g = parse_gamma(o.gamma);
  Expr a = to_core(parse_expr(read_source(o.file)));
  Expr b = to_core(parse_expr(read_source(o.file_b)));
  Budget bud = budget_of(o);
  auto t0 = std::chrono::steady_clock::now();
  Verdict v = equivalence(o.method, g, a, b, bud);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json j{{"method", o.method}, {"budget", to_json(bud)}};
  j.update(to_json(v));
  if (!o.no_timing) j["elapsed_ms"] = ms;
  emit(o, j, describe(v));
  return exit_code(v.kind);
}

int cmd_suite(const Options& o) {
  auto entries = load_manifest(o.manifest);
  auto methods = o.methods.empty() ? method_names() : o.methods;
  for (const auto& m : methods) {
    if (std::find(method_names().begin(), method_names().end(), m) == method_names().end() && m != "naive-ctx") {
      throw PreconditionError("unknown method '" + m + "'");
    }
  }
  RunReport r = run_suite(entries, methods, budget_of(o));
  std::ostringstream h;
  for (const auto& row : r.rows) {
    h << (row.match ? "ok    " : "FAIL  ") << row.name << "  " << row.method << "  " << to_string(row.verdict.kind);
    if (!row.match) h << " (expected " << to_string(row.expected) << ")";
    h << "\n";
  }
  for (const auto& n : r.failed_side_conditions) h << "side condition failed: " << n << "\n";
  h << r.matched() << "/" << r.rows.size() << " rows as expected";
  emit(o, to_json(r, !o.no_timing), h.str());
  return r.mismatched() == 0 && r.failed_side_conditions.empty() ? 0 : 1;
}

void budget_flags(CLI::App* sub, Options& o) {
  sub->add_option("--fuel", o.fuel, "lhs step budget")->capture_default_str();
  sub->add_option("--probe-fuel", o.probe_fuel, "rhs step budget")->capture_default_str();
  sub->add_option("--depth", o.depth, "enumeration depth")->capture_default_str();
  sub->add_option("--samples", o.samples, "probe prefix and sample count")->capture_default_str();
  sub->add_option("--seed", o.seed, "random seed (falls back to MLQ_SEED)");
  sub->add_flag("--accept-fuel-refutation", o.accept_fuel, "count rhs fuel exhaustion as a refutation");
  sub->add_flag("--serial", o.serial, "run probes on one thread");
  sub->add_flag("--no-timing", o.no_timing, "omit elapsed_ms");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"mlq: frame stack interpreter and equivalence workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_out = false;
  app.add_flag("--json", json_out, "JSON output (default)");
  app.add_flag("--human", o.human, "human-readable output");

  auto* parse = app.add_subcommand("parse", "parse a program and print its AST as JSON");
  parse->add_option("file", o.file, "program file, - for stdin")->required();
  parse->add_flag("--core", o.core, "print the nameless core");

  auto* ev = app.add_subcommand("eval", "run a closed program on the frame stack machine");
  ev->add_option("file", o.file, "program file, - for stdin")->required();
  ev->add_option("--fuel", o.fuel, "step budget")->capture_default_str();
  ev->add_option("--stack", o.stack_file, "initial frame stack (.mlqs)");
  ev->add_flag("--trace", o.trace, "one JSON line per step");
  ev->add_flag("--certify-divergence", o.certify, "search for a repeating configuration");

  auto* sc = app.add_subcommand("scope", "check a program against a scope");
  sc->add_option("file", o.file, "program file, - for stdin")->required();
  sc->add_option("--gamma", o.gamma, "scope, e.g. X,Y,f/1");

  auto* eq = app.add_subcommand("equiv", "compare two programs");
  eq->add_option("lhs", o.file, "first program")->required();
  eq->add_option("rhs", o.file_b, "second program")->required();
  eq->add_option("--method", o.method, "naive|ciu|logrel|ctx|behav|discriminator|naive-ctx")->capture_default_str();
  eq->add_option("--gamma", o.gamma, "scope of both programs");
  budget_flags(eq, o);

  auto* su = app.add_subcommand("suite", "run a corpus manifest under every method");
  su->add_option("manifest", o.manifest, "manifest.json")->capture_default_str();
  su->add_option("--methods", o.methods, "restrict to these methods")->delimiter(',');
  budget_flags(su, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (json_out) o.human = false;

  bool seed_given = (eq->count("--seed") + su->count("--seed")) > 0;
  if (!seed_given) {
    if (const char* env = std::getenv("MLQ_SEED")) {
      try {
        o.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "mlq: MLQ_SEED is not a number\n";
        return kUsage;
      }
    }
  }

  try {
    if (*parse) return cmd_parse(o);
    if (*ev) return cmd_eval(o);
    if (*sc) return cmd_scope(o);
    if (*eq) return cmd_equiv(o);
    if (*su) return cmd_suite(o);
  } catch (const ParseError& e) {
    std::cerr << (o.file.empty() ? "" : o.file + ":") << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "mlq: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
