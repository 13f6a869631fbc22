#pragma once

// Bounded equivalence checkers. Every unbounded quantifier (stacks,
// closing substitutions, contexts, argument values, step indices) is
// replaced by an enumeration prefix plus seeded samples, so a Consistent
// verdict only ever means "nothing found within this budget".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlq/context.hpp"
#include "mlq/generators.hpp"
#include "mlq/machine.hpp"
#include "mlq/substitution.hpp"
#include "mlq/syntax.hpp"

namespace mlq {

struct Budget {
  std::size_t fuel = 10000;         // lhs evaluation
  std::size_t probe_fuel = 50000;   // rhs evaluation
  std::size_t depth = 3;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  bool accept_fuel_refutation = false;
  bool parallel = true;
  /// Cap on closing substitutions tried for open terms.
  std::size_t closings = 24;

  /// Throws PreconditionError when probe_fuel < fuel.
  void validate() const;
  GenSpec gen_spec() const;
};

/// Inputs outside a checker's domain: open terms where closed ones are
/// required, unscoped terms, inconsistent budgets. Not a verdict.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

struct Observation {
  enum class Kind { Terminated, Diverges, Stuck, OutOfFuel, NotRun };
  Kind kind = Kind::NotRun;
  std::optional<Expr> value;
  std::size_t steps = 0;
  std::optional<CycleCertificate> cert;
  std::string reason;
};

std::string to_string(Observation::Kind k);

struct Witness {
  std::string direction;  // "lhs<=rhs" or "rhs<=lhs"
  FrameStack stack;
  std::optional<NamedExpr> context;
  /// Name -> closed value, for open terms.
  std::vector<std::pair<Name, Expr>> closing;
  /// The closed programs actually run (after closing and plugging).
  Expr lhs_program;
  Expr rhs_program;
  Observation lhs;
  Observation rhs;
  /// divergence | stuck | value | fuel
  std::string certification;
  std::size_t probe_index = 0;
};

struct Verdict {
  Expected kind = Expected::Consistent;
  std::optional<Witness> witness;
  std::string reason;
  std::size_t probes = 0;
};

nlohmann::json to_json(const Budget& b);
nlohmann::json to_json(const Observation& o);
nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const Verdict& v);

// ---------------------------------------------------------------------------
// Probes: one closed trial each, independent of the others.

enum class ProbeCheck {
  Termination,  // lhs terminates (eval) => rhs terminates
  Indexed,      // lhs terminates in m <= fuel steps (termination relation) => rhs terminates
  ValueEq,      // additionally, the final values must be alpha-equal
  Behavioural,  // additionally, the final values must be related by behav_val_le
};

struct Probe {
  FrameStack stack;
  Expr lhs;
  Expr rhs;
  bool flipped = false;  // checks rhs <= lhs of the original pair
  std::optional<NamedExpr> context;
  std::vector<std::pair<Name, Expr>> closing;
};

enum class ProbeStatus { Pass, Fail, Unknown };

struct ProbeResult {
  ProbeStatus status = ProbeStatus::Pass;
  Observation lhs;
  Observation rhs;
  std::string certification;
};

ProbeResult run_probe(const Probe& p, ProbeCheck check, const Budget& b);

/// Runs probes in order and folds them: the lowest-indexed Fail wins,
/// otherwise any Unknown makes the verdict Inconclusive. The parallel and
/// serial versions must agree exactly.
Verdict run_probes_serial(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b);
Verdict run_probes_parallel(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b);
Verdict run_probes(const std::vector<Probe>& probes, ProbeCheck check, const Budget& b);

// ---------------------------------------------------------------------------
// Probe material

/// Stacks built from the shapes of two closed values: case discriminators
/// on a literal or constructor mismatch, head/tail projections on conses,
/// applications on functions (recursing on the results). `complete` is
/// cleared when the search was cut short by depth, fuel or the sample cap.
std::vector<FrameStack> value_directed_stacks(const Expr& v1, const Expr& v2, const Budget& b, bool& complete);

/// The CIU stack family for a closed pair: 𝓘d, the gen_stacks prefix,
/// value-directed stacks for the two sides' values at 𝓘d, then seeded
/// random alphabet stacks.
std::vector<FrameStack> ciu_stacks(const Expr& e1, const Expr& e2, const Budget& b);

/// Closing substitutions for gamma, at most b.closings of them.
std::vector<Subst> closings_for(const ScopeCtx& gamma, const Budget& b);

// ---------------------------------------------------------------------------
// Checkers. The *_le functions test one direction; equivalence() tests both.

Verdict naive_behav_le(const Expr& e1, const Expr& e2, const Budget& b);
Verdict ciu_le(const Expr& e1, const Expr& e2, const Budget& b);
Verdict ciu_le_open(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b);
Verdict behav_le(const Expr& e1, const Expr& e2, const Budget& b);
Verdict ctx_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b);
/// Naive contextual equivalence: contexts as in ctx_le, observing values.
Verdict naive_ctx_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b);
Verdict logrel_le(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b);

// Step-indexed relations with sampled quantifiers. False only on a
// definite refutation; running out of fuel counts as related.
bool logrel_val(std::size_t n, const Expr& v1, const Expr& v2, const Budget& b);
bool logrel_exp(std::size_t n, const Expr& e1, const Expr& e2, const Budget& b);
bool logrel_stack(std::size_t n, const FrameStack& k1, const FrameStack& k2, const Budget& b);
bool logrel_gamma(std::size_t n, const ScopeCtx& gamma, const Subst& s1, const Subst& s2, const Budget& b);
bool logrel_open(const ScopeCtx& gamma, const Expr& e1, const Expr& e2, const Budget& b);

/// Index 0 relates everything; functions are probed by applying them to
/// arg_tuples and comparing the results one index lower.
bool behav_val_le(std::size_t n, const Expr& v1, const Expr& v2, const Budget& b);

Verdict discriminator_search(const Expr& e1, const Expr& e2, const Budget& b);

const std::vector<std::string>& method_names();
/// Methods that need closed inputs.
bool closed_only(const std::string& method);

/// Both directions of the named method. Throws PreconditionError when an
/// input is not scoped in gamma (or not closed, for closed-only methods),
/// and Error on an unknown method.
Verdict equivalence(const std::string& method, const ScopeCtx& gamma, const Expr& e1, const Expr& e2,
                    const Budget& b);

}  // namespace mlq
