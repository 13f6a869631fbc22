#pragma once

// Deterministic enumerations and seeded samplers for values, expressions,
// frames, stacks, contexts and closing substitutions, plus the named
// equivalence corpus.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mlq/context.hpp"
#include "mlq/machine.hpp"
#include "mlq/substitution.hpp"
#include "mlq/syntax.hpp"

namespace mlq {

struct GenSpec {
  std::size_t depth = 2;
  std::size_t max_arity = 3;
  std::vector<Integer> literal_pool{-2, -1, 0, 1, 2, 3};
  std::uint64_t seed = 0;
  /// Cap on the length of any enumerated sequence.
  std::size_t limit = 5000;
};

/// mt19937_64 with a portable bounded draw, so sequences are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  bool chance(std::size_t num, std::size_t den) { return below(den) < num; }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[below(xs.size())];
  }

 private:
  std::mt19937_64 gen_;
};

/// Closed values, layer by layer: the literal pool and [] first, then
/// conses and functions built from earlier layers, constructors taken in
/// turn.
std::vector<Expr> gen_values(const GenSpec& spec);

/// Named expressions scoped in gamma, layered like gen_values.
std::vector<NamedExpr> gen_exprs(const ScopeCtx& gamma, const GenSpec& spec);

/// The frame alphabet: discriminators (case □ of p then 0 else Ω) first,
/// then list projections, applications, additions, conses and a let.
std::vector<Frame> gen_frames(const GenSpec& spec);

/// Stacks over the frame alphabet, ordered by length and then by frame
/// position in the alphabet (innermost frame most significant). Stops at
/// length spec.depth or spec.limit stacks.
std::vector<FrameStack> gen_stacks(const GenSpec& spec);

/// Closed single-hole contexts up to spec.depth.
std::vector<Context> gen_contexts(const GenSpec& spec);

/// Closing substitutions for gamma over gen_values, in diagonal order so a
/// truncated prefix still varies every name.
std::vector<Subst> gen_closing_substs(const ScopeCtx& gamma, const GenSpec& spec);

/// Small closed argument tuples of the given arity.
std::vector<std::vector<Expr>> arg_tuples(std::size_t arity, const GenSpec& spec);

// Random sampling. All outputs are well-scoped by construction.
NamedExpr random_expr(Rng& rng, const ScopeCtx& gamma, std::size_t depth, const GenSpec& spec);
Expr random_value(Rng& rng, std::size_t depth, const GenSpec& spec);
Frame random_frame(Rng& rng, const GenSpec& spec);
FrameStack random_stack(Rng& rng, std::size_t max_len, const GenSpec& spec);
/// A stack of alphabet frames of exactly `len` frames.
FrameStack random_alphabet_stack(Rng& rng, std::size_t len, const GenSpec& spec);
Subst random_closing(Rng& rng, const ScopeCtx& gamma, const GenSpec& spec);
Pattern random_pattern(Rng& rng, std::size_t depth, const GenSpec& spec);

// ---------------------------------------------------------------------------
// Corpus

enum class Expected { Consistent, Counterexample, Inconclusive };

std::string to_string(Expected e);
Expected expected_from_string(const std::string& s);

struct SideCondition {
  /// Only "terminates" for now: ⟨𝓘d, e⟩ ⇓.
  std::string kind;
  std::string expr_src;
};

struct CorpusEntry {
  std::string name;
  std::string description;
  ScopeCtx gamma;
  std::string lhs_src;
  std::string rhs_src;
  Expr lhs;
  Expr rhs;
  std::vector<SideCondition> side_conditions;
  Expected expected;
  /// Overrides of `expected` for particular methods.
  std::map<std::string, Expected> expected_by_method;

  Expected expected_for(const std::string& method) const;
};

std::vector<CorpusEntry> corpus();

/// Parses `X,Y,f/1` into a scope.
ScopeCtx parse_gamma(const std::string& text);
std::string gamma_to_string(const ScopeCtx& gamma);

}  // namespace mlq
