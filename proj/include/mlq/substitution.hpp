#pragma once

// Parallel substitution over free names, plus the pattern matching helpers.
//
// A Subst maps every name to either an expression (ExprImage) or a name
// (NameImage); all but finitely many names map to themselves. Because bound
// occurrences are indices in the core, a substitution only ever meets free
// names, so restriction under binders and capture avoidance come for free.

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "mlq/syntax.hpp"

namespace mlq {

struct ExprImage {
  Expr expr;
};
struct NameImage {
  Name name;
};
using SubstImage = std::variant<ExprImage, NameImage>;

bool operator==(const SubstImage& a, const SubstImage& b);

class Subst {
 public:
  /// Total lookup.
  SubstImage operator()(const Name& n) const;

  /// Non-identity bindings, ordered by name.
  const std::map<Name, SubstImage>& bindings() const { return bindings_; }
  bool is_identity() const { return bindings_.empty(); }

  friend Subst id_subst();
  friend Subst update(const Subst& sigma, const Name& x, Expr e);
  friend Subst restrict(const Subst& sigma, const ScopeCtx& names);
  friend Subst rename(const Subst& sigma, const Name& x, const Name& y);

 private:
  std::map<Name, SubstImage> bindings_;
};

Subst id_subst();

/// σ[x ↦ e]. `e` must be locally closed (no escaping indices).
Subst update(const Subst& sigma, const Name& x, Expr e);

/// σ[x₁ ↦ e₁, ..., x_k ↦ e_k]; throws Error when two names coincide.
Subst update(const Subst& sigma, std::span<const std::pair<Name, Expr>> bindings);

/// σ[x ↦ y] as a name image.
Subst rename(const Subst& sigma, const Name& x, const Name& y);

/// σ ∖ {x₁..x_k}: the given names map to themselves again.
Subst restrict(const Subst& sigma, const ScopeCtx& names);

Expr apply_subst(const Expr& e, const Subst& sigma);

/// Replaces the indices of the outermost binder block (slots 0..n-1 as
/// seen from `body`) with `images`, which must be locally closed. Indices
/// past the block are lowered by n.
Expr instantiate(const Expr& body, std::span<const Expr> images);

/// The inverse of instantiate: free occurrences of names[i] become slot i
/// of a new binder block wrapped around `e`.
Expr abstract(const Expr& e, std::span<const Name> names);

std::vector<Name> pattern_vars(const Pattern& p);

/// Throws Error when v is not a value.
bool is_match(const Pattern& p, const Expr& v);

/// The matched sub-values in slot order; nullopt when p does not match v.
std::optional<std::vector<Expr>> match_values(const Pattern& p, const Expr& v);

/// Binds each pattern variable to its sub-value. Throws Error unless
/// is_match(p, v).
Subst match_subst(const Pattern& p, const Expr& v);

}  // namespace mlq
