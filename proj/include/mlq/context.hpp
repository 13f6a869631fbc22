#pragma once

// Single-hole expression contexts. Unlike substitution, plugging may
// capture: the hole sits under the context's binders.

#include "mlq/syntax.hpp"

namespace mlq {

/// A named term with exactly one hole.
struct Context {
  NamedExpr term;
};

/// Throws Error unless `c` has exactly one hole.
Context make_context(NamedExpr c);

/// C[e]; free names of e are captured by the binders around the hole.
NamedExpr plug_context(const Context& c, const NamedExpr& e);

/// Core variant: e is converted to named form first (its free names kept).
Expr plug_context(const Context& c, const Expr& e);

/// □ itself.
Context hole_context();

}  // namespace mlq
