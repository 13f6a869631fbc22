#pragma once

// Scoping judgements Γ ⊢ᵥ v, Γ ⊢ₑ e and Γ ⊢ σ :: Δ.

#include "mlq/substitution.hpp"
#include "mlq/syntax.hpp"

namespace mlq {

/// False for non-values.
bool val_scoped(const ScopeCtx& gamma, const Expr& v);
bool exp_scoped(const ScopeCtx& gamma, const Expr& e);
inline bool closed(const Expr& e) { return exp_scoped({}, e); }

bool val_scoped(const ScopeCtx& gamma, const NamedExpr& v);
bool exp_scoped(const ScopeCtx& gamma, const NamedExpr& e);

/// Every x in Γ maps to a value scoped in Δ, or to a name in Δ.
bool subst_scoped(const ScopeCtx& gamma, const Subst& sigma, const ScopeCtx& delta);

/// Every x in Γ maps to itself.
bool preserves(const ScopeCtx& gamma, const Subst& sigma);

}  // namespace mlq
