#include "mlq/scoping.hpp"

#include <algorithm>

namespace mlq {

namespace {

bool within(const ScopeCtx& names, const ScopeCtx& gamma) {
  return std::includes(gamma.begin(), gamma.end(), names.begin(), names.end());
}

}  // namespace

// In the core every bound occurrence is an index, so the syntax-directed
// rules collapse to: no escaping index, no hole, free names inside Γ.
bool exp_scoped(const ScopeCtx& gamma, const Expr& e) {
  if (e.loose() != 0 || e.has_hole()) return false;
  return !e.has_names() || within(free_names(e), gamma);
}

bool val_scoped(const ScopeCtx& gamma, const Expr& v) {
  return v.is_value() && exp_scoped(gamma, v);
}

bool exp_scoped(const ScopeCtx& gamma, const NamedExpr& e) {
  if (e.term.has_hole() || e.term.loose() != 0) return false;
  return within(free_names(e), gamma);
}

bool val_scoped(const ScopeCtx& gamma, const NamedExpr& v) {
  return v.term.is_value() && exp_scoped(gamma, v);
}

bool subst_scoped(const ScopeCtx& gamma, const Subst& sigma, const ScopeCtx& delta) {
  for (const auto& x : gamma) {
    auto img = sigma(x);
    if (auto* n = std::get_if<NameImage>(&img)) {
      if (!delta.contains(n->name)) return false;
    } else if (!val_scoped(delta, std::get<ExprImage>(img).expr)) {
      return false;
    }
  }
  return true;
}

bool preserves(const ScopeCtx& gamma, const Subst& sigma) {
  for (const auto& x : gamma) {
    auto img = sigma(x);
    auto* n = std::get_if<NameImage>(&img);
    if (!n || n->name != x) return false;
  }
  return true;
}

}  // namespace mlq
