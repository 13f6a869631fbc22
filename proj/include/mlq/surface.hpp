#pragma once

// Concrete syntax.
//
//   e ::= fun f/k(X1, ..., Xk) -> e | letrec f/k(X1, ..., Xk) = e in e
//       | let X = e in e | case e of p then e else e | apply a(e, ..., e)
//       | e + e | [e|e] | [] | integer | X | f/k | (e)
//   p ::= integer | X | [] | [p|p]
//
// `+` is left associative and binds loosest; binder forms extend as far
// right as possible. `□` (or `_`) is the hole of frames and contexts, `%`
// starts a comment. Frame stacks are frames separated by `;`, innermost
// first.

#include "json.hpp"

#include <string>
#include <string_view>
#include <vector>

#include "mlq/machine.hpp"
#include "mlq/syntax.hpp"

namespace mlq {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& message);

  SourcePos pos() const { return pos_; }
  const std::vector<std::string>& expected() const { return expected_; }
  /// The message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  SourcePos pos_;
  std::vector<std::string> expected_;
  std::string detail_;
};

NamedExpr parse_expr(std::string_view src);
Pattern parse_pattern(std::string_view src);

/// An expression with exactly one hole anywhere (binders may capture).
NamedExpr parse_context(std::string_view src);

FrameStack parse_framestack(std::string_view src);
Frame parse_frame(std::string_view src);

std::string pretty(const NamedExpr& e);
std::string pretty(const Pattern& p);
/// pretty(from_core(e)).
std::string pretty_core(const Expr& e);
std::string pretty(const Frame& f);
/// Frames joined by " ; ", or "id" for the empty stack.
std::string pretty(const FrameStack& k);

/// The AST as a JSON tree with `kind` tags. Core terms may contain
/// `bvar` nodes.
nlohmann::json to_json(const Expr& e);
nlohmann::json to_json(const Pattern& p);

}  // namespace mlq
