#pragma once

// Abstract syntax of the object language.
//
// Terms are stored locally nameless: an occurrence of a bound name is a
// de Bruijn index (BVar), a free name stays a Var. A binder introduces a
// block of consecutive slots:
//
//   fun f/k(X1..Xk) -> body      body slots   [f/k, X1, ..., Xk]
//   letrec f/k(X1..Xk) = b in e  b slots      [f/k, X1, ..., Xk]
//                                e slots      [f/k]
//   let X = e1 in e2             e2 slots     [X]
//   case e of p then t else u    t slots      vars(p), left to right
//
// BVar(i) with i < slots refers to slot i of the innermost binder, larger
// indices skip past it. So in `fun f/1(X) -> X` the body is BVar(1) (slot
// #2 when counted from one, after the self name at #1).
//
// Binders keep the source names as hints for printing; equality ignores
// them. A term whose binders are still referenced by name (straight from
// the parser) is a NamedExpr; to_core/from_core convert between the two.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mlq {

using Integer = boost::multiprecision::cpp_int;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A variable `X` or a function identifier `f/k`.
class Name {
 public:
  static Name var(std::string id);
  static Name fun_id(std::string id, std::size_t arity);

  bool is_var() const { return !fun_; }
  bool is_fun_id() const { return fun_; }
  const std::string& id() const { return id_; }
  std::size_t arity() const { return arity_; }
  std::string str() const;

  auto operator<=>(const Name&) const = default;

 private:
  Name(std::string id, bool fun, std::size_t arity);

  // Sorts variables before function identifiers.
  bool fun_ = false;
  std::string id_;
  std::size_t arity_ = 0;
};

using ScopeCtx = std::set<Name>;

std::string to_string(const ScopeCtx& gamma);

// ---------------------------------------------------------------------------
// Patterns

class Pattern {
 public:
  struct Lit { Integer value; };
  struct Var { std::string name; };
  struct Nil {};
  struct Cons { std::shared_ptr<const Pattern> head, tail; };
  using Data = std::variant<Lit, Var, Nil, Cons>;

  static Pattern lit(Integer v);
  static Pattern var(std::string name);
  static Pattern nil();
  static Pattern cons(Pattern head, Pattern tail);

  const Data& data() const { return *data_; }
  template <class T> const T* as() const { return std::get_if<T>(data_.get()); }

  /// Number of variables, i.e. the slot count of the then-branch.
  std::size_t var_count() const { return vars_; }
  std::size_t hash() const { return hash_; }

 private:
  explicit Pattern(Data d);
  std::shared_ptr<const Data> data_;
  std::size_t vars_ = 0;
  std::size_t hash_ = 0;
};

/// Equality up to the names of pattern variables.
bool operator==(const Pattern& a, const Pattern& b);
/// Equality including the names of pattern variables.
bool same_names(const Pattern& a, const Pattern& b);

// ---------------------------------------------------------------------------
// Expressions

class Expr;

namespace node {
struct Lit { Integer value; };
struct Var { Name name; };
struct BVar { std::uint32_t index; };
struct Nil {};
struct Cons;
struct Fun;
struct Apply;
struct Case;
struct Let;
struct Letrec;
struct Add;
struct Hole {};
}  // namespace node

enum class Kind : std::uint8_t {
  Lit, Var, BVar, Nil, Cons, Fun, Apply, Case, Let, Letrec, Add, Hole
};

struct Node;
namespace detail { struct ExprAccess; }

/// Immutable, shared expression handle. Copying is cheap.
class Expr {
 public:
  Expr();  // the literal 0

  static Expr lit(Integer v);
  static Expr lit(long long v) { return lit(Integer(v)); }
  static Expr var(Name n);
  static Expr var(std::string id) { return var(Name::var(std::move(id))); }
  static Expr fun_id(std::string id, std::size_t arity) {
    return var(Name::fun_id(std::move(id), arity));
  }
  static Expr bvar(std::uint32_t index);
  static Expr nil();
  static Expr cons(Expr head, Expr tail);
  static Expr fun(Name self, std::vector<std::string> params, Expr body);
  static Expr apply(Expr fn, std::vector<Expr> args);
  static Expr case_of(Expr scrutinee, Pattern pat, Expr then_branch, Expr else_branch);
  static Expr let(std::string binder, Expr bound, Expr body);
  static Expr letrec(Name self, std::vector<std::string> params, Expr fbody, Expr cont);
  static Expr add(Expr lhs, Expr rhs);
  static Expr hole();

  Kind kind() const;
  template <class T> const T* as() const;

  bool is_value() const;
  /// 1 + the largest index that escapes the term (0 when locally closed).
  std::uint32_t loose() const;
  bool has_names() const;
  bool has_hole() const;
  std::size_t hash() const;
  std::size_t size() const;

  /// Core equality: structure, literals and free names; binder hints ignored.
  friend bool operator==(const Expr& a, const Expr& b);

  const Node* get() const { return node_.get(); }

 private:
  friend struct detail::ExprAccess;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

namespace node {
struct Cons { Expr head, tail; };
struct Fun { Name self; std::vector<std::string> params; Expr body; };
struct Apply { Expr fn; std::vector<Expr> args; };
struct Case { Expr scrutinee; Pattern pattern; Expr then_branch, else_branch; };
struct Let { std::string binder; Expr bound, body; };
struct Letrec { Name self; std::vector<std::string> params; Expr fbody, cont; };
struct Add { Expr lhs, rhs; };
}  // namespace node

struct Node {
  using Data = std::variant<node::Lit, node::Var, node::BVar, node::Nil, node::Cons,
                            node::Fun, node::Apply, node::Case, node::Let, node::Letrec,
                            node::Add, node::Hole>;
  Data data;
  std::size_t hash = 0;
  std::size_t size = 1;
  std::uint32_t loose = 0;
  bool value = false;
  bool names = false;
  bool hole = false;
};

template <class T>
const T* Expr::as() const {
  return std::get_if<T>(&node_->data);
}

/// Named form: binders are referenced by name, no BVar occurs. Produced by
/// the parser and consumed by the printer.
struct NamedExpr {
  Expr term;
};

// ---------------------------------------------------------------------------

bool is_value(const Expr& e);
inline bool is_value(const NamedExpr& e) { return is_value(e.term); }

/// Minimal Γ with exp_scoped(Γ, e).
ScopeCtx free_names(const Expr& e);
ScopeCtx free_names(const NamedExpr& e);

bool alpha_eq(const NamedExpr& a, const NamedExpr& b);

/// Converts to the nameless core. Names listed in `free_slots` that occur
/// free become indices past the outermost binder (slot i of the list maps
/// to index depth + i); other free names stay names.
Expr to_core(const NamedExpr& named, std::span<const Name> free_slots = {});

/// Converts back to named form, choosing binder names that neither capture
/// nor shadow. Dangling indices resolve through `free_env`; throws Error
/// when an index exceeds it.
NamedExpr from_core(const Expr& core, std::span<const Name> free_env = {});

/// Syntactic equality of named terms, binder names included.
bool syntactic_eq(const NamedExpr& a, const NamedExpr& b);

/// The diverging term apply (fun f/0() -> apply f/0())().
Expr omega();

}  // namespace mlq
