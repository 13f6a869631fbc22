#pragma once

// Frame stack machine: one-step reduction, step-indexed evaluation, the
// inductive termination relation and cycle-based divergence certificates.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <type_traits>
#include <string>
#include <variant>
#include <vector>

#include "mlq/syntax.hpp"

namespace mlq {

namespace frame {
struct AppFn { std::vector<Expr> args; };                           // apply □(e1..ek)
struct AppArg { Expr fn; std::vector<Expr> done, rest; };           // apply v(v1..vi, □, e..)
struct LetF { std::string binder; Expr body; };                     // let X = □ in e, body has 1 slot
struct AddL { Expr rhs; };                                          // □ + e
struct AddR { Expr lhs; };                                          // v + □
struct CaseF { Pattern pattern; Expr then_branch, else_branch; };   // case □ of p then e else e
struct ConsTail { Expr head; };                                     // [e1|□]
struct ConsHead { Expr tail; };                                     // [□|v2]
}  // namespace frame

class Frame {
 public:
  using Data = std::variant<frame::AppFn, frame::AppArg, frame::LetF, frame::AddL, frame::AddR,
                            frame::CaseF, frame::ConsTail, frame::ConsHead>;

  // Implicit on purpose: frames are built from their alternatives.
  Frame(Data d);  // NOLINT
  template <class T>
    requires std::is_constructible_v<Data, T> && (!std::is_same_v<std::decay_t<T>, Data>)
  Frame(T f) : Frame(Data(std::move(f))) {}  // NOLINT

  const Data& data() const { return data_; }
  template <class T> const T* as() const { return std::get_if<T>(&data_); }
  std::size_t hash() const { return hash_; }

  friend bool operator==(const Frame& a, const Frame& b);

 private:
  Data data_;
  std::size_t hash_;
};

/// Persistent stack of frames, innermost first. The default value is 𝓘d.
class FrameStack {
 public:
  FrameStack() = default;
  static FrameStack from_frames(const std::vector<Frame>& innermost_first);

  bool empty() const { return !top_; }
  std::size_t size() const { return top_ ? top_->size : 0; }
  std::size_t hash() const { return top_ ? top_->hash : 0x51ed27u; }

  const Frame& top() const { return top_->frame; }
  FrameStack pop() const { return FrameStack(top_->next); }
  FrameStack push(Frame f) const;

  /// this ⧺ outer.
  FrameStack append(const FrameStack& outer) const;
  std::vector<Frame> frames() const;

  friend bool operator==(const FrameStack& a, const FrameStack& b);

 private:
  struct Cell {
    Frame frame;
    std::shared_ptr<const Cell> next;
    std::size_t size;
    std::size_t hash;
  };
  explicit FrameStack(std::shared_ptr<const Cell> c) : top_(std::move(c)) {}
  std::shared_ptr<const Cell> top_;
};

struct Configuration {
  FrameStack stack;
  Expr expr;

  std::size_t hash() const;
  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.expr == b.expr && a.stack == b.stack;
  }
};

struct Final { Expr value; };
struct Stuck { std::string reason; };
using StepResult = std::variant<Configuration, Final, Stuck>;

/// One reduction step. Deterministic: a value at 𝓘d is Final, a value cons
/// elsewhere is consumed by the top frame rather than decomposed again.
StepResult step(const Configuration& c);

namespace outcome {
struct Terminated { Expr value; std::size_t steps; };
struct OutOfFuel { Configuration last; };
struct Stuck { Configuration at; std::string reason; std::size_t steps; };
}  // namespace outcome
using EvalOutcome = std::variant<outcome::Terminated, outcome::OutOfFuel, outcome::Stuck>;

/// Called with the index and the configuration before every step.
using TraceFn = std::function<void(std::size_t, const Configuration&)>;

EvalOutcome eval(const Expr& e, const FrameStack& k0, std::size_t fuel, const TraceFn& trace = {});

/// The unique m ≤ max with ⟨K, e⟩ ⇓ᵐ, computed by following the rules of the
/// termination relation directly (independently of step).
std::optional<std::size_t> termination_index(const Configuration& c, std::size_t max);
bool terminates_k(const Configuration& c, std::size_t n);

/// The configuration after `mu` steps reappears after `mu + lambda`.
struct CycleCertificate {
  std::size_t mu = 0;
  std::size_t lambda = 0;
};

namespace divergence {
struct Diverges { CycleCertificate cert; };
struct Terminates { Expr value; std::size_t steps; };
struct Unknown { std::string reason; bool stuck = false; };
}  // namespace divergence
using DivergenceResult = std::variant<divergence::Diverges, divergence::Terminates, divergence::Unknown>;

/// Brent's cycle search over the deterministic step relation.
DivergenceResult detect_divergence(const Configuration& c, std::size_t fuel);

/// Replays a certificate from scratch.
bool validate_cycle(const Configuration& c, const CycleCertificate& cert);

Expr plug_frame(const Frame& f, const Expr& e);
/// K[e], innermost frame first.
Expr plug_stack(const FrameStack& k, const Expr& e);

bool frame_closed(const Frame& f);
bool frames_closed(const FrameStack& k);
bool config_closed(const Configuration& c);

}  // namespace mlq
