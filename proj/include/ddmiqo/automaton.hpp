#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace ddmiqo {

/// Returned by a transition that no feasible completion can follow.
inline constexpr std::int32_t kInfeasible = -2;

/// Minimum-run-length rule on the count s of trailing ones (capped at tau).
/// `layer` is the 0-based variable being decided; the last one is n-1.
std::int32_t contiguity_transition(std::int32_t s, bool assign, int layer, int n, int tau);

/// Deterministic finite automaton restricting the feasible set Z of z.
class ConstraintAutomaton {
 public:
  virtual ~ConstraintAutomaton() = default;

  virtual std::int32_t initial() const = 0;
  /// Next state after deciding variable `layer`, or kInfeasible.
  virtual std::int32_t next(std::int32_t state, bool assign, int layer, int n) const = 0;
  /// Upper bound on the number of distinct states (for budget estimates).
  virtual int state_count() const = 0;
  /// Serialized descriptor: a kind name plus one integer parameter.
  virtual std::string kind() const = 0;
  virtual int parameter() const = 0;
};

class ContiguityAutomaton final : public ConstraintAutomaton {
 public:
  explicit ContiguityAutomaton(int tau);

  std::int32_t initial() const override { return 0; }
  std::int32_t next(std::int32_t state, bool assign, int layer, int n) const override {
    return contiguity_transition(state, assign, layer, n, tau_);
  }
  int state_count() const override { return tau_ + 1; }
  std::string kind() const override { return "contiguity"; }
  int parameter() const override { return tau_; }
  int tau() const noexcept { return tau_; }

 private:
  int tau_;
};

/// Rebuilds an automaton from its descriptor; kind "none" yields nullptr.
std::unique_ptr<ConstraintAutomaton> make_automaton(const std::string& kind, int parameter);

}  // namespace ddmiqo
