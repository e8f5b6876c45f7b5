#include "ddmiqo/automaton.hpp"

#include <algorithm>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

std::int32_t contiguity_transition(std::int32_t s, bool assign, int layer, int n, int tau) {
  if (!assign && s >= 1 && s < tau) return kInfeasible;  // open run shorter than tau
  if (assign && layer == n - 1 && s < tau - 1) return kInfeasible;  // run cannot be finished
  if (!assign && s == tau) return 0;
  return std::min<std::int32_t>(tau, s + (assign ? 1 : 0));
}

ContiguityAutomaton::ContiguityAutomaton(int tau) : tau_(tau) {
  if (tau < 1) throw InputError("contiguity tau must be at least 1");
}

std::unique_ptr<ConstraintAutomaton> make_automaton(const std::string& kind, int parameter) {
  if (kind == "none" || kind.empty()) return nullptr;
  if (kind == "contiguity") return std::make_unique<ContiguityAutomaton>(parameter);
  throw InputError("unknown constraint automaton kind '" + kind + "'");
}

}  // namespace ddmiqo
