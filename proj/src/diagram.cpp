#include "ddmiqo/diagram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <sstream>
#include <unordered_map>

#include "ddmiqo/errors.hpp"

#ifdef DDMIQO_HAVE_OPENMP
#include <omp.h>
#endif

namespace ddmiqo {

std::string to_string(DiagramMode mode) {
  switch (mode) {
    case DiagramMode::kExact: return "exact";
    case DiagramMode::kEpsExact: return "eps_exact";
    case DiagramMode::kTruncated: return "truncated";
  }
  return "unknown";
}

int Diagram::node_layer(std::int32_t node) const {
  const auto it = std::upper_bound(layer_begin.begin(), layer_begin.end(), node);
  return static_cast<int>(it - layer_begin.begin()) - 1;
}

double Diagram::u_dot(std::int64_t arc, std::span<const double> d) const noexcept {
  const auto b = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc)]);
  const auto e = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc) + 1]);
  double acc = 0.0;
  for (std::size_t t = b; t < e; ++t) acc += u_value[t] * d[static_cast<std::size_t>(u_index[t])];
  return acc;
}

TransitionVector Diagram::arc_u(std::int64_t arc) const {
  TransitionVector t;
  t.layer = arcs[static_cast<std::size_t>(arc)].layer;
  const auto s = u_support(arc);
  const auto v = u_values(arc);
  t.support.assign(s.begin(), s.end());
  t.values.assign(v.begin(), v.end());
  return t;
}

namespace {

void check_comparable(const DiagramState& a, const DiagramState& b) {
  if (a.layer != b.layer) {
    throw InputError("state_distance: layers differ (" + std::to_string(a.layer) + " vs " +
                     std::to_string(b.layer) + ")");
  }
  if (a.columns != b.columns) throw InputError("state_distance: relevant column sets differ");
}

// Early-exit variant: false as soon as some entry differs by more than eps.
bool within(const DiagramState& a, const DiagramState& b, double eps, double& dist) {
  dist = 0.0;
  for (std::size_t t = 0; t < a.values.size(); ++t) {
    const double diff = std::abs(a.values[t] - b.values[t]);
    if (diff > dist) {
      dist = diff;
      if (dist > eps) return false;
    }
  }
  return true;
}

struct Candidate {
  DiagramState state;
  TransitionVector u;
  bool feasible = false;
};

constexpr int kKeyCoords = 3;

struct BucketKey {
  std::int32_t constraint = 0;
  std::int32_t width = 0;
  std::int64_t q[kKeyCoords] = {0, 0, 0};
  bool operator==(const BucketKey&) const = default;
};

struct BucketHash {
  std::size_t operator()(const BucketKey& k) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.constraint));
    auto mix = [&](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(k.width));
    for (int i = 0; i < k.width; ++i) mix(static_cast<std::uint64_t>(k.q[i]));
    return static_cast<std::size_t>(h);
  }
};

// Merge index over admitted states of one layer. Keys use the diagonal entries
// of the trailing relevant columns; a state within eps in the infinity norm has
// every key coordinate in the same or an adjacent cell.
class MergeIndex {
 public:
  explicit MergeIndex(double eps) : eps_(eps), cell_(eps * (1.0 + 1e-6)) {}

  // Minimum admitted id within eps of s (same constraint state), or -1.
  std::int32_t find(const DiagramState& s, const std::vector<DiagramState>& admitted,
                    double& dist) const {
    BucketKey base = key_of(s);
    std::int32_t best = -1;
    double best_dist = 0.0;
    auto scan = [&](const BucketKey& key) {
      const auto it = buckets_.find(key);
      if (it == buckets_.end()) return;
      for (std::int32_t id : it->second) {
        if (best >= 0 && id >= best) break;  // ids ascend within a bucket
        double d = 0.0;
        if (within(s, admitted[static_cast<std::size_t>(id)], eps_, d)) {
          best = id;
          best_dist = d;
          break;
        }
      }
    };
    if (eps_ == 0.0 || base.width == 0) {
      scan(base);
    } else {
      int combos = 1;
      for (int i = 0; i < base.width; ++i) combos *= 3;
      for (int c = 0; c < combos; ++c) {
        BucketKey key = base;
        int rest = c;
        for (int i = 0; i < base.width; ++i) {
          key.q[i] += rest % 3 - 1;
          rest /= 3;
        }
        scan(key);
      }
    }
    dist = best_dist;
    return best;
  }

  void insert(const DiagramState& s, std::int32_t id) { buckets_[key_of(s)].push_back(id); }

 private:
  BucketKey key_of(const DiagramState& s) const {
    BucketKey key;
    key.constraint = s.constraint_state;
    for (int c = static_cast<int>(s.columns.size()) - 1; c >= 0 && key.width < kKeyCoords; --c) {
      const double v = s.column(static_cast<std::size_t>(c))[static_cast<std::size_t>(s.columns[static_cast<std::size_t>(c)])];
      key.q[key.width++] = quantize(v);
    }
    return key;
  }

  std::int64_t quantize(double v) const {
    if (eps_ == 0.0) return std::bit_cast<std::int64_t>(v == 0.0 ? 0.0 : v);  // -0 joins +0
    const double cell = std::floor(v / cell_);
    return static_cast<std::int64_t>(std::clamp(cell, -4e18, 4e18));
  }

  double eps_;
  double cell_;
  std::unordered_map<BucketKey, std::vector<std::int32_t>, BucketHash> buckets_;
};

void compute_children(const std::vector<DiagramState>& parents, const BandedMatrix& q,
                      const RelevanceIndex& pi, const ConstraintAutomaton* automaton,
                      const BuildConfig& config, std::vector<Candidate>& out) {
  const int n = q.size();
  const auto count = static_cast<std::ptrdiff_t>(parents.size());
  out.assign(parents.size() * 2, Candidate{});
  std::vector<std::exception_ptr> errors(parents.size());
  auto expand = [&](std::ptrdiff_t p) {
    const DiagramState& parent = parents[static_cast<std::size_t>(p)];
    for (int nu = 0; nu <= 1; ++nu) {
      Candidate& cand = out[static_cast<std::size_t>(2 * p + nu)];
      std::int32_t next_cs = kNoConstraintState;
      if (automaton != nullptr) {
        next_cs = automaton->next(parent.constraint_state, nu == 1, parent.layer, n);
        if (next_cs == kInfeasible) continue;
      }
      cand.state = state_extend(parent, q, pi, nu == 1, &cand.u);
      cand.state.constraint_state = next_cs;
      cand.feasible = true;
    }
  };
#ifdef DDMIQO_HAVE_OPENMP
  if (config.parallel && count > 1) {
    const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
      try {
        expand(p);
      } catch (...) {
        errors[static_cast<std::size_t>(p)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return;
  }
#endif
  (void)config;
  for (std::ptrdiff_t p = 0; p < count; ++p) expand(p);
}

std::string layer_summary(const std::vector<LayerStats>& stats, int upto) {
  std::ostringstream os;
  os << "nodes per layer:";
  for (int l = 0; l <= upto && l < static_cast<int>(stats.size()); ++l) os << ' ' << stats[static_cast<std::size_t>(l)].nodes;
  return os.str();
}

// Removes nodes that cannot reach a terminal; ids stay ordered.
void prune_dead_ends(Diagram& d) {
  const auto nodes = static_cast<std::size_t>(d.node_count());
  std::vector<std::uint8_t> alive(nodes, 0);
  for (auto v = static_cast<std::size_t>(d.layer_begin[static_cast<std::size_t>(d.n)]); v < nodes; ++v) alive[v] = 1;
  for (auto a = d.arcs.rbegin(); a != d.arcs.rend(); ++a) {
    if (alive[static_cast<std::size_t>(a->head)]) alive[static_cast<std::size_t>(a->tail)] = 1;
  }
  if (std::all_of(alive.begin(), alive.end(), [](std::uint8_t x) { return x != 0; })) return;

  std::vector<std::int32_t> remap(nodes, -1);
  std::vector<std::int32_t> layer_begin(d.layer_begin.size(), 0);
  std::vector<std::int32_t> constraint;
  std::vector<DiagramState> states;
  std::int32_t next = 0;
  for (int l = 0; l <= d.n; ++l) {
    layer_begin[static_cast<std::size_t>(l)] = next;
    for (std::int32_t v = d.layer_begin[static_cast<std::size_t>(l)]; v < d.layer_begin[static_cast<std::size_t>(l) + 1]; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      remap[static_cast<std::size_t>(v)] = next++;
      constraint.push_back(d.node_constraint[static_cast<std::size_t>(v)]);
      if (!d.states.empty()) states.push_back(std::move(d.states[static_cast<std::size_t>(v)]));
    }
  }
  layer_begin.back() = next;

  std::vector<Arc> arcs;
  std::vector<std::int64_t> u_begin{0};
  std::vector<std::int32_t> u_index;
  std::vector<double> u_value;
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    const Arc& arc = d.arcs[a];
    if (!alive[static_cast<std::size_t>(arc.head)]) continue;
    arcs.push_back({remap[static_cast<std::size_t>(arc.tail)], remap[static_cast<std::size_t>(arc.head)], arc.layer, arc.nu});
    const auto s = d.u_support(static_cast<std::int64_t>(a));
    const auto v = d.u_values(static_cast<std::int64_t>(a));
    u_index.insert(u_index.end(), s.begin(), s.end());
    u_value.insert(u_value.end(), v.begin(), v.end());
    u_begin.push_back(static_cast<std::int64_t>(u_index.size()));
  }
  d.layer_begin = std::move(layer_begin);
  d.node_constraint = std::move(constraint);
  d.states = std::move(states);
  d.arcs = std::move(arcs);
  d.u_begin = std::move(u_begin);
  d.u_index = std::move(u_index);
  d.u_value = std::move(u_value);
  for (int l = 0; l <= d.n; ++l) {
    auto& st = d.stats[static_cast<std::size_t>(l)];
    st.nodes = d.layer_size(l);
    st.arcs_out = 0;
  }
  for (const Arc& arc : d.arcs) ++d.stats[static_cast<std::size_t>(arc.layer)].arcs_out;
}

void fill_out_begin(Diagram& d) {
  d.out_begin.assign(static_cast<std::size_t>(d.node_count()) + 1, 0);
  for (const Arc& arc : d.arcs) ++d.out_begin[static_cast<std::size_t>(arc.tail) + 1];
  for (std::size_t v = 1; v < d.out_begin.size(); ++v) d.out_begin[v] += d.out_begin[v - 1];
}

void check_truncation_budget(int n, int m, const BuildConfig& config) {
  double arcs = 0.0;
  for (int l = 0; l < n; ++l) arcs += 2.0 * std::ldexp(1.0, std::min(l, m));
  if (arcs > static_cast<double>(config.arc_budget)) {
    std::ostringstream msg;
    msg << "the truncated diagram with m = " << m << " on " << n << " variables needs about " << arcs
        << " arcs, above the budget of " << config.arc_budget << "; use a larger epsilon";
    throw BudgetError(msg.str());
  }
}

}  // namespace

double state_distance(const DiagramState& a, const DiagramState& b) {
  check_comparable(a, b);
  if (a.constraint_state != b.constraint_state) return std::numeric_limits<double>::infinity();
  double dist = 0.0;
  within(a, b, std::numeric_limits<double>::infinity(), dist);
  return dist;
}

Diagram build_diagram(const BandedMatrix& q, const BuildConfig& config,
                      const ConstraintAutomaton* automaton) {
  const int n = q.size();
  const bool truncated = config.truncation > 0;
  if (config.truncation < 0) throw InputError("truncation depth m must be at least 1");
  if (!truncated && !(config.epsilon >= 0.0 && std::isfinite(config.epsilon))) {
    throw InputError("epsilon must be finite and non-negative");
  }
  if (truncated && automaton != nullptr) {
    throw InputError("truncated diagrams support only the unconstrained feasible set");
  }
  const int m = config.truncation;
  if (truncated) check_truncation_budget(n, m, config);

  Diagram d;
  d.n = n;
  d.q = q;
  d.mode = truncated ? DiagramMode::kTruncated
                     : (config.epsilon > 0.0 ? DiagramMode::kEpsExact : DiagramMode::kExact);
  d.epsilon = truncated ? 0.0 : config.epsilon;
  d.truncation = m;
  if (automaton != nullptr) {
    d.automaton_kind = automaton->kind();
    d.automaton_parameter = automaton->parameter();
  }
  d.stats.assign(static_cast<std::size_t>(n) + 1, LayerStats{});
  d.u_begin.push_back(0);

  const RelevanceIndex pi = relevance_indexes(q);
  std::vector<DiagramState> layer{initial_state(automaton ? automaton->initial() : kNoConstraintState)};
  std::vector<std::uint64_t> keys{0};  // truncated mode: last min(l, m) bits
  d.layer_begin = {0, 1};
  d.node_constraint.push_back(layer.front().constraint_state);
  d.stats[0].nodes = 1;
  if (config.keep_states) d.states.push_back(layer.front());

  std::vector<Candidate> cands;
  for (int l = 0; l < n; ++l) {
    const std::size_t cols = relevant_columns(pi, l + 1).size();
    const double bytes = 2.0 * static_cast<double>(layer.size()) * static_cast<double>(cols) * (l + 1) * sizeof(double);
    if (static_cast<double>(d.arcs.size()) + 2.0 * static_cast<double>(layer.size()) > static_cast<double>(config.arc_budget) ||
        bytes > static_cast<double>(config.state_bytes_budget)) {
      std::ostringstream msg;
      msg << "diagram exceeds its budget at layer " << l << " (" << layer.size() << " nodes, "
          << d.arcs.size() << " arcs so far, arc budget " << config.arc_budget << "); "
          << layer_summary(d.stats, l);
      throw BudgetError(msg.str());
    }
    compute_children(layer, q, pi, automaton, config, cands);

    const bool terminal = l + 1 == n;
    const std::int32_t parent_base = d.layer_begin[static_cast<std::size_t>(l)];
    const std::int32_t child_base = d.layer_begin[static_cast<std::size_t>(l) + 1];
    std::vector<DiagramState> next;
    std::vector<std::uint64_t> next_keys;
    std::vector<std::uint8_t> representative_set;
    MergeIndex index(d.epsilon);
    std::unordered_map<std::uint64_t, std::int32_t> by_key;
    LayerStats& st = d.stats[static_cast<std::size_t>(l) + 1];
    const std::uint64_t mask = m >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << std::min(m, 63)) - 1);

    for (std::size_t c = 0; c < cands.size(); ++c) {
      Candidate& cand = cands[c];
      if (!cand.feasible) continue;
      const auto p = static_cast<std::int32_t>(c / 2);
      const auto nu = static_cast<std::uint8_t>(c % 2);
      std::int32_t head = -1;
      if (terminal) {
        // No relevant columns survive the last layer; terminals differ only by constraint state.
        const auto key = static_cast<std::uint64_t>(static_cast<std::uint32_t>(cand.state.constraint_state));
        const auto it = by_key.find(key);
        if (it != by_key.end()) {
          head = it->second;
          ++st.merges;
        }
        if (head < 0) {
          head = static_cast<std::int32_t>(next.size());
          by_key.emplace(key, head);
          next.push_back(std::move(cand.state));
        }
      } else if (truncated) {
        const std::uint64_t parent_key = keys[static_cast<std::size_t>(p)];
        const bool drops = l >= m;
        const std::uint64_t key = drops ? (((parent_key << 1) | nu) & mask) : ((parent_key << 1) | nu);
        // The zero-prefix child represents the node: its dropped (oldest) bit is 0.
        const bool rep = !drops || ((parent_key >> (m - 1)) & 1U) == 0;
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
          head = static_cast<std::int32_t>(next.size());
          by_key.emplace(key, head);
          next.push_back(std::move(cand.state));
          next_keys.push_back(key);
          representative_set.push_back(rep ? 1 : 0);
        } else {
          head = it->second;
          ++st.merges;
          if (rep && !representative_set[static_cast<std::size_t>(head)]) {
            next[static_cast<std::size_t>(head)] = std::move(cand.state);
            representative_set[static_cast<std::size_t>(head)] = 1;
          }
        }
      } else {
        double dist = 0.0;
        head = index.find(cand.state, next, dist);
        if (head >= 0) {
          ++st.merges;
          st.max_merge_distance = std::max(st.max_merge_distance, dist);
        } else {
          head = static_cast<std::int32_t>(next.size());
          index.insert(cand.state, head);
          next.push_back(std::move(cand.state));
        }
      }
      d.arcs.push_back({parent_base + p, child_base + head, l, nu});
      d.u_index.insert(d.u_index.end(), cand.u.support.begin(), cand.u.support.end());
      d.u_value.insert(d.u_value.end(), cand.u.values.begin(), cand.u.values.end());
      d.u_begin.push_back(static_cast<std::int64_t>(d.u_index.size()));
      ++d.stats[static_cast<std::size_t>(l)].arcs_out;
    }
    if (static_cast<std::int64_t>(d.arcs.size()) > config.arc_budget) {
      std::ostringstream msg;
      msg << "arc budget " << config.arc_budget << " exceeded after layer " << l << "; "
          << layer_summary(d.stats, l);
      throw BudgetError(msg.str());
    }
    st.nodes = static_cast<int>(next.size());
    for (const auto& s : next) d.node_constraint.push_back(s.constraint_state);
    if (config.keep_states) d.states.insert(d.states.end(), next.begin(), next.end());
    d.layer_begin.push_back(child_base + static_cast<std::int32_t>(next.size()));
    layer = std::move(next);
    keys = std::move(next_keys);
  }
  if (automaton != nullptr) prune_dead_ends(d);
  fill_out_begin(d);
  return d;
}

double count_paths(const Diagram& d) {
  std::vector<double> ways(static_cast<std::size_t>(d.node_count()), 0.0);
  if (ways.empty()) return 0.0;
  ways[0] = 1.0;
  for (const Arc& a : d.arcs) ways[static_cast<std::size_t>(a.head)] += ways[static_cast<std::size_t>(a.tail)];
  double total = 0.0;
  for (auto v = static_cast<std::size_t>(d.layer_begin[static_cast<std::size_t>(d.n)]); v < ways.size(); ++v) total += ways[v];
  return total;
}

std::set<std::vector<std::uint8_t>> enumerate_paths(const Diagram& d, std::int64_t cap) {
  const double total = count_paths(d);
  if (total > static_cast<double>(cap)) {
    std::ostringstream msg;
    msg << "diagram encodes " << total << " paths, above the enumeration cap " << cap;
    throw BudgetError(msg.str());
  }
  std::set<std::vector<std::uint8_t>> out;
  std::vector<std::uint8_t> z(static_cast<std::size_t>(d.n), 0);
  // Iterative DFS over (node, next arc offset).
  std::vector<std::pair<std::int32_t, std::int64_t>> stack{{0, d.out_begin[0]}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (d.node_layer(node) == d.n) {
      out.insert(z);
      stack.pop_back();
      continue;
    }
    if (next == d.out_begin[static_cast<std::size_t>(node) + 1]) {
      stack.pop_back();
      continue;
    }
    const Arc& a = d.arcs[static_cast<std::size_t>(next++)];
    z[static_cast<std::size_t>(a.layer)] = a.nu;
    stack.emplace_back(a.head, d.out_begin[static_cast<std::size_t>(a.head)]);
  }
  return out;
}

std::vector<std::int64_t> find_path(const Diagram& d, std::span<const std::uint8_t> z) {
  if (z.size() != static_cast<std::size_t>(d.n)) throw InputError("find_path: z length does not match diagram");
  std::vector<std::int64_t> path;
  std::int32_t node = 0;
  for (int l = 0; l < d.n; ++l) {
    std::int64_t found = -1;
    for (auto a = d.out_begin[static_cast<std::size_t>(node)]; a < d.out_begin[static_cast<std::size_t>(node) + 1]; ++a) {
      if (d.arcs[static_cast<std::size_t>(a)].nu == (z[static_cast<std::size_t>(l)] != 0 ? 1 : 0)) found = a;
    }
    if (found < 0) return {};
    path.push_back(found);
    node = d.arcs[static_cast<std::size_t>(found)].head;
  }
  return path;
}

std::vector<std::uint8_t> path_assignment(const Diagram& d, std::span<const std::int64_t> path) {
  std::vector<std::uint8_t> z(static_cast<std::size_t>(d.n), 0);
  for (std::int64_t a : path) {
    const Arc& arc = d.arcs.at(static_cast<std::size_t>(a));
    z[static_cast<std::size_t>(arc.layer)] = arc.nu;
  }
  return z;
}

}  // namespace ddmiqo
