#include "evosand/engine.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace evosand {

Configuration::Configuration(std::size_t n_vertices, std::optional<VertexId> sink)
    : grains_(n_vertices, 0), sink_(sink) {}

Configuration Configuration::from_non_sink(std::size_t n_vertices, std::optional<VertexId> sink,
                                           std::span<const Grains> values) {
  const std::size_t expected = n_vertices - (sink && *sink < n_vertices ? 1 : 0);
  if (values.size() != expected) {
    throw InputError("configuration needs " + std::to_string(expected) + " non-sink values, got " +
                     std::to_string(values.size()));
  }
  Configuration c(n_vertices, sink);
  std::size_t k = 0;
  for (VertexId v = 0; v < n_vertices; ++v) {
    if (sink && *sink == v) continue;
    c.set(v, values[k++]);
  }
  return c;
}

Grains Configuration::get(VertexId v) const {
  if (v >= grains_.size()) throw InputError("vertex " + std::to_string(v) + " out of range");
  return grains_[v];
}

void Configuration::set(VertexId v, Grains value) {
  if (v >= grains_.size()) throw InputError("vertex " + std::to_string(v) + " out of range");
  if (value < 0) throw InputError("grain counts are non-negative");
  if (sink_ && *sink_ == v) return;
  grains_[v] = value;
}

std::vector<Grains> Configuration::non_sink_values() const {
  std::vector<Grains> out;
  out.reserve(grains_.size());
  for (VertexId v = 0; v < grains_.size(); ++v) {
    if (!(sink_ && *sink_ == v)) out.push_back(grains_[v]);
  }
  return out;
}

Grains Configuration::total() const noexcept {
  Grains s = 0;
  for (VertexId v = 0; v < grains_.size(); ++v) {
    if (!(sink_ && *sink_ == v)) s += grains_[v];
  }
  return s;
}

bool operator==(const Configuration& a, const Configuration& b) noexcept {
  if (a.grains_.size() != b.grains_.size() || a.sink_ != b.sink_) return false;
  for (VertexId v = 0; v < a.grains_.size(); ++v) {
    if (a.sink_ && *a.sink_ == v) continue;
    if (a.grains_[v] != b.grains_[v]) return false;
  }
  return true;
}

std::ostream& operator<<(std::ostream& os, const Configuration& c) {
  os << '(';
  const auto values = c.non_sink_values();
  for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
  return os << ')';
}

std::string to_string(TerminationMode mode) {
  return mode == TerminationMode::FirstQuiet ? "first-quiet" : "full-period-quiet";
}

TerminationMode parse_termination_mode(const std::string& name) {
  if (name == "first-quiet") return TerminationMode::FirstQuiet;
  if (name == "full-period-quiet") return TerminationMode::FullPeriodQuiet;
  throw InputError("unknown termination mode '" + name + "'");
}

namespace {

void check_compatible(const Configuration& config, const StageGraph& stage) {
  if (config.size() != stage.n_vertices() || config.sink() != stage.sink()) {
    throw InputError("configuration does not match the stage's vertex set or sink");
  }
}

void collect_unstable(const std::vector<Grains>& grains, const StageGraph& stage,
                      std::vector<VertexId>& out) {
  out.clear();
  const auto& deg = stage.degrees();
  const auto n = static_cast<VertexId>(grains.size());
  for (VertexId v = 0; v < n; ++v) {
    if (grains[v] >= static_cast<Grains>(deg[v]) && !stage.is_sink(v)) out.push_back(v);
  }
}

// Subtracts row v of the Laplacian; grains sent to the sink are dropped.
inline void topple(std::vector<Grains>& grains, const StageGraph& stage, VertexId v,
                   Grains* to_sink) {
  grains[v] -= static_cast<Grains>(stage.degree_unchecked(v));
  for (const Neighbor* e = stage.neighbors_begin(v); e != stage.neighbors_end(v); ++e) {
    if (stage.is_sink(e->vertex)) {
      if (to_sink) *to_sink += e->multiplicity;
    } else {
      grains[e->vertex] += e->multiplicity;
    }
  }
}

std::string state_key(const std::vector<Grains>& grains, std::optional<VertexId> sink,
                      std::uint64_t phase) {
  std::string key;
  key.reserve(grains.size() + 8);
  append_varint(key, phase);
  for (VertexId v = 0; v < grains.size(); ++v) {
    if (sink && *sink == v) continue;
    append_varint(key, static_cast<std::uint64_t>(grains[v]));
  }
  return key;
}

}  // namespace

std::vector<VertexId> unstable_set(const Configuration& config, const StageGraph& stage) {
  check_compatible(config, stage);
  std::vector<VertexId> out;
  collect_unstable(config.raw(), stage, out);
  return out;
}

std::uint64_t parallel_round_in_place(std::vector<Grains>& grains, const StageGraph& stage,
                                      std::vector<VertexId>& unstable, Grains* to_sink) {
  collect_unstable(grains, stage, unstable);
  // Every member of the frozen set topples exactly once; since the update is
  // a sum of Laplacian rows, applying them one after another is equivalent.
  for (VertexId v : unstable) topple(grains, stage, v, to_sink);
  return unstable.size();
}

RoundResult parallel_round(const Configuration& config, const StageGraph& stage) {
  check_compatible(config, stage);
  RoundResult r{config, 0, 0};
  std::vector<VertexId> scratch;
  r.toppled = parallel_round_in_place(r.config.raw(), stage, scratch, &r.to_sink);
  return r;
}

Configuration sequential_topple_check(const Configuration& config, const StageGraph& stage,
                                      std::span<const VertexId> order) {
  auto expected = unstable_set(config, stage);
  std::vector<VertexId> given(order.begin(), order.end());
  std::sort(given.begin(), given.end());
  if (given != expected) {
    throw InputError("toppling order is not a permutation of the unstable set");
  }
  Configuration out = config;
  for (VertexId v : order) topple(out.raw(), stage, v, nullptr);
  return out;
}

StabilizationOutcome stabilize(EngineState state, const Schedule& schedule, TerminationMode mode,
                               const Limits& limits, const RoundObserver& observer) {
  if (limits.max_rounds < 1) throw InputError("max_rounds must be at least 1");
  check_compatible(state.config, schedule.stage_at(state.t));
  const std::uint64_t period = schedule.period();
  const std::uint64_t window = mode == TerminationMode::FirstQuiet ? 1 : period;
  const auto sink = schedule.sink();

  CycleDetector detector(limits.max_tracked_states, limits.max_tracked_bytes);
  if (limits.detect_cycles) detector.observe(state_key(state.config.raw(), sink, state.t % period), state.t);

  std::vector<VertexId> scratch;
  std::uint64_t rounds = 0;
  std::uint64_t total = 0;
  std::uint64_t quiet = 0;
  auto& grains = state.config.raw();
  while (true) {
    if (rounds >= limits.max_rounds) return LimitExceeded{std::move(state), rounds, total};

    const auto k = parallel_round_in_place(grains, schedule.stage_at(state.t), scratch);
    if (observer) observer(RoundRecord{state.t, k, state.config});
    ++state.t;
    ++rounds;
    total += k;
    quiet = k == 0 ? quiet + 1 : 0;
    if (quiet >= window) {
      return Stabilized{std::move(state.config), state.t, rounds, total};
    }
    if (limits.detect_cycles) {
      if (auto first = detector.observe(state_key(grains, sink, state.t % period), state.t)) {
        const auto start = *first;
        const auto length = state.t - start;
        return NonTerminating{start, length, std::move(state), rounds, total};
      }
    }
  }
}

std::string format_trace_line(const RoundRecord& record) {
  std::ostringstream os;
  os << "t=" << record.t << " toppled=" << record.toppled << " config=";
  const auto values = record.config.non_sink_values();
  for (std::size_t k = 0; k < values.size(); ++k) os << (k ? "," : "") << values[k];
  return os.str();
}

}  // namespace evosand
