#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evosand/cycle_detector.hpp"
#include "evosand/graph.hpp"

namespace evosand {

using Grains = std::int64_t;

/// Grain counts indexed by vertex. The sink entry, if any, is kept at zero
/// and ignored by comparisons.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::size_t n_vertices, std::optional<VertexId> sink);

  /// Values for the non-sink vertices in increasing vertex order.
  static Configuration from_non_sink(std::size_t n_vertices, std::optional<VertexId> sink,
                                     std::span<const Grains> values);
  static Configuration zeros_like(const Schedule& schedule) {
    return Configuration(schedule.n_vertices(), schedule.sink());
  }

  std::size_t size() const noexcept { return grains_.size(); }
  std::optional<VertexId> sink() const noexcept { return sink_; }
  Grains operator[](VertexId v) const noexcept { return grains_[v]; }
  Grains get(VertexId v) const;
  void set(VertexId v, Grains value);
  void add(VertexId v, Grains amount) { set(v, get(v) + amount); }

  std::vector<Grains> non_sink_values() const;
  Grains total() const noexcept;

  std::vector<Grains>& raw() noexcept { return grains_; }
  const std::vector<Grains>& raw() const noexcept { return grains_; }

  friend bool operator==(const Configuration& a, const Configuration& b) noexcept;

 private:
  std::vector<Grains> grains_;
  std::optional<VertexId> sink_;
};

std::ostream& operator<<(std::ostream& os, const Configuration& c);

struct EngineState {
  Configuration config;
  std::uint64_t t = 0;
};

enum class TerminationMode { FirstQuiet, FullPeriodQuiet };

std::string to_string(TerminationMode mode);
TerminationMode parse_termination_mode(const std::string& name);

struct Limits {
  std::uint64_t max_rounds = 1'000'000'000;
  bool detect_cycles = true;
  std::size_t max_tracked_states = std::size_t{1} << 20;
  std::size_t max_tracked_bytes = std::size_t{256} << 20;

  static Limits for_patterns() { return {}; }
  static Limits for_avalanches() {
    Limits l;
    l.max_rounds = 1'000'000;
    return l;
  }
};

struct Stabilized {
  Configuration config;
  std::uint64_t final_t = 0;
  std::uint64_t rounds_executed = 0;
  std::uint64_t total_topplings = 0;
};

struct NonTerminating {
  std::uint64_t cycle_start_t = 0;
  std::uint64_t cycle_length = 0;
  EngineState state;  // the recurring state, as observed at detection
  std::uint64_t rounds_executed = 0;
  std::uint64_t total_topplings = 0;
};

struct LimitExceeded {
  EngineState state;
  std::uint64_t rounds_executed = 0;
  std::uint64_t total_topplings = 0;
};

using StabilizationOutcome = std::variant<Stabilized, NonTerminating, LimitExceeded>;

struct RoundResult {
  Configuration config;
  std::uint64_t toppled = 0;
  Grains to_sink = 0;
};

/// One executed round, as reported to trace observers: `t` is the time whose
/// stage was used, `config` the configuration after the round.
struct RoundRecord {
  std::uint64_t t = 0;
  std::uint64_t toppled = 0;
  const Configuration& config;
};

using RoundObserver = std::function<void(const RoundRecord&)>;

/// Non-sink vertices with at least as many grains as their degree.
std::vector<VertexId> unstable_set(const Configuration& config, const StageGraph& stage);

/// Synchronous round: every vertex unstable at round start topples once.
RoundResult parallel_round(const Configuration& config, const StageGraph& stage);

/// Topples the start-of-round unstable set one vertex at a time in `order`.
/// Throws InputError when `order` is not a permutation of that set.
Configuration sequential_topple_check(const Configuration& config, const StageGraph& stage,
                                      std::span<const VertexId> order);

/// In-place synchronous round used by the hot loops. `unstable` is scratch.
/// Returns the number of topplings; grains sent to the sink are added to
/// `*to_sink` when it is non-null.
std::uint64_t parallel_round_in_place(std::vector<Grains>& grains, const StageGraph& stage,
                                      std::vector<VertexId>& unstable, Grains* to_sink = nullptr);

StabilizationOutcome stabilize(EngineState state, const Schedule& schedule, TerminationMode mode,
                               const Limits& limits, const RoundObserver& observer = {});

/// `t=<t> toppled=<k> config=<g1>,<g2>,...` over the non-sink vertices.
std::string format_trace_line(const RoundRecord& record);

}  // namespace evosand
