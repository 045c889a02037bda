#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "evosand/engine.hpp"
#include "evosand/lattice.hpp"

namespace evosand {

struct DynamicsConfig {
  std::size_t width = 50;
  std::size_t height = 50;
  LatticeSchedule schedule = LatticeSchedule::model_g();
  std::uint64_t iterations = 10'000;
  std::uint64_t seed = 1;
  TerminationMode termination = TerminationMode::FirstQuiet;
  Limits limits = Limits::for_avalanches();

  // Throws InputError unless width, height >= 2 and iterations >= 1.
  void validate() const;
};

struct AvalancheRecord {
  std::uint64_t index = 0;
  std::uint64_t size = 0;
  bool operator==(const AvalancheRecord&) const = default;
};

// A stabilization during the driven dynamics did not end.
class DynamicsAborted : public std::runtime_error {
 public:
  enum class Reason { LimitExceeded, NonTerminating };
  DynamicsAborted(Reason reason, std::uint64_t iteration, std::vector<AvalancheRecord> completed);

  Reason reason() const noexcept { return reason_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  const std::vector<AvalancheRecord>& completed() const noexcept { return completed_; }

 private:
  Reason reason_;
  std::uint64_t iteration_;
  std::vector<AvalancheRecord> completed_;
};

// Each non-sink vertex independently uniform in [0, Δ - 1], Δ the largest
// non-sink degree of stage0.
Configuration random_initial_config(const StageGraph& stage0, std::mt19937_64& rng);

// Adds one grain at v and stabilizes; `state` is advanced in place and the
// number of topplings returned.
std::uint64_t drop_grain(EngineState& state, const Schedule& schedule, VertexId v,
                         TerminationMode mode, const Limits& limits);

// Random initial configuration, then `iterations` times: a grain on a uniform
// non-sink vertex, stabilization, and one record. Time carries over between
// iterations.
std::vector<AvalancheRecord> run_dynamics(const Schedule& schedule, std::uint64_t iterations,
                                          std::uint64_t seed, TerminationMode mode,
                                          const Limits& limits);

// The same on the finite lattice of `cfg`.
std::vector<AvalancheRecord> run_dynamics(const DynamicsConfig& cfg);

}  // namespace evosand
