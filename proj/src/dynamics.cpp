#include "evosand/dynamics.hpp"

#include <string>

namespace evosand {

void DynamicsConfig::validate() const {
  if (width < 2 || height < 2) throw InputError("lattice width and height must be at least 2");
  if (iterations < 1) throw InputError("iterations must be at least 1");
}

namespace {

std::string describe(DynamicsAborted::Reason reason, std::uint64_t iteration) {
  const char* what = reason == DynamicsAborted::Reason::LimitExceeded
                         ? "exceeded the round limit"
                         : "entered a cycle";
  return "stabilization at iteration " + std::to_string(iteration) + " " + what;
}

}  // namespace

DynamicsAborted::DynamicsAborted(Reason reason, std::uint64_t iteration,
                                 std::vector<AvalancheRecord> completed)
    : std::runtime_error(describe(reason, iteration)),
      reason_(reason),
      iteration_(iteration),
      completed_(std::move(completed)) {}

Configuration random_initial_config(const StageGraph& stage0, std::mt19937_64& rng) {
  const auto delta = stage0.max_degree(true);
  if (delta < 1) throw InputError("stage 0 has no edges at non-sink vertices");
  Configuration c(stage0.n_vertices(), stage0.sink());
  std::uniform_int_distribution<Grains> draw(0, static_cast<Grains>(delta) - 1);
  for (VertexId v = 0; v < stage0.n_vertices(); ++v) {
    if (!stage0.is_sink(v)) c.set(v, draw(rng));
  }
  return c;
}

namespace {

struct DropResult {
  std::uint64_t size = 0;
  bool ok = true;
  DynamicsAborted::Reason reason{};
};

DropResult drop(EngineState& state, const Schedule& schedule, VertexId v, TerminationMode mode,
                const Limits& limits) {
  state.config.add(v, 1);
  auto outcome = stabilize(std::move(state), schedule, mode, limits);
  if (auto* s = std::get_if<Stabilized>(&outcome)) {
    state = EngineState{std::move(s->config), s->final_t};
    return {s->total_topplings};
  }
  if (auto* n = std::get_if<NonTerminating>(&outcome)) {
    state = std::move(n->state);
    return {n->total_topplings, false, DynamicsAborted::Reason::NonTerminating};
  }
  auto& l = std::get<LimitExceeded>(outcome);
  state = std::move(l.state);
  return {l.total_topplings, false, DynamicsAborted::Reason::LimitExceeded};
}

}  // namespace

std::uint64_t drop_grain(EngineState& state, const Schedule& schedule, VertexId v,
                         TerminationMode mode, const Limits& limits) {
  if (schedule.sink() && *schedule.sink() == v) throw InputError("cannot add grains to the sink");
  const auto r = drop(state, schedule, v, mode, limits);
  if (!r.ok) throw DynamicsAborted(r.reason, 0, {});
  return r.size;
}

std::vector<AvalancheRecord> run_dynamics(const Schedule& schedule, std::uint64_t iterations,
                                          std::uint64_t seed, TerminationMode mode,
                                          const Limits& limits) {
  if (iterations < 1) throw InputError("iterations must be at least 1");
  std::mt19937_64 rng(seed);
  EngineState state{random_initial_config(schedule.stage_at(0), rng), 0};

  std::vector<VertexId> targets;
  for (VertexId v = 0; v < schedule.n_vertices(); ++v) {
    if (!(schedule.sink() && *schedule.sink() == v)) targets.push_back(v);
  }
  std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);

  std::vector<AvalancheRecord> records;
  records.reserve(iterations);
  for (std::uint64_t k = 0; k < iterations; ++k) {
    const auto r = drop(state, schedule, targets[pick(rng)], mode, limits);
    if (!r.ok) throw DynamicsAborted(r.reason, k, std::move(records));
    records.push_back({k, r.size});
  }
  return records;
}

std::vector<AvalancheRecord> run_dynamics(const DynamicsConfig& cfg) {
  cfg.validate();
  const auto schedule = finite_lattice(cfg.schedule, cfg.width, cfg.height);
  return run_dynamics(schedule, cfg.iterations, cfg.seed, cfg.termination, cfg.limits);
}

}  // namespace evosand
