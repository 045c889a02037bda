#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evosand {

using VertexId = std::uint32_t;
using Multiplicity = std::uint32_t;

// Raised for caller mistakes: out-of-range vertices, malformed schedules,
// bad permutations. Outcomes such as non-termination are not errors.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One directed multiplicity entry f_{u,v}. An undirected edge is two entries.
struct MultiplicityEntry {
  VertexId from = 0;
  VertexId to = 0;
  Multiplicity count = 0;
};

// Undirected edge with multiplicity, the unit of the schedule file format.
struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  Multiplicity multiplicity = 1;
};

struct Neighbor {
  VertexId vertex = 0;
  Multiplicity multiplicity = 0;
};

struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> data;

  std::int64_t operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::int64_t& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  bool operator==(const IntMatrix&) const = default;
};

struct Violation {
  enum class Kind { Asymmetric, Loop, VertexOutOfRange, SinkOutOfRange, SinkNotZero };
  Kind kind;
  VertexId u = 0;
  VertexId v = 0;
  std::string message;
};

/// A snapshot of the evolving graph at one time step: a loopless multigraph
/// on vertices 0..n-1 with an optional sink.
///
/// Stored as a compressed adjacency list (one row per vertex, sorted by
/// neighbor). A stage built from raw directed entries may violate symmetry or
/// looplessness; `validate` reports that, and `Schedule` refuses such stages.
class StageGraph {
 public:
  StageGraph() = default;

  /// Symmetric construction from undirected edges; parallel edges accumulate.
  static StageGraph from_edges(std::size_t n_vertices, std::optional<VertexId> sink,
                               const std::vector<Edge>& edges);

  /// Raw construction from directed multiplicity entries, kept as given
  /// (entries with the same (from, to) accumulate). Out-of-range endpoints
  /// are dropped and reported by `validate`.
  static StageGraph from_multiplicities(std::size_t n_vertices, std::optional<VertexId> sink,
                                        const std::vector<MultiplicityEntry>& entries);

  std::size_t n_vertices() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::optional<VertexId> sink() const noexcept { return sink_; }
  bool is_sink(VertexId v) const noexcept { return sink_ && *sink_ == v; }

  /// Sum of multiplicities of edges at v. Throws InputError when v is out of range.
  std::uint64_t degree(VertexId v) const;
  std::uint64_t degree_unchecked(VertexId v) const noexcept { return degrees_[v]; }
  const std::vector<std::uint64_t>& degrees() const noexcept { return degrees_; }
  std::uint64_t max_degree(bool exclude_sink = true) const noexcept;

  Multiplicity multiplicity(VertexId u, VertexId v) const;

  /// Neighbors of v with their multiplicities, sorted by vertex id.
  const Neighbor* neighbors_begin(VertexId v) const noexcept { return adjacency_.data() + offsets_[v]; }
  const Neighbor* neighbors_end(VertexId v) const noexcept { return adjacency_.data() + offsets_[v + 1]; }
  std::vector<Neighbor> neighbors(VertexId v) const;

  /// Undirected edge list (u < v) with multiplicities.
  std::vector<Edge> edges() const;

  std::vector<Violation> validate() const;
  IntMatrix laplacian() const;

  bool operator==(const StageGraph& other) const noexcept;

 private:
  std::optional<VertexId> sink_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<std::uint64_t> degrees_;
  std::vector<Violation> construction_violations_;
};

std::uint64_t degree(const StageGraph& stage, VertexId v);
IntMatrix laplacian(const StageGraph& stage);
std::vector<Violation> validate(const StageGraph& stage);
std::string to_string(const Violation& violation);

/// Periodic sequence of stages; the graph at time t is stages[t mod P].
/// All stages share the vertex count and sink. Immutable once built.
class Schedule {
 public:
  explicit Schedule(std::vector<StageGraph> stages);

  std::size_t period() const noexcept { return stages_.size(); }
  std::size_t n_vertices() const noexcept { return stages_.front().n_vertices(); }
  std::optional<VertexId> sink() const noexcept { return stages_.front().sink(); }
  const StageGraph& stage_at(std::uint64_t t) const noexcept { return stages_[t % stages_.size()]; }
  const std::vector<StageGraph>& stages() const noexcept { return stages_; }

 private:
  std::vector<StageGraph> stages_;
};

// Schedule file (JSON): {"period": P, "n_vertices": n, "sink": 0 | null,
// "stages": [[[u, v, multiplicity], ...], ...]}.
Schedule parse_schedule_json(const std::string& text);
Schedule load_schedule_json(const std::string& path);
std::string schedule_to_json(const Schedule& schedule);

// Period-4 stage list of the triangle whose multiplicities follow
// f12 = sin(pi t/2) + 1, f13 = cos(pi t/2) + 1, f23 = 1 - sin(pi t/2).
// Vertex order is v1, v2, v3 with no sink.
std::vector<StageGraph> trigonometric_triangle_stages();

// The same schedule reindexed so that v3 is the sink at index 0 and v1, v2 are
// vertices 1 and 2.
Schedule trigonometric_triangle_schedule();

// Two-stage schedule on {s, u, v} (indices 0, 1, 2): even stages {uv, vs},
// odd stages {uv, us}.
Schedule alternating_path_schedule();

}  // namespace evosand
