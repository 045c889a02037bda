#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "evosand/engine.hpp"
#include "evosand/graph.hpp"

namespace evosand {

// Cell (i, j): i grows to the right, j grows upward.
struct Cell {
  std::int64_t i = 0;
  std::int64_t j = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class LatticeRule {
  Grid4,
  Diag4,
  VerticalOnly,
  HorizontalOnly,
  GridVerticalDoubled,
  GridHorizontalDoubled,
};

struct NeighborOffset {
  int di = 0;
  int dj = 0;
  unsigned multiplicity = 1;
};

std::span<const NeighborOffset> rule_offsets(LatticeRule rule) noexcept;
unsigned rule_degree(LatticeRule rule) noexcept;
// Invariant under (i, j) -> (j, i).
bool rule_is_transpose_symmetric(LatticeRule rule) noexcept;
std::string to_string(LatticeRule rule);
LatticeRule parse_lattice_rule(const std::string& name);

/// Neighbor multiset of `cell`; a neighbor joined by m parallel edges
/// appears m times.
std::vector<Cell> lattice_neighbors(LatticeRule rule, Cell cell);

class LatticeSchedule {
 public:
  explicit LatticeSchedule(std::vector<LatticeRule> rules);

  static LatticeSchedule static_grid() { return LatticeSchedule({LatticeRule::Grid4}); }
  static LatticeSchedule model_d() { return LatticeSchedule({LatticeRule::Grid4, LatticeRule::Diag4}); }
  static LatticeSchedule model_g() {
    return LatticeSchedule({LatticeRule::VerticalOnly, LatticeRule::HorizontalOnly});
  }
  static LatticeSchedule doubled() {
    return LatticeSchedule({LatticeRule::GridVerticalDoubled, LatticeRule::GridHorizontalDoubled});
  }

  /// "static", "model-d", "model-g" or "doubled".
  static LatticeSchedule by_name(const std::string& name);
  /// {"period": P, "rules": ["grid4", "diag4", ...]}
  static LatticeSchedule from_json(const std::string& text);
  std::string to_json() const;

  std::size_t period() const noexcept { return rules_.size(); }
  LatticeRule rule_at(std::uint64_t t) const noexcept { return rules_[t % rules_.size()]; }
  const std::vector<LatticeRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<LatticeRule> rules_;
};

/// Finite width x height piece of the lattice with one extra sink vertex at
/// index 0. Cell (x, y), 0 <= x < width, 0 <= y < height, is vertex
/// 1 + y * width + x. Every cell keeps its full rule degree at every stage:
/// neighbor slots that fall outside the rectangle are edges to the sink.
Schedule finite_lattice(const LatticeSchedule& schedule, std::size_t width, std::size_t height);

/// Origin-centered grid of grain counts over [-rx, rx] x [-ry, ry]; cells
/// outside the box read as zero.
class DenseGrid {
 public:
  DenseGrid() : DenseGrid(0, 0) {}
  DenseGrid(std::int64_t rx, std::int64_t ry);
  /// Empty (zero-area) grid.
  static DenseGrid empty() {
    DenseGrid g;
    g.rx_ = g.ry_ = -1;
    g.values_.clear();
    return g;
  }

  std::int64_t rx() const noexcept { return rx_; }
  std::int64_t ry() const noexcept { return ry_; }
  std::int64_t width() const noexcept { return 2 * rx_ + 1; }
  std::int64_t height() const noexcept { return 2 * ry_ + 1; }
  bool zero_area() const noexcept { return rx_ < 0 || ry_ < 0; }
  bool contains(Cell c) const noexcept;

  Grains at(Cell c) const noexcept;
  Grains at(std::int64_t i, std::int64_t j) const noexcept { return at({i, j}); }
  void set(Cell c, Grains value);

  Grains total() const noexcept;
  Grains max_value() const noexcept;
  /// Chebyshev radius of the nonzero support, or -1 for an all-zero grid.
  std::int64_t support_radius() const noexcept;
  /// Tight half-widths of the nonzero support around the origin.
  std::pair<std::int64_t, std::int64_t> support_half_widths() const noexcept;
  /// Origin-centered copy over [-rx, rx] x [-ry, ry].
  DenseGrid resized(std::int64_t rx, std::int64_t ry) const;
  /// Smallest origin-centered box holding every nonzero cell, grown by `margin`.
  DenseGrid cropped(std::int64_t margin) const;

  bool operator==(const DenseGrid& other) const;

  /// Row-major values, top row (j = ry) first.
  const std::vector<Grains>& values() const noexcept { return values_; }

 private:
  std::int64_t rx_ = 0;
  std::int64_t ry_ = 0;
  std::vector<Grains> values_;
};

enum class Symmetry {
  None,      // full plane
  Quadrant,  // reflections in both axes
  Octant,    // reflections in both axes and the diagonal
};

enum class PatternStatus { Stabilized, NonTerminating, LimitExceeded };
std::string to_string(PatternStatus status);

struct PatternResult {
  PatternStatus status = PatternStatus::Stabilized;
  DenseGrid grid;
  std::uint64_t final_t = 0;
  std::uint64_t rounds = 0;
  std::uint64_t total_topplings = 0;
  Grains max_value = 0;
  // Set for NonTerminating.
  std::uint64_t cycle_start_t = 0;
  std::uint64_t cycle_length = 0;
};

struct PatternOptions {
  TerminationMode mode = TerminationMode::FullPeriodQuiet;
  Limits limits = Limits::for_patterns();
  /// Use the largest symmetry every rule of the schedule has. Disable to run
  /// the full plane, e.g. to check symmetry independently.
  bool fold_symmetry = true;
  /// Called after every round with the unfolded grid (costly; for traces).
  std::function<void(std::uint64_t t, std::uint64_t toppled, const DenseGrid& grid)> observer;
  /// Called whenever the running toppling count crosses a multiple of
  /// `progress_every`.
  std::function<void(std::uint64_t rounds, std::uint64_t topplings, std::int64_t extent)> progress;
  std::uint64_t progress_every = 10'000'000;
};

/// Stabilizes `grains` grains placed at the origin of the infinite lattice.
PatternResult run_central_pile(const LatticeSchedule& schedule, Grains grains,
                               const PatternOptions& options = {});

Symmetry best_symmetry(const LatticeSchedule& schedule) noexcept;

/// `t=<t> toppled=<k> config=<values>` with the values of the square window
/// [-r, r]^2 listed top row first, left to right.
std::string format_lattice_trace_line(std::uint64_t t, std::uint64_t toppled, const DenseGrid& grid,
                                      std::int64_t r);

}  // namespace evosand
