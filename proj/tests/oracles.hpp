// Independent reference implementations used as test oracles. They share no
// code with the library beyond its data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "evosand/engine.hpp"
#include "evosand/lattice.hpp"

namespace oracle {

using evosand::Grains;

// c - sum over the start-unstable set of Laplacian rows, sink entry zeroed.
inline std::vector<Grains> laplacian_round(const std::vector<Grains>& c, const evosand::IntMatrix& L,
                                           std::optional<evosand::VertexId> sink,
                                           std::uint64_t* toppled = nullptr) {
  std::vector<Grains> out = c;
  std::uint64_t k = 0;
  for (std::size_t v = 0; v < c.size(); ++v) {
    if (sink && *sink == v) continue;
    if (c[v] < L(v, v)) continue;
    ++k;
    for (std::size_t w = 0; w < c.size(); ++w) out[w] -= L(v, w);
  }
  if (sink) out[*sink] = 0;
  if (toppled) *toppled = k;
  return out;
}

// Synchronous central-pile dynamics on the infinite lattice, one map entry
// per nonzero cell.
class SparseLattice {
 public:
  using Cell = std::pair<std::int64_t, std::int64_t>;

  explicit SparseLattice(Grains pile) { cells_[{0, 0}] = pile; }

  std::uint64_t round(evosand::LatticeRule rule) {
    std::vector<Cell> unstable;
    const auto deg = static_cast<Grains>(evosand::rule_degree(rule));
    for (const auto& [c, v] : cells_) {
      if (v >= deg) unstable.push_back(c);
    }
    for (const auto& c : unstable) {
      cells_[c] -= deg;
      for (const auto& o : evosand::rule_offsets(rule)) {
        cells_[{c.first + o.di, c.second + o.dj}] += o.multiplicity;
      }
    }
    std::erase_if(cells_, [](const auto& e) { return e.second == 0; });
    return unstable.size();
  }

  Grains at(std::int64_t i, std::int64_t j) const {
    auto it = cells_.find({i, j});
    return it == cells_.end() ? 0 : it->second;
  }
  const std::map<Cell, Grains>& cells() const { return cells_; }

 private:
  std::map<Cell, Grains> cells_;
};

struct SparseRun {
  std::map<SparseLattice::Cell, Grains> final_cells;
  std::uint64_t rounds = 0;
  std::uint64_t topplings = 0;
};

// Full-period-quiet stabilization of the sparse oracle.
inline SparseRun sparse_central_pile(const evosand::LatticeSchedule& s, Grains pile) {
  SparseLattice lat(pile);
  SparseRun run;
  std::uint64_t quiet = 0;
  for (std::uint64_t t = 0; quiet < s.period(); ++t) {
    const auto k = lat.round(s.rule_at(t));
    run.topplings += k;
    ++run.rounds;
    quiet = k == 0 ? quiet + 1 : 0;
  }
  run.final_cells = lat.cells();
  return run;
}

// Discrete power law on x >= x_min by inversion of a CDF table built by
// direct summation up to `table` terms; the remaining mass is assigned by a
// continuous Pareto tail. Independent of the library's zeta and sampler.
class PowerLawGenerator {
 public:
  PowerLawGenerator(double alpha, std::int64_t x_min, std::int64_t table = 1'000'000)
      : alpha_(alpha), x_min_(x_min) {
    std::vector<double> w(static_cast<std::size_t>(table));
    double head = 0;
    for (std::int64_t k = 0; k < table; ++k) {
      w[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(x_min + k), -alpha);
    }
    for (auto it = w.rbegin(); it != w.rend(); ++it) head += *it;  // small terms first
    const double edge = static_cast<double>(x_min + table) - 0.5;
    const double tail = std::pow(edge, 1 - alpha) / (alpha - 1);
    const double total = head + tail;
    cdf_.resize(w.size());
    double acc = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      acc += w[k];
      cdf_[k] = acc / total;
    }
    edge_ = edge;
  }

  std::int64_t operator()(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it != cdf_.end()) return x_min_ + (it - cdf_.begin());
    // Pareto tail beyond the table, rounded to the nearest integer.
    const double rest = (u - cdf_.back()) / (1 - cdf_.back());
    const double x = edge_ * std::pow(1 - rest, -1 / (alpha_ - 1));
    return static_cast<std::int64_t>(std::llround(std::min(x, 4e18)));
  }

 private:
  double alpha_;
  std::int64_t x_min_;
  double edge_ = 0;
  std::vector<double> cdf_;
};

}  // namespace oracle
