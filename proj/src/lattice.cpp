#include "evosand/lattice.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "evosand/cycle_detector.hpp"

namespace evosand {

namespace {

constexpr NeighborOffset kGrid4[] = {{1, 0, 1}, {-1, 0, 1}, {0, 1, 1}, {0, -1, 1}};
constexpr NeighborOffset kDiag4[] = {{-1, 1, 1}, {1, 1, 1}, {-1, -1, 1}, {1, -1, 1}};
constexpr NeighborOffset kVertical[] = {{0, 1, 1}, {0, -1, 1}};
constexpr NeighborOffset kHorizontal[] = {{1, 0, 1}, {-1, 0, 1}};
constexpr NeighborOffset kGridVerticalDoubled[] = {{0, 1, 2}, {0, -1, 2}, {1, 0, 1}, {-1, 0, 1}};
constexpr NeighborOffset kGridHorizontalDoubled[] = {{1, 0, 2}, {-1, 0, 2}, {0, 1, 1}, {0, -1, 1}};

struct RuleName {
  LatticeRule rule;
  const char* name;
};
constexpr RuleName kRuleNames[] = {
    {LatticeRule::Grid4, "grid4"},
    {LatticeRule::Diag4, "diag4"},
    {LatticeRule::VerticalOnly, "vertical-only"},
    {LatticeRule::HorizontalOnly, "horizontal-only"},
    {LatticeRule::GridVerticalDoubled, "grid-vertical-doubled"},
    {LatticeRule::GridHorizontalDoubled, "grid-horizontal-doubled"},
};

}  // namespace

std::span<const NeighborOffset> rule_offsets(LatticeRule rule) noexcept {
  switch (rule) {
    case LatticeRule::Grid4: return kGrid4;
    case LatticeRule::Diag4: return kDiag4;
    case LatticeRule::VerticalOnly: return kVertical;
    case LatticeRule::HorizontalOnly: return kHorizontal;
    case LatticeRule::GridVerticalDoubled: return kGridVerticalDoubled;
    case LatticeRule::GridHorizontalDoubled: return kGridHorizontalDoubled;
  }
  return {};
}

unsigned rule_degree(LatticeRule rule) noexcept {
  unsigned d = 0;
  for (const auto& o : rule_offsets(rule)) d += o.multiplicity;
  return d;
}

bool rule_is_transpose_symmetric(LatticeRule rule) noexcept {
  return rule == LatticeRule::Grid4 || rule == LatticeRule::Diag4;
}

std::string to_string(LatticeRule rule) {
  for (const auto& r : kRuleNames) {
    if (r.rule == rule) return r.name;
  }
  return "unknown";
}

LatticeRule parse_lattice_rule(const std::string& name) {
  for (const auto& r : kRuleNames) {
    if (name == r.name) return r.rule;
  }
  throw InputError("unknown lattice rule '" + name + "'");
}

std::vector<Cell> lattice_neighbors(LatticeRule rule, Cell cell) {
  std::vector<Cell> out;
  for (const auto& o : rule_offsets(rule)) {
    for (unsigned m = 0; m < o.multiplicity; ++m) out.push_back({cell.i + o.di, cell.j + o.dj});
  }
  return out;
}

LatticeSchedule::LatticeSchedule(std::vector<LatticeRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw InputError("lattice schedule needs at least one rule");
}

LatticeSchedule LatticeSchedule::by_name(const std::string& name) {
  if (name == "static") return static_grid();
  if (name == "model-d") return model_d();
  if (name == "model-g") return model_g();
  if (name == "doubled") return doubled();
  throw InputError("unknown schedule '" + name + "' (expected static, model-d, model-g, doubled)");
}

LatticeSchedule LatticeSchedule::from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    std::vector<LatticeRule> rules;
    for (const auto& r : doc.at("rules")) rules.push_back(parse_lattice_rule(r.get<std::string>()));
    if (doc.contains("period") && doc.at("period").get<std::size_t>() != rules.size()) {
      throw InputError("lattice schedule JSON: `period` does not match the number of rules");
    }
    return LatticeSchedule(std::move(rules));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("lattice schedule JSON: ") + e.what());
  }
}

std::string LatticeSchedule::to_json() const {
  nlohmann::json doc;
  doc["period"] = rules_.size();
  auto names = nlohmann::json::array();
  for (auto r : rules_) names.push_back(to_string(r));
  doc["rules"] = std::move(names);
  return doc.dump();
}

Schedule finite_lattice(const LatticeSchedule& schedule, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw InputError("finite lattice needs positive dimensions");
  const std::size_t n = width * height + 1;
  const auto id = [width](std::int64_t x, std::int64_t y) {
    return static_cast<VertexId>(1 + y * static_cast<std::int64_t>(width) + x);
  };
  std::vector<StageGraph> stages;
  for (auto rule : schedule.rules()) {
    std::vector<MultiplicityEntry> entries;
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(height); ++y) {
      for (std::int64_t x = 0; x < static_cast<std::int64_t>(width); ++x) {
        for (const auto& o : rule_offsets(rule)) {
          const auto nx = x + o.di;
          const auto ny = y + o.dj;
          const bool inside = nx >= 0 && ny >= 0 && nx < static_cast<std::int64_t>(width) &&
                              ny < static_cast<std::int64_t>(height);
          if (inside) {
            entries.push_back({id(x, y), id(nx, ny), o.multiplicity});
          } else {
            entries.push_back({id(x, y), 0, o.multiplicity});
            entries.push_back({0, id(x, y), o.multiplicity});
          }
        }
      }
    }
    stages.push_back(StageGraph::from_multiplicities(n, VertexId{0}, entries));
  }
  return Schedule(std::move(stages));
}

// ---------------------------------------------------------------------------
// DenseGrid

DenseGrid::DenseGrid(std::int64_t rx, std::int64_t ry) : rx_(rx), ry_(ry) {
  if (rx < 0 || ry < 0) throw InputError("grid half-widths must be non-negative");
  values_.assign(static_cast<std::size_t>((2 * rx + 1) * (2 * ry + 1)), 0);
}

bool DenseGrid::contains(Cell c) const noexcept {
  return !zero_area() && std::abs(c.i) <= rx_ && std::abs(c.j) <= ry_;
}

Grains DenseGrid::at(Cell c) const noexcept {
  if (!contains(c)) return 0;
  return values_[static_cast<std::size_t>((ry_ - c.j) * width() + (c.i + rx_))];
}

void DenseGrid::set(Cell c, Grains value) {
  if (!contains(c)) throw InputError("cell outside the grid");
  if (value < 0) throw InputError("grain counts are non-negative");
  values_[static_cast<std::size_t>((ry_ - c.j) * width() + (c.i + rx_))] = value;
}

Grains DenseGrid::total() const noexcept {
  Grains s = 0;
  for (auto v : values_) s += v;
  return s;
}

Grains DenseGrid::max_value() const noexcept {
  Grains m = 0;
  for (auto v : values_) m = std::max(m, v);
  return m;
}

std::pair<std::int64_t, std::int64_t> DenseGrid::support_half_widths() const noexcept {
  std::int64_t hx = -1, hy = -1;
  for (std::int64_t j = -ry_; j <= ry_; ++j) {
    for (std::int64_t i = -rx_; i <= rx_; ++i) {
      if (at(i, j) != 0) {
        hx = std::max(hx, std::abs(i));
        hy = std::max(hy, std::abs(j));
      }
    }
  }
  return {hx, hy};
}

std::int64_t DenseGrid::support_radius() const noexcept {
  const auto [hx, hy] = support_half_widths();
  return std::max(hx, hy);
}

DenseGrid DenseGrid::resized(std::int64_t rx, std::int64_t ry) const {
  DenseGrid out(rx, ry);
  for (std::int64_t j = -ry; j <= ry; ++j) {
    for (std::int64_t i = -rx; i <= rx; ++i) {
      if (auto v = at(i, j)) out.set({i, j}, v);
    }
  }
  return out;
}

DenseGrid DenseGrid::cropped(std::int64_t margin) const {
  auto [hx, hy] = support_half_widths();
  if (hx < 0) return resized(margin, margin);
  return resized(hx + margin, hy + margin);
}

bool DenseGrid::operator==(const DenseGrid& other) const {
  if (zero_area() || other.zero_area()) return zero_area() == other.zero_area();
  const auto rx = std::max(rx_, other.rx_);
  const auto ry = std::max(ry_, other.ry_);
  for (std::int64_t j = -ry; j <= ry; ++j) {
    for (std::int64_t i = -rx; i <= rx; ++i) {
      if (at(i, j) != other.at(i, j)) return false;
    }
  }
  return true;
}

std::string to_string(PatternStatus status) {
  switch (status) {
    case PatternStatus::Stabilized: return "stabilized";
    case PatternStatus::NonTerminating: return "non-terminating";
    case PatternStatus::LimitExceeded: return "limit-exceeded";
  }
  return "unknown";
}

Symmetry best_symmetry(const LatticeSchedule& schedule) noexcept {
  // Every rule is invariant under both axis reflections.
  const bool transpose = std::all_of(schedule.rules().begin(), schedule.rules().end(),
                                     [](LatticeRule r) { return rule_is_transpose_symmetric(r); });
  return transpose ? Symmetry::Octant : Symmetry::Quadrant;
}

// ---------------------------------------------------------------------------
// Synchronous lattice kernel.
//
// Cells are bytes. A non-origin cell never exceeds 2 * max_degree - 1 because
// a toppling cell loses its degree and receives at most its degree, and a
// stable cell receives at most its degree. Cells whose true count is above
// kByteCap (in practice only the initial pile) keep kByteCap in their byte and
// the true count in `overflow_`; their byte still decides stability correctly.
//
// With a folded symmetry only a fundamental domain is stored and updated:
// Quadrant keeps i, j >= 0; Octant keeps 0 <= j <= i. Ghost cells just outside
// the domain are refreshed from their mirror images before every round.

namespace {

constexpr std::uint8_t kByteCap = 200;
static_assert(kByteCap + 2 * 27 <= 255);

class LatticeKernel {
 public:
  LatticeKernel(Symmetry symmetry, Grains pile) : sym_(symmetry) {
    allocate(8);
    set_value(0, 0, pile);
  }

  std::int64_t extent() const noexcept { return extent_; }

  // One synchronous round under `rule`; returns the number of topplings in
  // the full plane.
  std::uint64_t round(LatticeRule rule) {
    const auto reach = extent_ + 1;
    if (reach > cap_) reallocate(std::max(2 * cap_, reach));
    refresh_ghosts();
    for (auto& o : overflow_) o.byte_before = cells_[o.index];

    std::uint64_t toppled = 0;
    switch (rule) {
      case LatticeRule::Grid4: toppled = sweep<LatticeRule::Grid4>(reach); break;
      case LatticeRule::Diag4: toppled = sweep<LatticeRule::Diag4>(reach); break;
      case LatticeRule::VerticalOnly: toppled = sweep<LatticeRule::VerticalOnly>(reach); break;
      case LatticeRule::HorizontalOnly: toppled = sweep<LatticeRule::HorizontalOnly>(reach); break;
      case LatticeRule::GridVerticalDoubled:
        toppled = sweep<LatticeRule::GridVerticalDoubled>(reach);
        break;
      case LatticeRule::GridHorizontalDoubled:
        toppled = sweep<LatticeRule::GridHorizontalDoubled>(reach);
        break;
    }

    for (auto& o : overflow_) {
      o.value += static_cast<Grains>(cells_[o.index]) - static_cast<Grains>(o.byte_before);
      cells_[o.index] = static_cast<std::uint8_t>(std::min<Grains>(o.value, kByteCap));
    }
    std::erase_if(overflow_, [](const Overflow& o) { return o.value <= kByteCap; });

    if (toppled != 0 && ring_nonzero(reach)) extent_ = reach;
    return toppled;
  }

  Grains value(std::int64_t i, std::int64_t j) const noexcept {
    if (std::max(std::abs(i), std::abs(j)) > cap_ + 1) return 0;
    const auto [ci, cj] = canonical(i, j);
    const auto idx = index(ci, cj);
    for (const auto& o : overflow_) {
      if (o.index == idx) return o.value;
    }
    return cells_[idx];
  }

  // Unfolded grid over [-(extent+1), extent+1]^2.
  DenseGrid snapshot() const {
    const auto r = extent_ + 1;
    DenseGrid g(r, r);
    for (std::int64_t j = -r; j <= r; ++j) {
      for (std::int64_t i = -r; i <= r; ++i) {
        if (auto v = value(i, j)) g.set({i, j}, v);
      }
    }
    return g;
  }

  // State encoding independent of the allocation and of `extent_`.
  std::string state_key(std::uint64_t phase) const {
    std::string key;
    append_varint(key, phase);
    const auto r = extent_ + 1;
    for (std::int64_t j = row_begin(r); j <= r; ++j) {
      const auto a = col_begin(j, r);
      const std::uint8_t* row = &cells_[index(0, j)];
      std::int64_t first = r + 1, last = a - 1;
      for (std::int64_t i = a; i <= r; ++i) {
        if (row[i]) {
          first = std::min(first, i);
          last = i;
        }
      }
      if (last < first) continue;
      append_varint(key, zigzag(j));
      append_varint(key, zigzag(first));
      append_varint(key, static_cast<std::uint64_t>(last - first + 1));
      key.append(reinterpret_cast<const char*>(row + first), static_cast<std::size_t>(last - first + 1));
    }
    for (const auto& o : overflow_) {
      append_varint(key, o.index);
      append_varint(key, static_cast<std::uint64_t>(o.value));
    }
    return key;
  }

 private:
  struct Overflow {
    std::size_t index;
    Grains value;
    std::uint8_t byte_before = 0;
  };

  static std::uint64_t zigzag(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
  }

  std::pair<std::int64_t, std::int64_t> canonical(std::int64_t i, std::int64_t j) const noexcept {
    if (sym_ == Symmetry::None) return {i, j};
    i = std::abs(i);
    j = std::abs(j);
    if (sym_ == Symmetry::Octant && i < j) std::swap(i, j);
    return {i, j};
  }

  // Index of (i, j); valid for lo_ <= i, j <= hi_.
  std::size_t index(std::int64_t i, std::int64_t j) const noexcept {
    return static_cast<std::size_t>((j - lo_) * stride_ + (i - lo_));
  }

  std::int64_t row_begin(std::int64_t r) const noexcept { return sym_ == Symmetry::None ? -r : 0; }
  std::int64_t col_begin(std::int64_t j, std::int64_t r) const noexcept {
    switch (sym_) {
      case Symmetry::None: return -r;
      case Symmetry::Quadrant: return 0;
      case Symmetry::Octant: return j;
    }
    return 0;
  }
  // First column whose flag is read while updating the domain.
  std::int64_t flag_col_begin(std::int64_t j, std::int64_t r) const noexcept {
    switch (sym_) {
      case Symmetry::None: return -r - 1;
      case Symmetry::Quadrant: return -1;
      case Symmetry::Octant: return std::max<std::int64_t>(j - 2, -1);
    }
    return 0;
  }

  void set_value(std::int64_t i, std::int64_t j, Grains v) {
    const auto idx = index(i, j);
    if (v > kByteCap) {
      overflow_.push_back({idx, v});
      cells_[idx] = kByteCap;
    } else {
      cells_[idx] = static_cast<std::uint8_t>(v);
    }
  }

  void allocate(std::int64_t cap) {
    cap_ = cap;
    hi_ = cap + 2;
    lo_ = sym_ == Symmetry::None ? -hi_ : -2;
    stride_ = hi_ - lo_ + 1;
    cells_.assign(static_cast<std::size_t>(stride_ * stride_), 0);
    for (auto& f : flags_) f.assign(static_cast<std::size_t>(stride_), 0);
    ghosts_valid_for_ = -1;
  }

  void reallocate(std::int64_t cap) {
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::uint8_t>> keep;
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, Grains>> big;
    const auto r = extent_ + 1;
    for (std::int64_t j = row_begin(r); j <= r; ++j) {
      for (std::int64_t i = col_begin(j, r); i <= r; ++i) {
        if (auto v = cells_[index(i, j)]) keep.push_back({{i, j}, v});
      }
    }
    for (const auto& o : overflow_) {
      const auto rel = static_cast<std::int64_t>(o.index);
      big.push_back({{rel % stride_ + lo_, rel / stride_ + lo_}, o.value});
    }
    overflow_.clear();
    allocate(cap);
    for (const auto& [c, v] : keep) cells_[index(c.first, c.second)] = v;
    for (const auto& [c, v] : big) set_value(c.first, c.second, v);
  }

  void refresh_ghosts() {
    if (sym_ == Symmetry::None) return;
    const auto r = extent_ + 1;
    if (ghosts_valid_for_ != r) {
      ghosts_.clear();
      const auto add = [this](std::int64_t i, std::int64_t j) {
        const auto [ci, cj] = canonical(i, j);
        ghosts_.push_back({index(i, j), index(ci, cj)});
      };
      for (std::int64_t k = -1; k <= r + 1; ++k) add(k, -1);
      for (std::int64_t k = 0; k <= r + 1; ++k) add(-1, k);
      if (sym_ == Symmetry::Octant) {
        for (std::int64_t j = 1; j <= r + 1; ++j) {
          add(j - 1, j);
          if (j >= 2) add(j - 2, j);
        }
      }
      ghosts_valid_for_ = r;
    }
    for (const auto& [dst, src] : ghosts_) cells_[dst] = cells_[src];
  }

  // Writes stability flags of row j over [a, b]; returns whether any is set.
  template <unsigned Degree>
  bool compute_flags(std::uint8_t* __restrict f, std::int64_t j, std::int64_t a,
                     std::int64_t b) const {
    const std::uint8_t* __restrict row = &cells_[index(0, j)];
    std::uint8_t acc = 0;
    for (std::int64_t i = a; i <= b; ++i) {
      const std::uint8_t n = row[i] >= Degree;
      f[i] = n;
      acc |= n;
    }
    return acc != 0;
  }

  // Grains entering cell i; ul, um, ur are the flags above-left, above and
  // above-right.
  template <LatticeRule Rule>
  static std::uint8_t incoming(const std::uint8_t* fp, const std::uint8_t* fc, std::uint8_t ul,
                               std::uint8_t um, std::uint8_t ur, std::int64_t i) {
    if constexpr (Rule == LatticeRule::Grid4) {
      return fp[i] + um + fc[i - 1] + fc[i + 1];
    } else if constexpr (Rule == LatticeRule::Diag4) {
      return fp[i - 1] + fp[i + 1] + ul + ur;
    } else if constexpr (Rule == LatticeRule::VerticalOnly) {
      return fp[i] + um;
    } else if constexpr (Rule == LatticeRule::HorizontalOnly) {
      return fc[i - 1] + fc[i + 1];
    } else if constexpr (Rule == LatticeRule::GridVerticalDoubled) {
      return 2 * (fp[i] + um) + fc[i - 1] + fc[i + 1];
    } else {
      return fp[i] + um + 2 * (fc[i - 1] + fc[i + 1]);
    }
  }

  // Updates row j over [a, b] from complete flag rows.
  template <LatticeRule Rule>
  static void update_row(std::uint8_t* __restrict row, const std::uint8_t* __restrict fp,
                         const std::uint8_t* __restrict fc, const std::uint8_t* __restrict fn,
                         std::int64_t a, std::int64_t b) {
    constexpr std::uint8_t kDeg = degree_of(Rule);
    for (std::int64_t i = a; i <= b; ++i) {
      const auto in = incoming<Rule>(fp, fc, fn[i - 1], fn[i], fn[i + 1], i);
      row[i] = static_cast<std::uint8_t>(row[i] - kDeg * fc[i] + in);
    }
  }

  // Updates row j over [a, b] while computing, into fn, the flags of the not
  // yet updated row above. Returns the number of set flags of fc over [a, b];
  // `any_next` collects the new flags.
  template <LatticeRule Rule>
  static std::uint64_t fused_row(std::uint8_t* __restrict row, const std::uint8_t* __restrict above,
                                 const std::uint8_t* __restrict fp, const std::uint8_t* __restrict fc,
                                 std::uint8_t* __restrict fn, std::int64_t a, std::int64_t b,
                                 std::uint8_t& any_next) {
    constexpr std::uint8_t kDeg = degree_of(Rule);
    std::uint64_t count = 0;
    std::uint8_t any = 0;
    // Byte accumulators cannot overflow within a block of 255 columns.
    for (std::int64_t lo = a; lo <= b; lo += 255) {
      const std::int64_t hi = std::min<std::int64_t>(b, lo + 254);
      std::uint8_t block = 0;
      for (std::int64_t i = lo; i <= hi; ++i) {
        const std::uint8_t um = above[i] >= kDeg;
        const std::uint8_t ul = above[i - 1] >= kDeg;
        const std::uint8_t ur = above[i + 1] >= kDeg;
        const auto in = incoming<Rule>(fp, fc, ul, um, ur, i);
        fn[i] = um;
        any |= um;
        block += fc[i];
        row[i] = static_cast<std::uint8_t>(row[i] - kDeg * fc[i] + in);
      }
      count += block;
    }
    any_next |= any;
    return count;
  }

  static constexpr unsigned degree_of(LatticeRule rule) {
    switch (rule) {
      case LatticeRule::Grid4:
      case LatticeRule::Diag4: return 4;
      case LatticeRule::VerticalOnly:
      case LatticeRule::HorizontalOnly: return 2;
      case LatticeRule::GridVerticalDoubled:
      case LatticeRule::GridHorizontalDoubled: return 6;
    }
    return 0;
  }

  // Folds the number s of toppling domain cells in row j into the number of
  // toppling cells of the plane; fc is the row's flag buffer.
  std::uint64_t weighted_count(std::uint64_t s, const std::uint8_t* fc, std::int64_t j) const {
    if (s == 0) return 0;
    switch (sym_) {
      case Symmetry::None: return s;
      case Symmetry::Quadrant: {
        const std::uint64_t rw = j > 0 ? 2 : 1;
        return rw * (2 * s - fc[0]);
      }
      case Symmetry::Octant:
        return j == 0 ? 4 * s - 3 * fc[0] : 8 * s - 4 * fc[j];
    }
    return s;
  }

  template <LatticeRule Rule>
  std::uint64_t sweep(std::int64_t r) {
    constexpr unsigned kDeg = degree_of(Rule);
    std::uint8_t* prev = flags_[0].data() - lo_;
    std::uint8_t* cur = flags_[1].data() - lo_;
    std::uint8_t* next = flags_[2].data() - lo_;
    const auto j0 = row_begin(r);
    bool any_prev = compute_flags<kDeg>(prev, j0 - 1, flag_col_begin(j0 - 1, r), r + 1);
    bool any_cur = compute_flags<kDeg>(cur, j0, flag_col_begin(j0, r), r + 1);
    std::uint64_t toppled = 0;
    for (std::int64_t j = j0; j <= r; ++j) {
      const auto a = col_begin(j, r);
      const auto fb = flag_col_begin(j + 1, r);
      std::uint8_t* row = &cells_[index(0, j)];
      bool any_next;
      if (any_prev || any_cur) {
        // Flags of the row above outside [a, r] are read by the update but
        // not produced by the fused loop.
        std::uint8_t any = compute_flags<kDeg>(next, j + 1, fb, a - 1);
        any |= compute_flags<kDeg>(next, j + 1, r + 1, r + 1);
        const auto s = fused_row<Rule>(row, &cells_[index(0, j + 1)], prev, cur, next, a, r, any);
        toppled += weighted_count(s, cur, j);
        any_next = any != 0;
      } else {
        any_next = compute_flags<kDeg>(next, j + 1, fb, r + 1);
        if (any_next) update_row<Rule>(row, prev, cur, next, a, r);
      }
      any_prev = any_cur;
      any_cur = any_next;
      std::swap(prev, cur);
      std::swap(cur, next);
    }
    return toppled;
  }

  bool ring_nonzero(std::int64_t r) const {
    for (std::int64_t k = row_begin(r); k <= r; ++k) {
      if (cells_[index(r, k)]) return true;
      if (sym_ == Symmetry::None && (cells_[index(-r, k)] || cells_[index(k, r)] || cells_[index(k, -r)])) {
        return true;
      }
      if (sym_ == Symmetry::Quadrant && cells_[index(k, r)]) return true;
    }
    return false;
  }

  Symmetry sym_;
  std::int64_t cap_ = 0;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  std::int64_t stride_ = 0;
  std::int64_t extent_ = 0;
  std::vector<std::uint8_t> cells_;
  std::array<std::vector<std::uint8_t>, 3> flags_;
  std::vector<std::pair<std::size_t, std::size_t>> ghosts_;
  std::int64_t ghosts_valid_for_ = -1;
  std::vector<Overflow> overflow_;
};

}  // namespace

PatternResult run_central_pile(const LatticeSchedule& schedule, Grains grains,
                               const PatternOptions& options) {
  if (grains < 1) throw InputError("the central pile needs at least one grain");
  if (options.limits.max_rounds < 1) throw InputError("max_rounds must be at least 1");
  for (auto rule : schedule.rules()) {
    if (rule_degree(rule) > 27) throw InputError("lattice rule degree too large for the byte kernel");
  }

  const auto symmetry = options.fold_symmetry ? best_symmetry(schedule) : Symmetry::None;
  LatticeKernel kernel(symmetry, grains);
  const std::uint64_t period = schedule.period();
  const std::uint64_t window = options.mode == TerminationMode::FirstQuiet ? 1 : period;

  CycleDetector detector(options.limits.max_tracked_states, options.limits.max_tracked_bytes);
  if (options.limits.detect_cycles) detector.observe(kernel.state_key(0), 0);

  PatternResult result;
  std::uint64_t t = 0;
  std::uint64_t quiet = 0;
  std::uint64_t next_progress = options.progress_every;
  const auto finish = [&](PatternStatus status) {
    result.status = status;
    result.final_t = t;
    result.grid = kernel.snapshot();
    result.max_value = result.grid.max_value();
    return result;
  };

  while (true) {
    if (result.rounds >= options.limits.max_rounds) return finish(PatternStatus::LimitExceeded);
    const auto k = kernel.round(schedule.rule_at(t));
    if (options.observer) options.observer(t, k, kernel.snapshot());
    ++t;
    ++result.rounds;
    result.total_topplings += k;
    if (options.progress && options.progress_every && result.total_topplings >= next_progress) {
      options.progress(result.rounds, result.total_topplings, kernel.extent());
      while (next_progress <= result.total_topplings) next_progress += options.progress_every;
    }
    quiet = k == 0 ? quiet + 1 : 0;
    if (quiet >= window) return finish(PatternStatus::Stabilized);
    if (options.limits.detect_cycles && !detector.full()) {
      if (auto first = detector.observe(kernel.state_key(t % period), t)) {
        result.cycle_start_t = *first;
        result.cycle_length = t - *first;
        return finish(PatternStatus::NonTerminating);
      }
    }
  }
}

std::string format_lattice_trace_line(std::uint64_t t, std::uint64_t toppled, const DenseGrid& grid,
                                      std::int64_t r) {
  std::ostringstream os;
  os << "t=" << t << " toppled=" << toppled << " config=";
  bool first = true;
  for (std::int64_t j = r; j >= -r; --j) {
    for (std::int64_t i = -r; i <= r; ++i) {
      os << (first ? "" : ",") << grid.at(i, j);
      first = false;
    }
  }
  return os.str();
}

}  // namespace evosand
