#include "evosand/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace evosand {

namespace {

std::string vertex_pair(VertexId u, VertexId v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace

StageGraph StageGraph::from_multiplicities(std::size_t n_vertices, std::optional<VertexId> sink,
                                           const std::vector<MultiplicityEntry>& entries) {
  StageGraph g;
  g.sink_ = sink;
  std::map<std::pair<VertexId, VertexId>, std::uint64_t> acc;
  for (const auto& e : entries) {
    if (e.from >= n_vertices || e.to >= n_vertices) {
      g.construction_violations_.push_back(
          {Violation::Kind::VertexOutOfRange, e.from, e.to,
           "edge endpoint out of range " + vertex_pair(e.from, e.to) + " with n_vertices=" +
               std::to_string(n_vertices)});
      continue;
    }
    if (e.count == 0) continue;
    acc[{e.from, e.to}] += e.count;
  }

  g.offsets_.assign(n_vertices + 1, 0);
  g.degrees_.assign(n_vertices, 0);
  for (const auto& [key, count] : acc) ++g.offsets_[key.first + 1];
  for (std::size_t v = 0; v < n_vertices; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.adjacency_.reserve(acc.size());
  // std::map iterates in (from, to) order, which is exactly CSR order.
  for (const auto& [key, count] : acc) {
    g.adjacency_.push_back({key.second, static_cast<Multiplicity>(count)});
    g.degrees_[key.first] += count;
  }
  return g;
}

StageGraph StageGraph::from_edges(std::size_t n_vertices, std::optional<VertexId> sink,
                                  const std::vector<Edge>& edges) {
  std::vector<MultiplicityEntry> entries;
  entries.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    entries.push_back({e.u, e.v, e.multiplicity});
    if (e.u != e.v) entries.push_back({e.v, e.u, e.multiplicity});
  }
  return from_multiplicities(n_vertices, sink, entries);
}

std::uint64_t StageGraph::degree(VertexId v) const {
  if (v >= n_vertices()) {
    throw InputError("vertex " + std::to_string(v) + " out of range (n_vertices=" +
                     std::to_string(n_vertices()) + ")");
  }
  return degrees_[v];
}

std::uint64_t StageGraph::max_degree(bool exclude_sink) const noexcept {
  std::uint64_t best = 0;
  for (std::size_t v = 0; v < degrees_.size(); ++v) {
    if (exclude_sink && is_sink(static_cast<VertexId>(v))) continue;
    best = std::max(best, degrees_[v]);
  }
  return best;
}

Multiplicity StageGraph::multiplicity(VertexId u, VertexId v) const {
  if (u >= n_vertices() || v >= n_vertices()) {
    throw InputError("vertex pair " + vertex_pair(u, v) + " out of range");
  }
  const Neighbor* first = neighbors_begin(u);
  const Neighbor* last = neighbors_end(u);
  const Neighbor* it =
      std::lower_bound(first, last, v, [](const Neighbor& n, VertexId x) { return n.vertex < x; });
  return (it != last && it->vertex == v) ? it->multiplicity : 0;
}

std::vector<Neighbor> StageGraph::neighbors(VertexId v) const {
  if (v >= n_vertices()) throw InputError("vertex " + std::to_string(v) + " out of range");
  return {neighbors_begin(v), neighbors_end(v)};
}

std::vector<Edge> StageGraph::edges() const {
  std::vector<Edge> out;
  for (VertexId u = 0; u < n_vertices(); ++u) {
    for (const Neighbor* n = neighbors_begin(u); n != neighbors_end(u); ++n) {
      if (u < n->vertex) out.push_back({u, n->vertex, n->multiplicity});
    }
  }
  return out;
}

std::vector<Violation> StageGraph::validate() const {
  std::vector<Violation> out = construction_violations_;
  const auto n = n_vertices();
  if (sink_) {
    if (*sink_ >= n) {
      out.push_back({Violation::Kind::SinkOutOfRange, *sink_, 0,
                     "sink " + std::to_string(*sink_) + " out of range"});
    } else if (*sink_ != 0) {
      out.push_back({Violation::Kind::SinkNotZero, *sink_, 0,
                     "sink must be vertex 0, got " + std::to_string(*sink_)});
    }
  }
  for (VertexId u = 0; u < n; ++u) {
    for (const Neighbor* e = neighbors_begin(u); e != neighbors_end(u); ++e) {
      if (e->vertex == u) {
        out.push_back({Violation::Kind::Loop, u, u,
                       "loop at vertex " + std::to_string(u) + " with multiplicity " +
                           std::to_string(e->multiplicity)});
        continue;
      }
      const auto back = multiplicity(e->vertex, u);
      // Report each asymmetric pair once, from its smaller endpoint (or from
      // the only side that has an entry).
      if (back != e->multiplicity && (u < e->vertex || back == 0)) {
        out.push_back({Violation::Kind::Asymmetric, u, e->vertex,
                       "multiplicity" + vertex_pair(u, e->vertex) + "=" +
                           std::to_string(e->multiplicity) + " but multiplicity" +
                           vertex_pair(e->vertex, u) + "=" + std::to_string(back)});
      }
    }
  }
  return out;
}

IntMatrix StageGraph::laplacian() const {
  const auto n = n_vertices();
  IntMatrix m{n, n, std::vector<std::int64_t>(n * n, 0)};
  for (VertexId u = 0; u < n; ++u) {
    m(u, u) = static_cast<std::int64_t>(degrees_[u]);
    for (const Neighbor* e = neighbors_begin(u); e != neighbors_end(u); ++e) {
      if (e->vertex != u) m(u, e->vertex) -= e->multiplicity;
    }
  }
  return m;
}

bool StageGraph::operator==(const StageGraph& other) const noexcept {
  if (sink_ != other.sink_ || offsets_ != other.offsets_) return false;
  return std::equal(adjacency_.begin(), adjacency_.end(), other.adjacency_.begin(),
                    other.adjacency_.end(), [](const Neighbor& a, const Neighbor& b) {
                      return a.vertex == b.vertex && a.multiplicity == b.multiplicity;
                    });
}

std::uint64_t degree(const StageGraph& stage, VertexId v) { return stage.degree(v); }
IntMatrix laplacian(const StageGraph& stage) { return stage.laplacian(); }
std::vector<Violation> validate(const StageGraph& stage) { return stage.validate(); }
std::string to_string(const Violation& violation) { return violation.message; }

Schedule::Schedule(std::vector<StageGraph> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw InputError("schedule needs at least one stage");
  const auto n = stages_.front().n_vertices();
  const auto sink = stages_.front().sink();
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const auto& s = stages_[k];
    if (s.n_vertices() != n) {
      throw InputError("stage " + std::to_string(k) + " has " + std::to_string(s.n_vertices()) +
                       " vertices, expected " + std::to_string(n));
    }
    if (s.sink() != sink) throw InputError("stage " + std::to_string(k) + " has a different sink");
    auto violations = s.validate();
    if (!violations.empty()) {
      std::string msg = "stage " + std::to_string(k) + " is invalid:";
      for (const auto& v : violations) msg += " " + v.message + ";";
      throw InputError(msg);
    }
  }
}

Schedule parse_schedule_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("schedule JSON: ") + e.what());
  }
  try {
    const auto period = doc.at("period").get<std::size_t>();
    const auto n = doc.at("n_vertices").get<std::size_t>();
    std::optional<VertexId> sink;
    if (doc.contains("sink") && !doc.at("sink").is_null()) sink = doc.at("sink").get<VertexId>();
    const auto& stages_json = doc.at("stages");
    if (!stages_json.is_array() || stages_json.size() != period || period == 0) {
      throw InputError("schedule JSON: `stages` must hold exactly `period` (>= 1) edge lists");
    }
    std::vector<StageGraph> stages;
    for (const auto& edge_list : stages_json) {
      std::vector<Edge> edges;
      for (const auto& e : edge_list) {
        if (!e.is_array() || e.size() != 3) {
          throw InputError("schedule JSON: edges are [u, v, multiplicity] triples");
        }
        edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>(), e[2].get<Multiplicity>()});
      }
      stages.push_back(StageGraph::from_edges(n, sink, edges));
    }
    return Schedule(std::move(stages));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schedule JSON: ") + e.what());
  }
}

Schedule load_schedule_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schedule file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schedule_json(buffer.str());
}

std::string schedule_to_json(const Schedule& schedule) {
  nlohmann::json doc;
  doc["period"] = schedule.period();
  doc["n_vertices"] = schedule.n_vertices();
  doc["sink"] = schedule.sink() ? nlohmann::json(*schedule.sink()) : nlohmann::json(nullptr);
  auto stages = nlohmann::json::array();
  for (const auto& s : schedule.stages()) {
    auto edges = nlohmann::json::array();
    for (const auto& e : s.edges()) edges.push_back({e.u, e.v, e.multiplicity});
    stages.push_back(std::move(edges));
  }
  doc["stages"] = std::move(stages);
  return doc.dump();
}

std::vector<StageGraph> trigonometric_triangle_stages() {
  // sin(pi t / 2) and cos(pi t / 2) over one period.
  constexpr int kSin[4] = {0, 1, 0, -1};
  constexpr int kCos[4] = {1, 0, -1, 0};
  std::vector<StageGraph> stages;
  for (int t = 0; t < 4; ++t) {
    const auto f12 = static_cast<Multiplicity>(kSin[t] + 1);
    const auto f13 = static_cast<Multiplicity>(kCos[t] + 1);
    const auto f23 = static_cast<Multiplicity>(1 - kSin[t]);
    stages.push_back(StageGraph::from_edges(3, std::nullopt, {{0, 1, f12}, {0, 2, f13}, {1, 2, f23}}));
  }
  return stages;
}

Schedule trigonometric_triangle_schedule() {
  // v3 -> 0 (sink), v1 -> 1, v2 -> 2.
  constexpr VertexId kRemap[3] = {1, 2, 0};
  std::vector<StageGraph> stages;
  for (const auto& s : trigonometric_triangle_stages()) {
    std::vector<Edge> edges;
    for (const auto& e : s.edges()) edges.push_back({kRemap[e.u], kRemap[e.v], e.multiplicity});
    stages.push_back(StageGraph::from_edges(3, VertexId{0}, edges));
  }
  return Schedule(std::move(stages));
}

Schedule alternating_path_schedule() {
  constexpr VertexId s = 0, u = 1, v = 2;
  return Schedule({StageGraph::from_edges(3, s, {{u, v, 1}, {v, s, 1}}),
                   StageGraph::from_edges(3, s, {{u, v, 1}, {u, s, 1}})});
}

}  // namespace evosand
