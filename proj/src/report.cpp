#include "evosand/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace evosand {

std::string avalanches_to_csv(const std::vector<AvalancheRecord>& records) {
  std::string out = "index,size\n";
  for (const auto& r : records) {
    out += std::to_string(r.index);
    out += ',';
    out += std::to_string(r.size);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

}  // namespace

std::vector<Size> read_size_column(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV input");
  const auto header = split_fields(line);
  std::size_t column = header.size();
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "size") column = k;
  }
  if (column == header.size()) throw InputError("CSV input has no `size` column");

  std::vector<Size> sizes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (column >= fields.size()) {
      throw InputError("line " + std::to_string(line_no) + ": missing `size` field");
    }
    const auto& f = fields[column];
    Size value = 0;
    const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
    if (ec != std::errc() || end != f.data() + f.size() || value < 0) {
      throw InputError("line " + std::to_string(line_no) + ": `" + f +
                       "` is not a non-negative integer");
    }
    sizes.push_back(value);
  }
  if (sizes.empty()) throw InputError("CSV input has no data rows");
  return sizes;
}

std::string histogram_to_csv(const std::vector<std::pair<Size, double>>& histogram) {
  std::string out = "size,probability\n";
  char buf[64];
  for (const auto& [size, p] : histogram) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out += std::to_string(size);
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

nlohmann::json fit_report(const PowerLawFit& fit, const std::vector<LrtResult>& lrt,
                          std::optional<double> bootstrap_p) {
  nlohmann::json doc;
  doc["x_min"] = fit.x_min;
  doc["alpha"] = fit.alpha;
  doc["ks"] = fit.ks;
  doc["n_tail"] = fit.n_tail;
  auto tests = nlohmann::json::array();
  for (const auto& t : lrt) {
    tests.push_back({{"alternative", to_string(t.alternative)}, {"r", t.r}, {"p", t.p}});
  }
  doc["lrt"] = std::move(tests);
  doc["bootstrap_p"] = bootstrap_p ? nlohmann::json(*bootstrap_p) : nlohmann::json(nullptr);
  return doc;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json doc;
  doc["command"] = command;
  doc["parameters"] = parameters;
  doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  doc["outputs"] = outputs;
  doc["wall_clock_seconds"] = wall_clock_seconds;
  doc["total_topplings"] = total_topplings;
  return doc;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace evosand
