#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evosand/dynamics.hpp"
#include "evosand/powerlaw.hpp"

namespace evosand {

// `index,size` header, one record per row.
std::string avalanches_to_csv(const std::vector<AvalancheRecord>& records);

// Values of the `size` column of a CSV with a header row. Throws InputError on
// a missing column, a malformed or negative value, or no data rows.
std::vector<Size> read_size_column(std::istream& in);

// `size,probability` header, probabilities printed round-trip exact.
std::string histogram_to_csv(const std::vector<std::pair<Size, double>>& histogram);

nlohmann::json fit_report(const PowerLawFit& fit, const std::vector<LrtResult>& lrt,
                          std::optional<double> bootstrap_p);

struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0;
  std::uint64_t total_topplings = 0;

  nlohmann::json to_json() const;
};

// Writes `text` to `path`, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace evosand
