// evosand: central-pile patterns, driven avalanche dynamics and power-law
// fits for sandpiles on evolving graphs.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evosand/dynamics.hpp"
#include "evosand/engine.hpp"
#include "evosand/lattice.hpp"
#include "evosand/powerlaw.hpp"
#include "evosand/render.hpp"
#include "evosand/report.hpp"

namespace {

using namespace evosand;

enum Exit : int {
  kOk = 0,
  kLimitExceeded = 2,
  kNonTerminating = 3,
  kUnfittable = 4,
  kUsage = 64,
  kNoInput = 66,
  kCantCreate = 73,
};

// Input file missing, unreadable or malformed.
struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string schedule;
  Grains grains = 0;
  std::size_t width = 50;
  std::size_t height = 50;
  std::uint64_t iterations = 10'000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  std::string mode;
  std::uint64_t max_rounds = 0;
  std::vector<std::string> compare;
  std::size_t bootstrap = 0;
  std::string trace;
  std::string input;
  std::string config;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadInput("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool is_builtin(const std::string& name) {
  return name == "static" || name == "model-d" || name == "model-g" || name == "doubled";
}

LatticeSchedule lattice_schedule(const std::string& spec) {
  if (is_builtin(spec)) return LatticeSchedule::by_name(spec);
  try {
    return LatticeSchedule::from_json(read_text(spec));
  } catch (const InputError& e) {
    throw BadInput(e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_manifest(RunManifest m, const std::string& out) {
  auto doc = m.to_json();
  doc["manifest"] = manifest_path(out);
  write_file(manifest_path(out), doc.dump(2) + "\n");
}

std::string pattern_format(const Options& o) {
  if (!o.format.empty()) return o.format;
  const auto ext = std::filesystem::path(o.out).extension().string();
  if (ext == ".png") return "png";
  if (ext == ".csv") return "csv";
  return "pgm";
}

int cmd_pattern(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  if (o.grains < 1) throw InputError("--grains must be at least 1");
  const auto schedule = lattice_schedule(o.schedule);
  PatternOptions opts;
  opts.mode = o.mode.empty() ? TerminationMode::FullPeriodQuiet : parse_termination_mode(o.mode);
  if (o.max_rounds) opts.limits.max_rounds = o.max_rounds;
  opts.progress = [](std::uint64_t rounds, std::uint64_t topplings, std::int64_t extent) {
    std::cerr << "progress: rounds=" << rounds << " topplings=" << topplings << " extent=" << extent
              << std::endl;
  };

  std::vector<std::string> outputs{o.out};
  PatternResult result;
  if (o.trace.empty()) {
    result = run_central_pile(schedule, o.grains, opts);
  } else {
    // The trace window is the box the untraced run reached; the support never
    // shrinks, so its final radius covers every round.
    const auto reach = run_central_pile(schedule, o.grains, opts).grid.support_radius();
    std::ofstream trace(o.trace);
    if (!trace) throw std::runtime_error("cannot write " + o.trace);
    opts.observer = [&](std::uint64_t t, std::uint64_t k, const DenseGrid& g) {
      trace << format_lattice_trace_line(t, k, g, reach) << '\n';
    };
    result = run_central_pile(schedule, o.grains, opts);
    outputs.push_back(o.trace);
  }

  const auto format = pattern_format(o);
  const auto image = result.grid.cropped(0);
  const auto palette = Palette::standard();
  if (format == "png") {
    write_file(o.out, render_png(image, palette));
  } else if (format == "csv") {
    write_file(o.out, grid_to_csv(image));
  } else {
    write_file(o.out, render_pgm(image, palette));
  }

  RunManifest m;
  m.command = "pattern";
  m.parameters = {{"schedule", o.schedule},
                  {"grains", o.grains},
                  {"mode", to_string(opts.mode)},
                  {"max_rounds", opts.limits.max_rounds},
                  {"format", format},
                  {"out", o.out}};
  if (!o.trace.empty()) m.parameters["trace"] = o.trace;
  m.outputs = outputs;
  m.wall_clock_seconds = seconds_since(start);
  m.total_topplings = result.total_topplings;
  auto doc = m.to_json();
  doc["result"] = {{"status", to_string(result.status)},
                   {"rounds", result.rounds},
                   {"final_t", result.final_t},
                   {"width", image.width()},
                   {"height", image.height()},
                   {"max_value", result.max_value}};
  if (result.status == PatternStatus::NonTerminating) {
    doc["result"]["cycle_start_t"] = result.cycle_start_t;
    doc["result"]["cycle_length"] = result.cycle_length;
  }
  doc["manifest"] = manifest_path(o.out);
  write_file(manifest_path(o.out), doc.dump(2) + "\n");

  switch (result.status) {
    case PatternStatus::Stabilized: return kOk;
    case PatternStatus::LimitExceeded:
      std::cerr << "evosand: round limit reached after " << result.rounds << " rounds\n";
      return kLimitExceeded;
    case PatternStatus::NonTerminating:
      std::cerr << "evosand: configuration recurs with period " << result.cycle_length
                << " from t=" << result.cycle_start_t << "\n";
      return kNonTerminating;
  }
  return kOk;
}

int cmd_avalanche(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto mode = o.mode.empty() ? TerminationMode::FirstQuiet : parse_termination_mode(o.mode);
  auto limits = Limits::for_avalanches();
  if (o.max_rounds) limits.max_rounds = o.max_rounds;

  std::vector<AvalancheRecord> records;
  nlohmann::json params = {{"schedule", o.schedule}, {"iterations", o.iterations},
                           {"seed", o.seed},         {"mode", to_string(mode)},
                           {"max_rounds", limits.max_rounds}, {"out", o.out}};
  try {
    if (!is_builtin(o.schedule) && read_text(o.schedule).find("\"stages\"") != std::string::npos) {
      Schedule graph = [&] {
        try {
          return parse_schedule_json(read_text(o.schedule));
        } catch (const InputError& e) {
          throw BadInput(e.what());
        }
      }();
      records = run_dynamics(graph, o.iterations, o.seed, mode, limits);
    } else {
      DynamicsConfig cfg{o.width, o.height, lattice_schedule(o.schedule), o.iterations, o.seed, mode, limits};
      params["width"] = o.width;
      params["height"] = o.height;
      records = run_dynamics(cfg);
    }
  } catch (const DynamicsAborted& e) {
    std::cerr << "evosand: " << e.what() << "\n";
    return e.reason() == DynamicsAborted::Reason::LimitExceeded ? kLimitExceeded : kNonTerminating;
  }

  write_file(o.out, avalanches_to_csv(records));
  RunManifest m;
  m.command = "avalanche";
  m.parameters = params;
  m.seed = o.seed;
  m.outputs = {o.out};
  m.wall_clock_seconds = seconds_since(start);
  for (const auto& r : records) m.total_topplings += r.size;
  write_manifest(m, o.out);
  return kOk;
}

int cmd_fit(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Size> samples;
  {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) throw BadInput("cannot read " + o.input);
    try {
      samples = read_size_column(in);
    } catch (const InputError& e) {
      throw BadInput(o.input + ": " + e.what());
    }
  }

  std::vector<Alternative> alternatives;
  for (const auto& name : o.compare.empty() ? std::vector<std::string>{"exponential"} : o.compare) {
    alternatives.push_back(parse_alternative(name));
  }

  PowerLawFit fit;
  try {
    fit = fit_power_law(samples);
  } catch (const InputError& e) {
    std::cerr << "evosand: cannot fit " << o.input << ": " << e.what() << "\n";
    return kUnfittable;
  }
  if (fit.warning) std::cerr << "evosand: warning: " << *fit.warning << "\n";

  std::vector<LrtResult> lrt;
  if (fit.n_tail >= kMinTailSamples) {
    for (auto a : alternatives) lrt.push_back(loglikelihood_ratio(samples, fit, a));
  } else {
    std::cerr << "evosand: warning: tail too short for the likelihood ratio test\n";
  }
  std::optional<double> bootstrap_p;
  if (o.bootstrap > 0) bootstrap_p = bootstrap_p_value(samples, fit, o.bootstrap, o.seed);

  const auto histogram_path = o.out + ".histogram.csv";
  write_file(o.out, fit_report(fit, lrt, bootstrap_p).dump(2) + "\n");
  write_file(histogram_path, histogram_to_csv(survival_histogram(samples)));

  RunManifest m;
  m.command = "fit";
  std::vector<std::string> names;
  for (auto a : alternatives) names.push_back(to_string(a));
  m.parameters = {{"input", o.input}, {"compare", names}, {"bootstrap", o.bootstrap}, {"out", o.out}};
  if (o.bootstrap > 0) m.seed = o.seed;
  m.outputs = {o.out, histogram_path};
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(m, o.out);
  return kOk;
}

std::vector<Grains> parse_values(const std::string& text) {
  std::vector<Grains> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--config: `" + item + "` is not an integer");
    }
  }
  return values;
}

int cmd_stabilize(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  Schedule schedule = [&] {
    try {
      return parse_schedule_json(read_text(o.schedule));
    } catch (const InputError& e) {
      throw BadInput(e.what());
    }
  }();
  const auto values = parse_values(o.config);
  EngineState state{Configuration::from_non_sink(schedule.n_vertices(), schedule.sink(), values), 0};
  const auto mode = o.mode.empty() ? TerminationMode::FullPeriodQuiet : parse_termination_mode(o.mode);
  auto limits = Limits::for_patterns();
  if (o.max_rounds) limits.max_rounds = o.max_rounds;

  std::ostringstream trace;
  const auto outcome = stabilize(std::move(state), schedule, mode, limits,
                                 [&](const RoundRecord& r) { trace << format_trace_line(r) << '\n'; });

  nlohmann::json result;
  std::uint64_t topplings = 0;
  int code = kOk;
  const auto values_json = [](const Configuration& c) { return nlohmann::json(c.non_sink_values()); };
  if (const auto* s = std::get_if<Stabilized>(&outcome)) {
    result = {{"status", "stabilized"}, {"config", values_json(s->config)}, {"final_t", s->final_t},
              {"rounds", s->rounds_executed}};
    topplings = s->total_topplings;
  } else if (const auto* n = std::get_if<NonTerminating>(&outcome)) {
    result = {{"status", "non-terminating"}, {"config", values_json(n->state.config)},
              {"cycle_start_t", n->cycle_start_t}, {"cycle_length", n->cycle_length},
              {"rounds", n->rounds_executed}};
    topplings = n->total_topplings;
    code = kNonTerminating;
  } else {
    const auto& l = std::get<LimitExceeded>(outcome);
    result = {{"status", "limit-exceeded"}, {"config", values_json(l.state.config)},
              {"rounds", l.rounds_executed}};
    topplings = l.total_topplings;
    code = kLimitExceeded;
  }
  result["total_topplings"] = topplings;

  std::vector<std::string> outputs{o.out};
  write_file(o.out, result.dump(2) + "\n");
  if (!o.trace.empty()) {
    write_file(o.trace, trace.str());
    outputs.push_back(o.trace);
  }
  RunManifest m;
  m.command = "stabilize";
  m.parameters = {{"schedule", o.schedule}, {"config", o.config}, {"mode", to_string(mode)},
                  {"max_rounds", limits.max_rounds}, {"out", o.out}};
  m.outputs = outputs;
  m.wall_clock_seconds = seconds_since(start);
  m.total_topplings = topplings;
  write_manifest(m, o.out);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sandpiles on evolving graphs: patterns, avalanches and power-law fits"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::string> modes{"first-quiet", "full-period-quiet"};

  auto* pattern = app.add_subcommand("pattern", "Stabilize a central pile on an evolving lattice");
  pattern->add_option("--schedule", o.schedule, "static, model-d, model-g, doubled or a lattice schedule JSON")
      ->required();
  pattern->add_option("--grains", o.grains, "Grains at the origin")->required();
  pattern->add_option("--out", o.out, "Output image or grid CSV")->required();
  pattern->add_option("--format", o.format, "Output format (default: from --out extension)")
      ->check(CLI::IsMember({"pgm", "png", "csv"}));
  pattern->add_option("--mode", o.mode, "Termination mode (default full-period-quiet)")
      ->check(CLI::IsMember(modes));
  pattern->add_option("--max-rounds", o.max_rounds, "Round limit")->check(CLI::PositiveNumber);
  pattern->add_option("--trace", o.trace, "Write one line per round");

  auto* avalanche = app.add_subcommand("avalanche", "Record avalanche sizes of the driven dynamics");
  avalanche->add_option("--schedule", o.schedule,
                        "Lattice schedule name or JSON, or an explicit graph schedule JSON")
      ->required();
  avalanche->add_option("--width", o.width, "Lattice width")->capture_default_str();
  avalanche->add_option("--height", o.height, "Lattice height")->capture_default_str();
  avalanche->add_option("--iterations", o.iterations, "Grains added")->capture_default_str();
  avalanche->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  avalanche->add_option("--out", o.out, "Avalanche CSV")->required();
  avalanche->add_option("--mode", o.mode, "Termination mode (default first-quiet)")
      ->check(CLI::IsMember(modes));
  avalanche->add_option("--max-rounds", o.max_rounds, "Round limit per stabilization")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit a discrete power law to the `size` column of a CSV");
  fit->add_option("input", o.input, "CSV with a `size` column")->required();
  fit->add_option("--compare", o.compare, "Alternative for the likelihood ratio test (repeatable)")
      ->check(CLI::IsMember({"exponential", "lognormal"}));
  fit->add_option("--bootstrap", o.bootstrap, "Bootstrap goodness-of-fit resamples (0: skip)")
      ->capture_default_str();
  fit->add_option("--seed", o.seed, "Random seed for the bootstrap")->capture_default_str();
  fit->add_option("--out", o.out, "Fit report JSON")->required();

  auto* stab = app.add_subcommand("stabilize", "Stabilize a configuration on a graph schedule JSON");
  stab->add_option("--schedule", o.schedule, "Graph schedule JSON")->required();
  stab->add_option("--config", o.config, "Comma-separated grains of the non-sink vertices")->required();
  stab->add_option("--out", o.out, "Result JSON")->required();
  stab->add_option("--mode", o.mode, "Termination mode (default full-period-quiet)")
      ->check(CLI::IsMember(modes));
  stab->add_option("--max-rounds", o.max_rounds, "Round limit")->check(CLI::PositiveNumber);
  stab->add_option("--trace", o.trace, "Write one line per round");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*pattern) return cmd_pattern(o);
    if (*avalanche) return cmd_avalanche(o);
    if (*fit) return cmd_fit(o);
    return cmd_stabilize(o);
  } catch (const BadInput& e) {
    std::cerr << "evosand: " << e.what() << "\n";
    return kNoInput;
  } catch (const InputError& e) {
    std::cerr << "evosand: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "evosand: " << e.what() << "\n";
    return kCantCreate;
  }
}
