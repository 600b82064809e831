#include "kacov/cli.hpp"

#include "kacov/angles.hpp"
#include "kacov/error.hpp"
#include "kacov/io.hpp"
#include "kacov/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace kacov {
namespace {

using json = nlohmann::ordered_json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::InputError, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::InputError, "failed writing '" + path + "'");
}

void report(std::ostream& err, std::string_view kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

struct Common {
  std::size_t threads = 0;
  std::string output;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, const char* default_format) {
  c.format = default_format;
  cmd->add_option("--output,-o", c.output, "Write to this file instead of standard output");
  cmd->add_option("--threads", c.threads, "Worker cap (overrides KACOV_THREADS)");
  cmd->add_option("--format", c.format, "json or csv")->capture_default_str();
}

void apply_common(const Common& c) {
  if (c.format != "json" && c.format != "csv") {
    throw Error(ErrorCode::InvalidSpec, "unknown format '" + c.format + "' (expected json, csv)");
  }
  set_worker_override(c.threads);
  (void)configured_workers();  // surfaces a malformed KACOV_THREADS as an input error
}

std::optional<std::size_t> shape_of(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_shape(text);
}

// ---------------------------------------------------------------- test

struct TestArgs {
  Common common;
  std::string x, y, gram_x, gram_y;
  std::string shape, shape_x, shape_y;
  std::string kernel, kernel_x = "gaussian", kernel_y = "gaussian";
  std::string method = "kacov1", inference = "gamma";
  std::size_t permutations = kDefaultPermutations;
  std::uint64_t seed = 0;
  std::size_t memo_cap = EstimatorOptions{}.memo_cap;
};

GramMatrix side_gram(const std::string& path, const std::string& gram_path,
                     std::optional<std::size_t> shape, const KernelSpec& spec, const char* name) {
  if (path.empty() == gram_path.empty()) {
    throw Error(ErrorCode::InvalidSpec,
                std::string("give exactly one of --") + name + " and --gram-" + name);
  }
  if (!gram_path.empty()) return gram_from_matrix(load_square_matrix(gram_path));
  const SampleSet s = load_samples(path, shape);
  try {
    return gram(s, spec);
  } catch (const Error& e) {
    throw e.with_context(std::string("kernel for ") + name);
  }
}

std::string cmd_test(const TestArgs& a) {
  apply_common(a.common);
  const Method method = parse_method(a.method);
  const Inference inference = parse_inference(a.inference);
  const KernelSpec kx = KernelSpec::parse(a.kernel.empty() ? a.kernel_x : a.kernel);
  const KernelSpec ky = KernelSpec::parse(a.kernel.empty() ? a.kernel_y : a.kernel);
  const auto sx = shape_of(a.shape_x.empty() ? a.shape : a.shape_x);
  const auto sy = shape_of(a.shape_y.empty() ? a.shape : a.shape_y);
  if (a.permutations < 1) throw Error(ErrorCode::InvalidSpec, "--permutations must be >= 1");

  const GramMatrix gx = side_gram(a.x, a.gram_x, sx, kx, "x");
  const GramMatrix gy = side_gram(a.y, a.gram_y, sy, ky, "y");
  if (gx.size() != gy.size()) {
    throw Error(ErrorCode::InputError, "X has " + std::to_string(gx.size()) +
                                           " samples but Y has " + std::to_string(gy.size()));
  }
  EstimatorOptions opts;
  opts.memo_cap = a.memo_cap;
  const TestResult r = run_test_on_grams(gx, gy, method, inference, a.permutations, a.seed, opts);
  if (a.common.format == "json") return test_result_json(r) + "\n";

  const json j = json::parse(test_result_json(r));
  std::string header, row;
  bool first = true;
  for (const auto& [key, value] : j.items()) {
    if (!first) {
      header += ',';
      row += ',';
    }
    first = false;
    header += key;
    if (value.is_number_float()) {
      row += format_double(value.get<double>());
    } else if (value.is_string()) {
      row += value.get<std::string>();
    } else if (!value.is_null()) {
      row += value.dump();
    }
  }
  return header + "\n" + row + "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  std::string scenario;
  std::size_t n = 100;
  std::size_t reps = 500;
  double level = 0.05;
  std::string noise = "normal";
  bool independent = false;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"kacov1"};
  std::string kernel, kernel_x, kernel_y;
  std::string inference = "gamma";
  std::size_t permutations = kDefaultPermutations;
  std::string lambda_grid, rho_grid;
  std::optional<double> param;
  bool no_timing = false;
  std::size_t memo_cap = EstimatorOptions{}.memo_cap;
};

std::string cmd_simulate(const SimulateArgs& a) {
  apply_common(a.common);
  const Scenario id = parse_scenario(a.scenario);
  const Noise noise = parse_noise(a.noise);
  const Inference inference = parse_inference(a.inference);
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));
  if (methods.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one --method");

  auto [kx, ky] = default_kernels(id);
  if (!a.kernel.empty()) kx = ky = KernelSpec::parse(a.kernel);
  if (!a.kernel_x.empty()) kx = KernelSpec::parse(a.kernel_x);
  if (!a.kernel_y.empty()) ky = KernelSpec::parse(a.kernel_y);

  const bool rho = uses_rho(id);
  if (rho && !a.lambda_grid.empty()) {
    throw Error(ErrorCode::InvalidSpec, "scenario '" + a.scenario + "' takes --rho-grid");
  }
  if (!rho && !a.rho_grid.empty()) {
    throw Error(ErrorCode::InvalidSpec, "scenario '" + a.scenario + "' takes --lambda-grid");
  }
  const std::string& grid_text = rho ? a.rho_grid : a.lambda_grid;
  if (a.param && !grid_text.empty()) {
    throw Error(ErrorCode::InvalidSpec, "--param and a grid are mutually exclusive");
  }
  std::vector<double> params;
  if (a.param) {
    params = {*a.param};
  } else {
    params = parse_grid(!grid_text.empty() ? grid_text : rho ? "0:0.9:0.1" : "0.1:1:0.1");
  }
  if (!(a.level >= 0.0 && a.level <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "--level must lie in [0, 1]");
  }
  if (a.reps < 1) throw Error(ErrorCode::InvalidSpec, "--reps must be >= 1");

  std::vector<ScenarioSpec> specs;
  for (double p : params) {
    ScenarioSpec s{id, a.n, p, noise, a.independent, a.seed};
    s.validate();
    specs.push_back(s);
  }
  for (Method m : methods) {
    if (a.n < min_sample_size(m)) {
      throw Error(ErrorCode::InvalidSpec, std::string(method_name(m)) + " needs n >= " +
                                              std::to_string(min_sample_size(m)));
    }
  }

  std::ostringstream out;
  json rows = json::array();
  if (a.common.format == "csv") out << kSimulateHeader << '\n';
  for (Method m : methods) {
    for (const auto& s : specs) {
      RateConfig cfg;
      cfg.method = m;
      cfg.inference = inference;
      cfg.kernel_x = kx;
      cfg.kernel_y = ky;
      cfg.level = a.level;
      cfg.reps = a.reps;
      cfg.permutations = a.permutations;
      cfg.opts.memo_cap = a.memo_cap;
      SimResult r;
      try {
        r = empirical_rate(s, cfg);
      } catch (const Error& e) {
        throw e.with_context(std::string(method_name(m)) + " at param " + format_double(s.param));
      }
      if (a.common.format == "csv") {
        out << simulate_csv_row(r, kx, ky, !a.no_timing) << '\n';
      } else {
        rows.push_back({{"scenario", scenario_name(id)},
                        {"method", method_name(m)},
                        {"kernel_x", kx.label()},
                        {"kernel_y", ky.label()},
                        {"inference", inference_name(inference)},
                        {"n", s.n},
                        {"param", s.param},
                        {"noise", noise_name(noise)},
                        {"reps", r.reps},
                        {"level", r.level},
                        {"rejection_rate", r.rejection_rate},
                        {"mean_statistic", r.mean_statistic},
                        {"seed", s.seed},
                        {"wall_time_s", a.no_timing ? 0.0 : r.wall_time}});
      }
    }
  }
  if (a.common.format == "json") out << rows.dump(2) << '\n';
  return out.str();
}

// ---------------------------------------------------------------- gram

struct GramArgs {
  Common common;
  std::string x, shape;
  std::string kernel = "gaussian";
  std::string matrix = "gram";
  std::optional<std::size_t> vertex;
};

std::string cmd_gram(const GramArgs& a) {
  apply_common(a.common);
  const KernelSpec spec = KernelSpec::parse(a.kernel);
  if (a.matrix != "gram" && a.matrix != "angle_prime" && a.matrix != "angle_vertex") {
    throw Error(ErrorCode::InvalidSpec, "unknown matrix '" + a.matrix +
                                            "' (expected gram, angle_prime, angle_vertex)");
  }
  if (a.matrix == "angle_vertex" && !a.vertex) {
    throw Error(ErrorCode::InvalidSpec, "angle_vertex needs --vertex");
  }
  if (a.common.format != "csv") throw Error(ErrorCode::InvalidSpec, "gram writes csv only");
  const SampleSet s = load_samples(a.x, shape_of(a.shape));
  const GramMatrix g = gram(s, spec);
  SquareMatrix m;
  if (a.matrix == "gram") {
    m = g.entries;
  } else if (a.matrix == "angle_prime") {
    m = angle_prime_matrix(g).entries;
  } else {
    if (*a.vertex >= g.size()) {
      throw Error(ErrorCode::InvalidSpec, "--vertex " + std::to_string(*a.vertex) +
                                              " out of range for n = " + std::to_string(g.size()));
    }
    m = angle_vertex_matrix(g, *a.vertex).entries;
  }
  std::ostringstream out;
  write_matrix_csv(out, m);
  return out.str();
}

}  // namespace

std::string test_result_json(const TestResult& r) {
  json j;
  j["method"] = method_name(r.method);
  j["inference"] = inference_name(r.inference);
  j["kernel_x"] = r.kernel_x;
  j["kernel_y"] = r.kernel_y;
  j["bandwidth_x"] = optional_number(r.bandwidth_x);
  j["bandwidth_y"] = optional_number(r.bandwidth_y);
  j["n"] = r.n;
  j["statistic"] = r.statistic;
  j["scaled_statistic"] = r.scaled_statistic;
  j["p_value"] = r.p_value;
  j["gamma_shape"] = r.gamma_params ? json(r.gamma_params->shape) : json(nullptr);
  j["gamma_rate"] = r.gamma_params ? json(r.gamma_params->rate) : json(nullptr);
  j["permutations"] = r.permutations ? json(*r.permutations) : json(nullptr);
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j.dump();
}

std::string simulate_csv_row(const SimResult& r, const KernelSpec& kx, const KernelSpec& ky,
                             bool timing) {
  std::ostringstream out;
  out << scenario_name(r.scenario.id) << ',' << method_name(r.method) << ',' << kx.label() << ','
      << ky.label() << ',' << inference_name(r.inference) << ',' << r.scenario.n << ','
      << format_double(r.scenario.param) << ',' << noise_name(r.scenario.noise) << ',' << r.reps
      << ',' << format_double(r.level) << ',' << format_double(r.rejection_rate) << ','
      << r.scenario.seed << ',' << format_double(timing ? r.wall_time : 0.0);
  return out.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::string_view rest(text);
  while (true) {
    const auto colon = rest.find(':');
    const auto field = rest.substr(0, colon);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorCode::InvalidSpec, "bad grid '" + text + "' (expected start:stop:step)");
    }
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw Error(ErrorCode::InvalidSpec, "bad grid '" + text + "' (expected start:stop:step)");
  }
  const double start = parts[0], stop = parts[1], step = parts[2];
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 10000) throw Error(ErrorCode::InvalidSpec, "grid '" + text + "' is too long");
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    // Rounded so that 0.1:1:0.1 yields 0.3 rather than 0.30000000000000004.
    out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel angle covariance independence tests"};
  app.require_subcommand(1);

  TestArgs t;
  auto* test = app.add_subcommand("test", "Test independence of two samples");
  add_common(test, t.common, "json");
  test->add_option("--x", t.x, "CSV of X samples (rows are samples)");
  test->add_option("--y", t.y, "CSV of Y samples");
  test->add_option("--gram-x", t.gram_x, "Precomputed X Gram matrix CSV");
  test->add_option("--gram-y", t.gram_y, "Precomputed Y Gram matrix CSV");
  test->add_option("--shape", t.shape, "SPD mode for both sides: each row is a dxd matrix");
  test->add_option("--shape-x", t.shape_x, "SPD mode for X");
  test->add_option("--shape-y", t.shape_y, "SPD mode for Y");
  test->add_option("--kernel", t.kernel, "Kernel for both sides");
  test->add_option("--kernel-x", t.kernel_x, "Kernel for X")->capture_default_str();
  test->add_option("--kernel-y", t.kernel_y, "Kernel for Y")->capture_default_str();
  test->add_option("--method", t.method, "kacov1, kacov2, kacov3 or gdcov")->capture_default_str();
  test->add_option("--inference", t.inference, "gamma or permutation")->capture_default_str();
  test->add_option("--permutations,-B", t.permutations)->capture_default_str();
  test->add_option("--seed", t.seed)->capture_default_str();
  test->add_option("--memo-cap", t.memo_cap, "Largest n whose vertex angles are cached")
      ->capture_default_str();

  SimulateArgs s;
  auto* sim = app.add_subcommand("simulate", "Empirical size or power over a parameter grid");
  add_common(sim, s.common, "csv");
  sim->add_option("--scenario", s.scenario)->required();
  sim->add_option("--n", s.n)->capture_default_str();
  sim->add_option("--reps", s.reps)->capture_default_str();
  sim->add_option("--level", s.level)->capture_default_str();
  sim->add_option("--noise", s.noise, "normal or t3")->capture_default_str();
  sim->add_flag("--independent", s.independent, "Test X of one draw against Y of another");
  sim->add_option("--seed", s.seed)->capture_default_str();
  sim->add_option("--method", s.methods, "One or more methods")->delimiter(',')
      ->capture_default_str();
  sim->add_option("--kernel", s.kernel, "Kernel for both sides (default: per scenario)");
  sim->add_option("--kernel-x", s.kernel_x);
  sim->add_option("--kernel-y", s.kernel_y);
  sim->add_option("--inference", s.inference)->capture_default_str();
  sim->add_option("--permutations,-B", s.permutations)->capture_default_str();
  sim->add_option("--lambda-grid", s.lambda_grid, "start:stop:step");
  sim->add_option("--rho-grid", s.rho_grid, "start:stop:step");
  sim->add_option("--param", s.param, "Single lambda or rho value");
  sim->add_flag("--no-timing", s.no_timing, "Write 0 for wall_time_s");
  sim->add_option("--memo-cap", s.memo_cap)->capture_default_str();

  GramArgs g;
  auto* gr = app.add_subcommand("gram", "Dump a Gram or angle matrix");
  add_common(gr, g.common, "csv");
  gr->add_option("--x", g.x)->required();
  gr->add_option("--shape", g.shape);
  gr->add_option("--kernel", g.kernel)->capture_default_str();
  gr->add_option("--matrix", g.matrix, "gram, angle_prime or angle_vertex")->capture_default_str();
  gr->add_option("--vertex", g.vertex, "Vertex index for angle_vertex");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "invalid arguments", e.what());
    return kExitInput;
  }

  try {
    std::string text;
    const Common* common = nullptr;
    if (test->parsed()) {
      text = cmd_test(t);
      common = &t.common;
    } else if (sim->parsed()) {
      text = cmd_simulate(s);
      common = &s.common;
    } else {
      text = cmd_gram(g);
      common = &g.common;
    }
    emit(text, common->output, out);
    return kExitOk;
  } catch (const Error& e) {
    report(err, error_code_name(e.code()), e.what());
    return error_class(e.code()) == ErrorClass::Input ? kExitInput : kExitNumeric;
  } catch (const std::bad_alloc&) {
    report(err, "out of memory", "allocation failed");
    return kExitNumeric;
  }
}

}  // namespace kacov
