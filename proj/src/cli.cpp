#include "swlrtr/cli.hpp"

#include "swlrtr/config.hpp"
#include "swlrtr/cube_io.hpp"
#include "swlrtr/metrics.hpp"
#include "swlrtr/noise.hpp"
#include "swlrtr/solver.hpp"
#include "swlrtr/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace swlrtr {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Thrown for problems the user can fix by changing the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw UsageError(p.string() + ": no such file");
}

std::string absolute_string(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  return fs::path(base.string() + suffix);
}

void write_manifest(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << std::setw(2) << j << '\n';
}

json settings_json(const SolverConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : to_settings(cfg)) j[k] = v;
  return j;
}

KeyValues settings_from_json(const json& j) {
  KeyValues kv;
  for (const auto& [k, v] : j.items()) kv.emplace_back(k, v.get<std::string>());
  return kv;
}

// Solver flags shared by denoise and bench. Values stay textual so they go
// through the same validation as config files.
struct SolverFlags {
  std::optional<std::string> config;
  std::optional<std::string> k, p, q, lambda1, lambda2, alpha, beta, iters;
  std::optional<int> threads;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "key = value configuration file");
    app.add_option("--k", k, "subspace dimension, or auto");
    app.add_option("--p", p, "patch size");
    app.add_option("--q", q, "patches per group");
    app.add_option("--lambda1", lambda1, "group regularisation weight");
    app.add_option("--lambda2", lambda2, "sparse noise weight");
    app.add_option("--alpha", alpha, "iterative regularisation mix");
    app.add_option("--beta", beta, "subspace growth step");
    app.add_option("--iters", iters, "outer iterations");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  // Flag > config file > defaults; SWLRTR_THREADS stands in for --threads.
  SolverConfig resolve(Index bands) const {
    KeyValues kv;
    if (config) {
      require_file(*config);
      kv = read_key_values(*config);
    }
    auto set = [&kv](const std::string& key, const std::optional<std::string>& v) {
      if (!v) return;
      std::erase_if(kv, [&](const auto& e) { return e.first == key; });
      kv.emplace_back(key, *v);
    };
    set("k", k);
    set("p", p);
    set("q", q);
    set("lambda1", lambda1);
    set("lambda2", lambda2);
    set("alpha", alpha);
    set("beta", beta);
    set("iters", iters);
    std::optional<std::string> t;
    if (threads) {
      t = std::to_string(*threads);
    } else if (const char* env = std::getenv("SWLRTR_THREADS"); env != nullptr && *env != '\0') {
      t = env;
    }
    set("threads", t);
    return apply_settings({}, kv, bands);
  }
};

struct SimulateArgs {
  std::string clean;
  int case_id = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int simulate(const SimulateArgs& a, std::ostream& log) {
  require_file(a.clean);
  if (!a.seed) throw UsageError("simulate: --seed is required");
  NoiseSpec spec;
  try {
    spec = NoiseSpec::for_case(a.case_id, *a.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto t0 = Clock::now();
  HsiCube clean = read_cube(a.clean);
  const double lo = clean.data.flat().minCoeff();
  const double hi = clean.data.flat().maxCoeff();
  const bool rescaled = lo < 0.0 || hi > 1.0;
  if (rescaled) clean = normalize(clean);
  try {
    spec.validate(clean.bands());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const NoisyCube noisy = add_case_noise(clean, spec);

  const fs::path out(a.out);
  const fs::path mask_path = fs::path(out).replace_extension(".mask.cube");
  write_cube(noisy.noisy, out);
  write_cube(HsiCube(noisy.truth.mask), mask_path, SampleType::Float32);
  json outputs{{"noisy", absolute_string(out)}, {"mask", absolute_string(mask_path)}};
  if (rescaled) {
    const fs::path truth_path = fs::path(out).replace_extension(".truth.cube");
    write_cube(clean, truth_path);
    outputs["truth"] = absolute_string(truth_path);
  }

  json m;
  m["command"] = "simulate";
  m["inputs"] = {{"clean", absolute_string(a.clean)}};
  m["case"] = a.case_id;
  m["seed"] = *a.seed;
  m["outputs"] = outputs;
  m["injected"] = {{"band_sigma", noisy.truth.band_sigma},
                   {"impulse_bands", noisy.truth.impulse_bands},
                   {"deadline_bands", noisy.truth.deadline_bands}};
  m["wall_time_s"] = std::chrono::duration<double>(Clock::now() - t0).count();
  write_manifest(with_suffix(out, ".manifest.json"), m);
  log << "wrote " << out.string() << '\n';
  return kExitOk;
}

struct DenoiseArgs {
  std::string noisy;
  std::optional<std::string> truth;
  std::string out;
};

int denoise_files(const DenoiseArgs& a, const SolverConfig& cfg, std::ostream& log) {
  const auto t0 = Clock::now();
  const HsiCube y = read_cube(a.noisy);
  std::optional<HsiCube> truth;
  if (a.truth) truth = read_cube(*a.truth);
  if (truth && !(truth->dims() == y.dims())) throw UsageError("denoise: --truth dimensions differ from the input");

  const DenoiseResult r = denoise(y.data, cfg, truth ? &truth->data : nullptr);

  const fs::path prefix(a.out);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const fs::path clean_path = with_suffix(prefix, ".clean.cube");
  const fs::path sparse_path = with_suffix(prefix, ".sparse.cube");
  const fs::path diag_path = with_suffix(prefix, ".diagnostics.csv");
  write_cube(HsiCube(r.clean, y.range), clean_path);
  write_cube(HsiCube(r.sparse, y.range), sparse_path);
  {
    std::ofstream d(diag_path);
    if (!d) throw IoError(diag_path.string() + ": cannot open for writing");
    write_diagnostics_csv(r, d);
  }
  json outputs{{"clean", absolute_string(clean_path)},
               {"sparse", absolute_string(sparse_path)},
               {"diagnostics", absolute_string(diag_path)}};
  json m;
  m["command"] = "denoise";
  m["inputs"] = {{"noisy", absolute_string(a.noisy)}};
  if (a.truth) m["inputs"]["truth"] = absolute_string(*a.truth);
  m["config"] = settings_json(cfg);
  m["seed"] = nullptr;
  m["initial_k"] = r.initial_k;
  if (truth) {
    MetricsReport rep = evaluate(truth->data, r.clean);
    rep.runtime_seconds = r.timings.total;
    const fs::path metrics_path = with_suffix(prefix, ".metrics.csv");
    write_metrics_csv(rep, metrics_path);
    outputs["metrics"] = absolute_string(metrics_path);
    m["metrics"] = {{"mpsnr", std::isinf(rep.mpsnr) ? json("inf") : json(rep.mpsnr)},
                    {"mssim", rep.mssim},
                    {"ergas", rep.ergas},
                    {"msa", rep.msa}};
    log << "MPSNR " << rep.mpsnr << " dB, MSSIM " << rep.mssim << '\n';
  }
  m["outputs"] = outputs;
  m["wall_time_s"] = std::chrono::duration<double>(Clock::now() - t0).count();
  write_manifest(with_suffix(prefix, ".manifest.json"), m);
  log << "wrote " << clean_path.string() << '\n';
  return kExitOk;
}

int metrics_cmd(const std::string& ref_path, const std::string& test_path, const std::string& out,
                std::ostream& log) {
  require_file(ref_path);
  require_file(test_path);
  const HsiCube ref = read_cube(ref_path);
  const HsiCube test = read_cube(test_path);
  if (!(ref.dims() == test.dims())) throw std::runtime_error("metrics: cube dimensions differ");
  const MetricsReport rep = evaluate(ref.data, test.data);
  write_metrics_csv(rep, fs::path(out));
  log << "MPSNR " << rep.mpsnr << " dB, MSSIM " << rep.mssim << ", ERGAS " << rep.ergas << ", MSA " << rep.msa
      << '\n';
  return kExitOk;
}

std::vector<Index> parse_sizes(const std::string& text) {
  std::vector<Index> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      sizes.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw UsageError("bench: bad size '" + item + "'");
    }
  }
  if (sizes.empty()) throw UsageError("bench: --sizes needs at least one size");
  return sizes;
}

int bench(const std::vector<Index>& sizes, Index bands, SolverConfig cfg, std::uint64_t seed,
          const std::string& out, std::ostream& log) {
  // Stage times are compared at a fixed subspace dimension.
  if (cfg.k == 0) cfg.k = std::min<Index>(4, bands);
  std::ofstream csv(out);
  if (!csv) throw IoError(out + ": cannot open for writing");
  csv << "rows,cols,bands,k,groups,subspace_s,matching_s,group_recovery_s,cycles_s,total_s\n";
  csv << std::setprecision(9);
  for (Index n : sizes) {
    const HsiCube clean = make_mixture_cube(n, n, bands, 3, seed);
    const NoisyCube noisy = add_case_noise(clean, NoiseSpec::for_case(1, seed));
    const DenoiseResult r = denoise(noisy.noisy.data, cfg);
    const StageTimings& t = r.timings;
    csv << n << ',' << n << ',' << bands << ',' << cfg.k << ',' << r.groups_per_iteration << ',' << t.subspace
        << ',' << t.matching << ',' << t.group_recovery << ',' << t.cycles << ',' << t.total << '\n';
    log << n << 'x' << n << 'x' << bands << ": " << t.total << " s\n";
  }
  return kExitOk;
}

int replay(const std::string& manifest_path, const std::optional<std::string>& out_override,
           std::optional<int> threads, std::ostream& log) {
  require_file(manifest_path);
  json m;
  try {
    std::ifstream in(manifest_path);
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(manifest_path + ": not a valid manifest (" + e.what() + ")");
  }
  const std::string command = m.value("command", "");
  try {
    if (command == "simulate") {
      SimulateArgs a;
      a.clean = m.at("inputs").at("clean").get<std::string>();
      a.case_id = m.at("case").get<int>();
      a.seed = m.at("seed").get<std::uint64_t>();
      a.out = out_override.value_or(m.at("outputs").at("noisy").get<std::string>());
      return simulate(a, log);
    }
    if (command == "denoise") {
      DenoiseArgs a;
      a.noisy = m.at("inputs").at("noisy").get<std::string>();
      require_file(a.noisy);
      if (m.at("inputs").contains("truth")) a.truth = m["inputs"]["truth"].get<std::string>();
      if (out_override) {
        a.out = *out_override;
      } else {
        std::string clean = m.at("outputs").at("clean").get<std::string>();
        a.out = clean.substr(0, clean.size() - std::string(".clean.cube").size());
      }
      KeyValues kv = settings_from_json(m.at("config"));
      if (threads) {
        std::erase_if(kv, [](const auto& e) { return e.first == "threads"; });
        kv.emplace_back("threads", std::to_string(*threads));
      }
      const SolverConfig cfg = apply_settings({}, kv, static_cast<Index>(read_cube_header(a.noisy).bands));
      return denoise_files(a, cfg, log);
    }
  } catch (const json::exception& e) {
    throw UsageError(manifest_path + ": malformed manifest (" + e.what() + ")");
  }
  throw UsageError(manifest_path + ": cannot replay command '" + command + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-noise hyperspectral denoising"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "add simulated mixed noise to a clean cube");
  sim_cmd->add_option("clean", sim.clean, "clean cube")->required();
  sim_cmd->add_option("--case", sim.case_id, "noise case 1-4")->required();
  sim_cmd->add_option("--seed", sim.seed, "random seed")->required();
  sim_cmd->add_option("--out", sim.out, "noisy cube to write")->required();

  DenoiseArgs den;
  SolverFlags den_flags;
  auto* den_cmd = app.add_subcommand("denoise", "restore a noisy cube");
  den_cmd->add_option("noisy", den.noisy, "noisy cube")->required();
  den_cmd->add_option("--truth", den.truth, "clean reference for metrics");
  den_cmd->add_option("--out", den.out, "output prefix")->required();
  den_flags.attach(*den_cmd);

  std::string m_ref, m_test, m_out;
  auto* met_cmd = app.add_subcommand("metrics", "compare two cubes");
  met_cmd->add_option("ref", m_ref, "reference cube")->required();
  met_cmd->add_option("test", m_test, "test cube")->required();
  met_cmd->add_option("--out", m_out, "CSV report")->required();

  std::string b_sizes, b_out;
  Index b_bands = 16;
  std::uint64_t b_seed = 1;
  SolverFlags b_flags;
  auto* bench_cmd = app.add_subcommand("bench", "time the pipeline stages on synthetic cubes");
  bench_cmd->add_option("--sizes", b_sizes, "comma-separated spatial sizes")->required();
  bench_cmd->add_option("--bands", b_bands, "spectral bands")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", b_seed, "random seed");
  bench_cmd->add_option("--out", b_out, "CSV of stage timings")->required();
  b_flags.attach(*bench_cmd);

  std::string r_manifest;
  std::optional<std::string> r_out;
  std::optional<int> r_threads;
  auto* rep_cmd = app.add_subcommand("replay", "re-run a command from its manifest");
  rep_cmd->add_option("manifest", r_manifest, "manifest JSON")->required();
  rep_cmd->add_option("--out", r_out, "override the output path or prefix");
  rep_cmd->add_option("--threads", r_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim_cmd) return simulate(sim, out);
    if (*den_cmd) {
      require_file(den.noisy);
      if (den.truth) require_file(*den.truth);
      const CubeHeader h = read_cube_header(den.noisy);
      return denoise_files(den, den_flags.resolve(static_cast<Index>(h.bands)), out);
    }
    if (*met_cmd) return metrics_cmd(m_ref, m_test, m_out, out);
    if (*bench_cmd) return bench(parse_sizes(b_sizes), b_bands, b_flags.resolve(b_bands), b_seed, b_out, out);
    if (*rep_cmd) return replay(r_manifest, r_out, r_threads, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace swlrtr
