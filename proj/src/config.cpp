#include "swlrtr/config.hpp"

#include "swlrtr/cube_io.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>

namespace swlrtr {

namespace {

std::string join(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  return msg;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

SolverConfig apply_settings(SolverConfig cfg, const KeyValues& settings, Index bands) {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& key, const std::string& value) {
    problems.push_back("bad value for '" + key + "': '" + value + "'");
  };
  auto as_index = [&](Index& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      long long x = 0;
      if (parse_number(v, x)) dst = static_cast<Index>(x); else bad(key, v);
    };
  };
  auto as_int = [&](int& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      if (!parse_number(v, dst)) bad(key, v);
    };
  };
  auto as_double = [&](double& dst) {
    return [&dst, &bad](const std::string& key, const std::string& v) {
      if (!parse_number(v, dst)) bad(key, v);
    };
  };

  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> handlers{
      {"p", as_index(cfg.patch)},
      {"q", as_index(cfg.q)},
      {"k",
       [&](const std::string& key, const std::string& v) {
         if (v == "auto") {
           cfg.k = 0;
         } else {
           as_index(cfg.k)(key, v);
         }
       }},
      {"lambda1", as_double(cfg.lambda1)},
      {"lambda2", as_double(cfg.lambda2)},
      {"alpha", as_double(cfg.alpha)},
      {"beta", as_double(cfg.beta)},
      {"iters", as_int(cfg.outer_iters)},
      {"inner_iters", as_int(cfg.inner_rounds)},
      {"cycles", as_int(cfg.max_cycles)},
      {"tol", as_double(cfg.tol)},
      {"c", as_double(cfg.c)},
      {"eps", as_double(cfg.eps)},
      {"stride", as_index(cfg.stride)},
      {"window", as_index(cfg.window)},
      {"threads", as_int(cfg.threads)},
      {"noise_level",
       [&](const std::string& key, const std::string& v) {
         if (v == "global") {
           cfg.noise_level = NoiseLevelMode::Global;
         } else if (v == "group") {
           cfg.noise_level = NoiseLevelMode::PerGroup;
         } else {
           bad(key, v);
         }
       }},
      {"ranks",
       [&](const std::string& key, const std::string& v) {
         if (v == "full") {
           cfg.max_ranks = {0, 0, 0};
           return;
         }
         std::array<Index, 3> r{};
         std::size_t pos = 0;
         for (int j = 0; j < 3; ++j) {
           const auto comma = v.find(',', pos);
           const std::string part = v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
           long long x = 0;
           if (!parse_number(part, x) || (j < 2 && comma == std::string::npos) ||
               (j == 2 && comma != std::string::npos)) {
             bad(key, v);
             return;
           }
           r[j] = static_cast<Index>(x);
           pos = comma + 1;
         }
         cfg.max_ranks = r;
       }},
  };

  for (const auto& [key, value] : settings) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
      problems.push_back("unknown key '" + key + "'");
      continue;
    }
    it->second(key, value);
  }
  for (auto& p : cfg.validate(bands)) problems.push_back(std::move(p));
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

SolverConfig load_config(const std::filesystem::path& path, SolverConfig base) {
  return apply_settings(base, read_key_values(path));
}

KeyValues to_settings(const SolverConfig& cfg) {
  return {
      {"p", std::to_string(cfg.patch)},
      {"q", std::to_string(cfg.q)},
      {"k", cfg.k == 0 ? "auto" : std::to_string(cfg.k)},
      {"lambda1", exact(cfg.lambda1)},
      {"lambda2", exact(cfg.lambda2)},
      {"alpha", exact(cfg.alpha)},
      {"beta", exact(cfg.beta)},
      {"iters", std::to_string(cfg.outer_iters)},
      {"inner_iters", std::to_string(cfg.inner_rounds)},
      {"cycles", std::to_string(cfg.max_cycles)},
      {"tol", exact(cfg.tol)},
      {"c", exact(cfg.c)},
      {"eps", exact(cfg.eps)},
      {"stride", std::to_string(cfg.stride)},
      {"window", std::to_string(cfg.window)},
      {"noise_level", cfg.noise_level == NoiseLevelMode::Global ? "global" : "group"},
      {"ranks", std::to_string(cfg.max_ranks[0]) + "," + std::to_string(cfg.max_ranks[1]) + "," +
                    std::to_string(cfg.max_ranks[2])},
      {"threads", std::to_string(cfg.threads)},
  };
}

}  // namespace swlrtr
