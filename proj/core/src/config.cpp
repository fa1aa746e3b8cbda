#include "kpnp/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "kpnp/errors.hpp"

namespace kpnp {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::pnp_fista: return "pnp_fista";
    case Algorithm::red_apg: return "red_apg";
    case Algorithm::scaled_pnp_fista: return "scaled_pnp_fista";
  }
  return "?";
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::zeros: return "zeros";
    case InitKind::backprojection: return "backprojection";
    case InitKind::random: return "random";
    case InitKind::guide: return "guide";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const long long d = to_integer(key, v);
  if (d < 0) throw ConfigError("config key '" + key + "': must be >= 0");
  return static_cast<std::size_t>(d);
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_integer(key, v)); }

std::vector<std::string> split_list(const std::string& v) {
  // Commas inside parentheses belong to the item.
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : v) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

template <class E>
E pick(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, value] : options)
    if (v == name) return value;
  std::string allowed;
  for (const auto& [name, value] : options) allowed += std::string(allowed.empty() ? "" : "|") + name;
  throw ConfigError("config key '" + key + "': expected one of " + allowed + ", got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"task", [](auto& c, auto& k, auto& v) {
         c.task = pick<Task>(k, v, {{"inpaint", Task::inpaint}, {"deblur", Task::deblur}, {"superres", Task::superres}});
       }},
      {"image", [](auto& c, auto&, auto& v) { c.image = v; }},
      {"size", [](auto& c, auto& k, auto& v) { c.size = to_size(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_size(k, v)); }},
      {"noise_sigma", [](auto& c, auto& k, auto& v) { c.noise_sigma = to_double(k, v); }},
      {"mask_fraction", [](auto& c, auto& k, auto& v) { c.mask_fraction = to_double(k, v); }},
      {"blur_size", [](auto& c, auto& k, auto& v) { c.blur_size = to_size(k, v); }},
      {"blur_sigma", [](auto& c, auto& k, auto& v) { c.blur_sigma = to_double(k, v); }},
      {"kernel_file", [](auto& c, auto&, auto& v) { c.kernel_file = v; }},
      {"sr_factor", [](auto& c, auto& k, auto& v) { c.sr_factor = to_size(k, v); }},
      {"denoiser", [](auto& c, auto& k, auto& v) {
         c.denoiser = pick<DenoiserMode>(k, v, {{"nlm", DenoiserMode::nlm}, {"dsg", DenoiserMode::dsg}});
       }},
      {"patch_radius", [](auto& c, auto& k, auto& v) { c.kernel.patch_radius = to_int(k, v); }},
      {"window_radius", [](auto& c, auto& k, auto& v) { c.kernel.window_radius = to_int(k, v); }},
      {"bandwidth", [](auto& c, auto& k, auto& v) { c.kernel.bandwidth = to_double(k, v); }},
      {"window_shape", [](auto& c, auto& k, auto& v) {
         c.kernel.window = pick<WindowShape>(k, v, {{"box", WindowShape::box}, {"hat", WindowShape::hat}});
       }},
      {"algorithm", [](auto& c, auto& k, auto& v) {
         c.algorithm = pick<Algorithm>(k, v, {{"pnp_fista", Algorithm::pnp_fista}, {"red_apg", Algorithm::red_apg},
                                              {"scaled_pnp_fista", Algorithm::scaled_pnp_fista}});
       }},
      {"schedule", [](auto& c, auto&, auto& v) { c.schedule = MomentumSchedule::parse(v); }},
      {"gamma", [](auto& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"gamma_factor", [](auto& c, auto& k, auto& v) { c.gamma_factor = to_double(k, v); }},
      {"lambda", [](auto& c, auto& k, auto& v) { c.lambda = to_double(k, v); }},
      {"L", [](auto& c, auto& k, auto& v) { c.L = to_double(k, v); }},
      {"max_iter", [](auto& c, auto& k, auto& v) { c.max_iter = to_int(k, v); }},
      {"stop_tol", [](auto& c, auto& k, auto& v) { c.stop_tol = to_double(k, v); }},
      {"cg_tol", [](auto& c, auto& k, auto& v) { c.cg_tol = to_double(k, v); }},
      {"cg_max_iter", [](auto& c, auto& k, auto& v) { c.cg_max_iter = to_int(k, v); }},
      {"guide_warmup_iters", [](auto& c, auto& k, auto& v) { c.guide_warmup_iters = to_int(k, v); }},
      {"init", [](auto& c, auto& k, auto& v) {
         c.init = pick<InitKind>(k, v, {{"zeros", InitKind::zeros}, {"backprojection", InitKind::backprojection},
                                        {"random", InitKind::random}, {"guide", InitKind::guide}});
       }},
      {"init_seed", [](auto& c, auto& k, auto& v) { c.init_seed = static_cast<std::uint64_t>(to_size(k, v)); }},
      {"grid", [](auto& c, auto& k, auto& v) {
         c.grid.clear();
         for (const auto& item : split_list(v)) c.grid.push_back(to_double(k, item));
       }},
      {"schedules", [](auto& c, auto&, auto& v) {
         c.schedules.clear();
         for (const auto& item : split_list(v)) c.schedules.push_back(MomentumSchedule::parse(item));
       }},
      {"ref_limit_iters", [](auto& c, auto& k, auto& v) { c.ref_limit_iters = to_int(k, v); }},
      {"power_tol", [](auto& c, auto& k, auto& v) { c.power_tol = to_double(k, v); }},
      {"power_max_iter", [](auto& c, auto& k, auto& v) { c.power_max_iter = to_int(k, v); }},
      {"output", [](auto& c, auto&, auto& v) { c.output = v; }},
  };
  return table;
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (image.empty()) fail("image", "must not be empty");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma", "must be >= 0");
  if (!(mask_fraction > 0.0 && mask_fraction <= 1.0)) fail("mask_fraction", "must lie in (0, 1]");
  if (blur_size % 2 == 0) fail("blur_size", "must be odd");
  if (!(blur_sigma > 0.0)) fail("blur_sigma", "must be positive");
  if (sr_factor < 1) fail("sr_factor", "must be >= 1");
  if (kernel.patch_radius < 0) fail("patch_radius", "must be >= 0");
  if (kernel.window_radius < 1) fail("window_radius", "must be >= 1");
  if (!(kernel.bandwidth > 0.0)) fail("bandwidth", "must be positive");
  if (gamma && !(*gamma > 0.0)) fail("gamma", "must be positive");
  if (!(gamma_factor > 0.0)) fail("gamma_factor", "must be positive");
  if (!(lambda > 0.0)) fail("lambda", "must be positive");
  if (!(L >= 1.0)) fail("L", "must be >= 1");
  if (max_iter < 1) fail("max_iter", "must be >= 1");
  if (!(stop_tol >= 0.0)) fail("stop_tol", "must be >= 0");
  if (!(cg_tol > 0.0)) fail("cg_tol", "must be positive");
  if (cg_max_iter < 1) fail("cg_max_iter", "must be >= 1");
  if (guide_warmup_iters < 0) fail("guide_warmup_iters", "must be >= 0");
  if (grid.empty()) fail("grid", "must not be empty");
  for (double g : grid)
    if (!(g > 0.0)) fail("grid", "values must be positive");
  if (schedules.empty()) fail("schedules", "must not be empty");
  if (ref_limit_iters < 1) fail("ref_limit_iters", "a reference limit needs at least one iteration");
  if (!(power_tol > 0.0)) fail("power_tol", "must be positive");
  if (power_max_iter < 1) fail("power_max_iter", "must be >= 1");
  if (algorithm == Algorithm::scaled_pnp_fista && denoiser != DenoiserMode::nlm)
    fail("denoiser", "scaled_pnp_fista requires denoiser = nlm");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    set_config_value(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace kpnp
