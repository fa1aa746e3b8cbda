#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kpnp/guide.hpp"
#include "kpnp/kernel_denoiser.hpp"
#include "kpnp/momentum.hpp"

namespace kpnp {

enum class Algorithm { pnp_fista, red_apg, scaled_pnp_fista };
enum class InitKind { zeros, backprojection, random, guide };

const char* to_string(Algorithm a);
const char* to_string(InitKind k);

/// One experiment, read from a flat "key = value" file ('#' starts a
/// comment). Unknown keys and malformed values raise ConfigError naming the
/// key.
struct ExperimentConfig {
  Task task = Task::inpaint;
  std::string image = "phantom";  // PGM path, or "phantom" for the built-in scene
  std::size_t size = 64;          // center crop (or phantom) side; 0 keeps the full image
  std::uint64_t seed = 1;
  double noise_sigma = 0.03;

  double mask_fraction = 0.3;
  std::size_t blur_size = 25;
  double blur_sigma = 1.6;
  std::string kernel_file;        // overrides blur_size/blur_sigma when set
  std::size_t sr_factor = 2;

  DenoiserMode denoiser = DenoiserMode::dsg;
  KernelParams kernel;

  Algorithm algorithm = Algorithm::pnp_fista;
  MomentumSchedule schedule = MomentumSchedule::beck();
  std::optional<double> gamma;    // absolute step; otherwise gamma_factor / lambda_max
  double gamma_factor = 0.9;
  double lambda = 1.0;
  double L = 2.0;
  int max_iter = 20000;
  double stop_tol = 1e-9;
  double cg_tol = 1e-10;
  int cg_max_iter = 500;
  int guide_warmup_iters = 0;

  InitKind init = InitKind::zeros;
  std::uint64_t init_seed = 9;

  std::vector<double> grid{0.10, 0.25, 0.50, 0.75, 0.90};
  std::vector<MomentumSchedule> schedules{MomentumSchedule::beck(), MomentumSchedule::chambolle(3.0),
                                          MomentumSchedule::log1p(), MomentumSchedule::geometric(),
                                          MomentumSchedule::constant(0.0)};
  int ref_limit_iters = 20000;
  double power_tol = 1e-12;
  int power_max_iter = 200000;

  std::filesystem::path output = "out";

  /// Range checks against the module preconditions.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one "key = value" assignment; used by the parser and for
/// command-line overrides.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace kpnp
