// kpnp: reconstruction, certification and schedule experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "kpnp/config.hpp"
#include "kpnp/errors.hpp"
#include "kpnp/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string ref_limit;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c, bool with_ref, const char* out_help = "output directory") {
  cmd->add_option("--config", c.config, "experiment config file (key = value)");
  cmd->add_option("--gamma", c.gamma, "absolute step size, overrides gamma/gamma_factor");
  cmd->add_option("--seed", c.seed, "seed for mask and noise");
  cmd->add_option("--out", c.out, out_help);
  cmd->add_option("--set", c.sets, "extra key=value assignment, repeatable");
  if (with_ref) cmd->add_option("--ref-limit", c.ref_limit, "reference limit (limit.txt or PGM)");
}

kpnp::ExperimentConfig resolve(const Common& c) {
  kpnp::ExperimentConfig cfg = c.config.empty() ? kpnp::ExperimentConfig{} : kpnp::load_config(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw kpnp::ConfigError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      v.erase(0, v.find_first_not_of(' '));
      v.erase(v.find_last_not_of(' ') + 1);
      return v;
    };
    kpnp::set_config_value(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (c.gamma) cfg.gamma = *c.gamma;
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  cfg.validate();
  return cfg;
}

std::optional<std::filesystem::path> ref_path(const Common& c) {
  if (c.ref_limit.empty()) return std::nullopt;
  return std::filesystem::path(c.ref_limit);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-denoiser plug-and-play reconstruction and convergence certification"};
  app.require_subcommand(1);

  Common run_opts, cert_opts, sched_opts, den_opts;
  auto* run = app.add_subcommand("run", "reconstruct and write recon.pgm, trace.csv, summary.txt");
  add_common(run, run_opts, true);
  auto* cert = app.add_subcommand("certify", "spectral certification sweep over the grid");
  add_common(cert, cert_opts, false);
  auto* sched = app.add_subcommand("schedules", "compare momentum schedules against a reference limit");
  add_common(sched, sched_opts, true);

  auto* den = app.add_subcommand("denoise", "apply the kernel denoiser built from a guide");
  std::string den_image, den_guide;
  add_common(den, den_opts, false, "output PGM (default denoised.pgm)");
  den->add_option("--image", den_image, "input PGM")->required();
  den->add_option("--guide", den_guide, "guide PGM (defaults to the input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      const auto res = kpnp::cmd_run(cfg, ref_path(run_opts));
      std::printf("iterations=%d converged=%s psnr_observed=%.4f psnr_recon=%.4f\n", res.trace.iterations,
                  res.trace.converged ? "true" : "false", res.psnr_observed, res.psnr_recon);
    } else if (*cert) {
      const auto cfg = resolve(cert_opts);
      const auto reports = kpnp::cmd_certify(cfg);
      std::printf("%s\n", kpnp::SpectralReport::csv_header().c_str());
      for (const auto& r : reports) std::printf("%s\n", r.csv_row().c_str());
    } else if (*sched) {
      const auto cfg = resolve(sched_opts);
      for (const auto& r : kpnp::cmd_schedules(cfg, ref_path(sched_opts)))
        std::printf("%s iterations=%d relative_distance=%.3e\n", r.schedule.name().c_str(), r.trace.iterations,
                    r.relative_distance);
    } else if (*den) {
      const auto cfg = resolve(den_opts);
      const std::filesystem::path out =
          den_opts.out.empty() ? std::filesystem::path("denoised.pgm") : std::filesystem::path(den_opts.out);
      kpnp::cmd_denoise(den_image, den_guide.empty() ? den_image : den_guide, cfg.kernel, cfg.denoiser, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "kpnp: " << e.what() << '\n';
    return kpnp::exit_code_for(e);
  }
  return 0;
}
