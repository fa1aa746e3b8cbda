#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kpnp/config.hpp"
#include "kpnp/forward_op.hpp"
#include "kpnp/image.hpp"
#include "kpnp/kernel_denoiser.hpp"
#include "kpnp/solvers.hpp"
#include "kpnp/spectral.hpp"

namespace kpnp {

/// One problem instance: ground truth, operator, measurements and the
/// denoiser built from the guide.
struct Problem {
  Image truth;
  ForwardOp op;
  Vec b;
  Image observed;  // observation on the image grid, for quality reporting
  Image guide;
  KernelDenoiser denoiser;
  double lambda_max = 0.0;  // of A^T A, or D^{-1/2} A^T A D^{-1/2} for scaled_pnp_fista
};

/// Ground truth: the PGM at cfg.image (center-cropped to cfg.size) or the
/// built-in phantom of side cfg.size.
Image load_scene(const ExperimentConfig& cfg);
Problem make_problem(const ExperimentConfig& cfg);

/// Step parameters: gamma is cfg.gamma when set, else gamma_factor / lambda_max.
SolverConfig solver_config(const ExperimentConfig& cfg, const Problem& problem);
Vec initial_iterate(const ExperimentConfig& cfg, const Problem& problem);

/// Runs the configured algorithm. With guide_warmup_iters > 0 the guide is
/// rebuilt from the iterate after each of that many single iterations, then
/// frozen for the main run.
SolverTrace solve(const ExperimentConfig& cfg, const Problem& problem, const MomentumSchedule& schedule,
                  std::span<const double> x0, const TraceOptions& options = {});

/// Full-precision image text file: "rows cols" then one value per line.
void save_limit(const Image& img, const std::filesystem::path& path);
/// Reads save_limit output, or a PGM when the extension is ".pgm".
Image load_limit(const std::filesystem::path& path);

struct RunResult {
  SolverTrace trace;
  double gamma = 0.0;
  double lambda_max = 0.0;
  double psnr_recon = 0.0, psnr_observed = 0.0, psnr_guide = 0.0;
  std::optional<double> ssim_recon, ssim_observed, ssim_guide;  // need min side >= 11
};

/// Writes truth.pgm, observed.pgm, guide.pgm, recon.pgm, trace.csv,
/// limit.txt and summary.txt into cfg.output.
RunResult cmd_run(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& ref_limit = {});

/// One report per grid value: gamma * lambda_max for the PnP algorithms,
/// 1/L for red_apg (lambda fixed by the config). An explicit cfg.gamma
/// replaces the grid with the single value gamma * lambda_max. Writes
/// certify.csv and certify_report.txt.
std::vector<SpectralReport> cmd_certify(const ExperimentConfig& cfg);

struct ScheduleResult {
  MomentumSchedule schedule;
  SolverTrace trace;
  double final_distance = 0.0;  // ||x_k - x*||_2
  double relative_distance = 0.0;
};

/// Reference limit from a beck run of ref_limit_iters iterations (or the
/// file at ref_limit), then one trace per schedule in cfg.schedules, each
/// written to schedule_<name>.csv with dist_to_ref filled in.
std::vector<ScheduleResult> cmd_schedules(const ExperimentConfig& cfg,
                                          const std::optional<std::filesystem::path>& ref_limit = {});

/// One application of the denoiser built from `guide`.
Image denoise(const Image& image, const Image& guide, const KernelParams& params, DenoiserMode mode);
void cmd_denoise(const std::filesystem::path& image, const std::filesystem::path& guide,
                 const KernelParams& params, DenoiserMode mode, const std::filesystem::path& out);

/// File-name safe schedule tag: "chambolle(3)" -> "chambolle_3".
std::string schedule_tag(const MomentumSchedule& schedule);

/// 2 configuration or validation, 3 divergence, 4 I/O, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace kpnp
