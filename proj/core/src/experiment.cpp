#include "kpnp/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kpnp/errors.hpp"
#include "kpnp/guide.hpp"
#include "kpnp/metrics.hpp"
#include "kpnp/pgm.hpp"
#include "kpnp/rng.hpp"

namespace kpnp {

namespace {

BlurKernel configured_kernel(const ExperimentConfig& cfg) {
  if (!cfg.kernel_file.empty()) return load_kernel(cfg.kernel_file);
  return BlurKernel::gaussian(cfg.blur_size, cfg.blur_sigma);
}

double lambda_max_for(Algorithm algorithm, const ForwardOp& op, const KernelDenoiser& denoiser) {
  if (algorithm != Algorithm::scaled_pnp_fista) return lambda_max_gram(op, 1e-12, 100000).value;
  Vec scaling(op.n());
  for (std::size_t i = 0; i < scaling.size(); ++i) scaling[i] = 1.0 / std::sqrt(denoiser.degrees()[i]);
  return lambda_max_gram(op, 1e-12, 100000, scaling).value;
}

SolverConfig make_solver_config(const ExperimentConfig& cfg, double lambda_max) {
  SolverConfig sc;
  sc.gamma = cfg.gamma ? *cfg.gamma : cfg.gamma_factor / lambda_max;
  sc.lambda = cfg.lambda;
  sc.L = cfg.L;
  sc.max_iter = cfg.max_iter;
  sc.stop_tol = cfg.stop_tol;
  sc.cg_tol = cfg.cg_tol;
  sc.cg_max_iter = cfg.cg_max_iter;
  return sc;
}

SolverTrace run_algorithm(Algorithm algorithm, const ForwardOp& op, std::span<const double> b,
                          const KernelDenoiser& denoiser, const SolverConfig& sc, const MomentumSchedule& schedule,
                          std::span<const double> x0, const TraceOptions& options) {
  switch (algorithm) {
    case Algorithm::pnp_fista: return pnp_fista(op, b, denoiser, sc, schedule, x0, options);
    case Algorithm::red_apg: return red_apg(op, b, denoiser, sc, schedule, x0, options);
    case Algorithm::scaled_pnp_fista: return scaled_pnp_fista(op, b, denoiser, sc, schedule, x0, options);
  }
  throw ParameterError("unknown algorithm");
}

std::optional<double> ssim_if_possible(const Image& x, const Image& ref) {
  if (std::min(x.rows(), x.cols()) < 11) return std::nullopt;
  return ssim(x, ref);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

void prepare_output(const std::filesystem::path& dir) { std::filesystem::create_directories(dir); }

}  // namespace

Image load_scene(const ExperimentConfig& cfg) {
  if (cfg.image == "phantom") {
    const std::size_t side = cfg.size == 0 ? 64 : cfg.size;
    return make_phantom(side, side);
  }
  Image img = load_pgm(cfg.image);
  if (cfg.size == 0) return img;
  return center_crop(img, cfg.size, cfg.size);
}

Problem make_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  Image truth = load_scene(cfg);
  Rng rng(cfg.seed);
  const std::size_t rows = truth.rows(), cols = truth.cols();

  std::optional<ForwardOp> op;
  switch (cfg.task) {
    case Task::inpaint: op.emplace(ForwardOp::inpaint(rows, cols, cfg.mask_fraction, rng)); break;
    case Task::deblur: op.emplace(ForwardOp::blur(rows, cols, configured_kernel(cfg))); break;
    case Task::superres:
      if (cfg.sr_factor < 2) throw ConfigError("config key 'sr_factor': superres needs a factor >= 2");
      if (rows % cfg.sr_factor != 0 || cols % cfg.sr_factor != 0)
        throw ConfigError("config key 'sr_factor': must divide the image size");
      op.emplace(ForwardOp::superres(rows, cols, configured_kernel(cfg), cfg.sr_factor));
      break;
  }
  Vec b = observe(*op, truth, cfg.noise_sigma, rng);
  Image guide = make_guide(cfg.task, b, *op);
  Image observed = cfg.task == Task::deblur     ? Image(rows, cols, b)
                   : cfg.task == Task::superres ? guide
                                                : backprojection(b, *op);
  KernelDenoiser denoiser = build_denoiser(guide, cfg.kernel, cfg.denoiser);
  const double lmax = lambda_max_for(cfg.algorithm, *op, denoiser);
  return Problem{std::move(truth), std::move(*op), std::move(b), std::move(observed),
                 std::move(guide), std::move(denoiser), lmax};
}

SolverConfig solver_config(const ExperimentConfig& cfg, const Problem& problem) {
  return make_solver_config(cfg, problem.lambda_max);
}

Vec initial_iterate(const ExperimentConfig& cfg, const Problem& problem) {
  const std::size_t n = problem.op.n();
  switch (cfg.init) {
    case InitKind::zeros: return Vec(n, 0.0);
    case InitKind::backprojection: return problem.op.adjoint(problem.b);
    case InitKind::random: {
      Rng rng(cfg.init_seed);
      return uniform_vector(rng, n);
    }
    case InitKind::guide: return problem.guide.vec();
  }
  return Vec(n, 0.0);
}

SolverTrace solve(const ExperimentConfig& cfg, const Problem& problem, const MomentumSchedule& schedule,
                  std::span<const double> x0, const TraceOptions& options) {
  if (cfg.guide_warmup_iters == 0)
    return run_algorithm(cfg.algorithm, problem.op, problem.b, problem.denoiser, solver_config(cfg, problem),
                         schedule, x0, options);

  const std::size_t rows = problem.truth.rows(), cols = problem.truth.cols();
  Vec x(x0.begin(), x0.end());
  std::optional<KernelDenoiser> current;
  double lmax = problem.lambda_max;
  for (int i = 0; i < cfg.guide_warmup_iters; ++i) {
    SolverConfig one = make_solver_config(cfg, lmax);
    one.max_iter = 1;
    const KernelDenoiser& w = current ? *current : problem.denoiser;
    x = run_algorithm(cfg.algorithm, problem.op, problem.b, w, one, schedule, x, {}).x;
    current.emplace(build_denoiser(Image(rows, cols, x), cfg.kernel, cfg.denoiser));
    lmax = lambda_max_for(cfg.algorithm, problem.op, *current);
  }
  return run_algorithm(cfg.algorithm, problem.op, problem.b, *current, make_solver_config(cfg, lmax), schedule, x,
                       options);
}

void save_limit(const Image& img, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << img.rows() << ' ' << img.cols() << '\n';
  char buf[32];
  for (double v : img.data()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Image load_limit(const std::filesystem::path& path) {
  if (path.extension() == ".pgm") return load_pgm(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows == 0 || cols == 0) throw FormatError("header", "expected 'rows cols'");
  Vec data(rows * cols);
  for (auto& v : data)
    if (!(in >> v)) throw FormatError("payload", "expected " + std::to_string(rows * cols) + " values");
  return Image(rows, cols, std::move(data));
}

RunResult cmd_run(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& ref_limit) {
  const Problem problem = make_problem(cfg);
  TraceOptions options;
  options.truth = problem.truth;
  if (ref_limit) {
    Image ref = load_limit(*ref_limit);
    if (!ref.same_shape(problem.truth)) throw DimensionError("reference limit does not match the image size");
    options.reference = ref.vec();
  }
  prepare_output(cfg.output);

  RunResult res;
  res.lambda_max = problem.lambda_max;
  res.gamma = solver_config(cfg, problem).gamma;
  res.trace = solve(cfg, problem, cfg.schedule, initial_iterate(cfg, problem), options);

  const Image recon(problem.truth.rows(), problem.truth.cols(), res.trace.x);
  res.psnr_recon = psnr(recon, problem.truth);
  res.psnr_observed = psnr(problem.observed, problem.truth);
  res.psnr_guide = psnr(problem.guide, problem.truth);
  res.ssim_recon = ssim_if_possible(recon, problem.truth);
  res.ssim_observed = ssim_if_possible(problem.observed, problem.truth);
  res.ssim_guide = ssim_if_possible(problem.guide, problem.truth);

  const auto& dir = cfg.output;
  save_pgm(problem.truth, dir / "truth.pgm");
  save_pgm(problem.observed, dir / "observed.pgm");
  save_pgm(problem.guide, dir / "guide.pgm");
  save_pgm(recon, dir / "recon.pgm");
  if (problem.op.kind() == OpKind::inpaint) save_mask(problem.op, dir / "mask.pgm");
  write_trace_csv(res.trace, dir / "trace.csv");
  save_limit(recon, dir / "limit.txt");

  std::ofstream out = open_output(dir / "summary.txt");
  const auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) out << key << " = " << *v << '\n';
  };
  out << "task = " << to_string(cfg.task) << '\n'
      << "algorithm = " << to_string(cfg.algorithm) << '\n'
      << "denoiser = " << to_string(cfg.denoiser) << '\n'
      << "schedule = " << cfg.schedule.name() << '\n'
      << "rows = " << problem.truth.rows() << '\n'
      << "cols = " << problem.truth.cols() << '\n'
      << "lambda_max = " << res.lambda_max << '\n'
      << "gamma = " << res.gamma << '\n'
      << "iterations = " << res.trace.iterations << '\n'
      << "converged = " << (res.trace.converged ? "true" : "false") << '\n'
      << "final_step_norm = " << (res.trace.records.empty() ? 0.0 : res.trace.records.back().step_norm) << '\n'
      << "psnr_recon = " << res.psnr_recon << '\n';
  opt("ssim_recon", res.ssim_recon);
  out << "psnr_observed = " << res.psnr_observed << '\n';
  opt("ssim_observed", res.ssim_observed);
  out << "psnr_guide = " << res.psnr_guide << '\n';
  opt("ssim_guide", res.ssim_guide);
  if (!out) throw IoError("write failed: summary.txt");
  return res;
}

std::vector<SpectralReport> cmd_certify(const ExperimentConfig& cfg) {
  const Problem problem = make_problem(cfg);
  std::vector<double> grid = cfg.grid;
  if (cfg.gamma) {
    if (cfg.algorithm == Algorithm::red_apg) throw ConfigError("config key 'gamma': not used by red_apg");
    grid = {*cfg.gamma * problem.lambda_max};
  }
  CertifyOptions options;
  options.power_tol = cfg.power_tol;
  options.power_max_iter = cfg.power_max_iter;

  std::vector<SpectralReport> reports;
  for (double g : grid) {
    const IterationOperator p = [&] {
      switch (cfg.algorithm) {
        case Algorithm::pnp_fista: return IterationOperator::pnp(problem.op, problem.denoiser, g / problem.lambda_max);
        case Algorithm::scaled_pnp_fista:
          return IterationOperator::scaled_pnp(problem.op, problem.denoiser, g / problem.lambda_max);
        case Algorithm::red_apg:
          break;
      }
      if (g > 1.0) throw ConfigError("config key 'grid': 1/L must lie in (0, 1]");
      return IterationOperator::red(problem.op, problem.denoiser, g / cfg.lambda, g);
    }();
    reports.push_back(certify(p, to_string(cfg.task), g, options));
  }

  prepare_output(cfg.output);
  std::ofstream csv = open_output(cfg.output / "certify.csv");
  csv << SpectralReport::csv_header() << '\n';
  for (const auto& r : reports) csv << r.csv_row() << '\n';
  std::ofstream kv = open_output(cfg.output / "certify_report.txt");
  for (std::size_t i = 0; i < reports.size(); ++i) kv << (i ? "\n" : "") << reports[i].key_value();
  if (!csv || !kv) throw IoError("write failed: certify output");
  return reports;
}

std::string schedule_tag(const MomentumSchedule& schedule) {
  std::string tag;
  for (char c : schedule.name()) {
    if (c == '(' || c == ',') tag += '_';
    else if (c != ')' && c != ' ') tag += c;
  }
  return tag;
}

std::vector<ScheduleResult> cmd_schedules(const ExperimentConfig& cfg,
                                          const std::optional<std::filesystem::path>& ref_limit) {
  const Problem problem = make_problem(cfg);
  const Vec x0 = initial_iterate(cfg, problem);

  Vec reference;
  if (ref_limit) {
    Image ref = load_limit(*ref_limit);
    if (!ref.same_shape(problem.truth)) throw DimensionError("reference limit does not match the image size");
    reference = ref.vec();
  } else {
    ExperimentConfig long_run = cfg;
    long_run.max_iter = cfg.ref_limit_iters;
    long_run.stop_tol = 0.0;
    reference = solve(long_run, problem, MomentumSchedule::beck(), x0).x;
  }
  prepare_output(cfg.output);
  save_limit(Image(problem.truth.rows(), problem.truth.cols(), reference), cfg.output / "reference_limit.txt");

  TraceOptions options;
  options.reference = reference;
  const double ref_norm = norm2(reference);
  std::vector<ScheduleResult> results;
  for (const auto& schedule : cfg.schedules) {
    ScheduleResult r;
    r.schedule = schedule;
    r.trace = solve(cfg, problem, schedule, x0, options);
    r.final_distance = dist2(r.trace.x, reference);
    r.relative_distance = ref_norm > 0.0 ? r.final_distance / ref_norm : r.final_distance;
    write_trace_csv(r.trace, cfg.output / ("schedule_" + schedule_tag(schedule) + ".csv"));
    results.push_back(std::move(r));
  }
  return results;
}

Image denoise(const Image& image, const Image& guide, const KernelParams& params, DenoiserMode mode) {
  if (!image.same_shape(guide)) throw DimensionError("denoise: image and guide sizes differ");
  const KernelDenoiser w = build_denoiser(guide, params, mode);
  return Image(image.rows(), image.cols(), w.apply(image.data()));
}

void cmd_denoise(const std::filesystem::path& image, const std::filesystem::path& guide,
                 const KernelParams& params, DenoiserMode mode, const std::filesystem::path& out) {
  const Image x = load_pgm(image);
  const Image g = load_pgm(guide);
  const Image y = denoise(x, g, params, mode);
  if (out.has_parent_path()) prepare_output(out.parent_path());
  save_pgm(y, out);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e))
    return 2;
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const std::filesystem::filesystem_error*>(&e))
    return 4;
  return 1;
}

}  // namespace kpnp
