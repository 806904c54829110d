#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "uqforge/dram.hpp"
#include "uqforge/gsa.hpp"
#include "uqforge/mc_forward.hpp"
#include "uqforge/multilevel.hpp"
#include "uqforge/options.hpp"
#include "uqforge/output.hpp"
#include "uqforge/problems.hpp"

namespace fs = std::filesystem;
using namespace uqforge;

namespace {

struct RunContext {
  std::string subcommand;
  fs::path options_file;
  OptionSet opts;
  EnvSpec env;
  fs::path out_dir;
  bool have_out_dir = false;
  std::vector<fs::path> manifest;
  std::vector<std::string> summary;
  std::optional<std::ofstream> display;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void note(const std::string& line) {
    summary.push_back(line);
    if (display) *display << line << '\n';
  }
};

fs::path resolve_path(const RunContext& ctx, const std::string& name) {
  fs::path p(name);
  if (ctx.have_out_dir && p.is_relative()) return ctx.out_dir / p;
  return p;
}

std::string fmt(double v, int digits = 6) { return format_double(v, digits); }

void flag_problem_options(RunContext& ctx) {
  const auto& o = ctx.opts;
  if (o.get_flag("ip_mh_tkUseLocalHessian") || o.get_flag("ip_ml_tkUseLocalHessian")) {
    throw UnsupportedOptionError(
        "unsupported option: tkUseLocalHessian (local-Hessian kernels are not implemented)");
  }
  if (o.get_string("ip_ml_restartInput_baseNameForFiles") != "." ||
      o.get_string("ip_ml_restartOutput_baseNameForFiles") != ".") {
    throw UnsupportedOptionError("unsupported option: multilevel restart files are not implemented");
  }
  if (o.get_flag("ip_mh_enableBrooksGelmanConvMonitor")) {
    ctx.note("warning: ip_mh_enableBrooksGelmanConvMonitor accepted and ignored (monitor not implemented)");
  }
  for (const char* key : {"ip_ml_minRejectionRate", "ip_ml_maxRejectionRate", "ip_ml_covRejectionRate"}) {
    if (o.is_set(key)) {
      ctx.note(std::string("warning: ") + key +
               " accepted and ignored (rejection-rate adaptation not implemented)");
    }
  }
  for (const char* key :
       {"ip_mh_displayCandidates", "ip_mh_amKeepInitialMatrix", "ip_mh_rawChainGenerateExtra",
        "ip_mh_rawChainDataInputFileName", "fp_mc_qseq_dataInputFileName"}) {
    if (o.is_set(key)) {
      ctx.note(std::string("warning: ") + key + " accepted and ignored");
    }
  }
}

RunContext make_context(const std::string& subcommand, const std::string& options_file,
                        long long seed_override, bool have_seed, int workers_override,
                        const std::string& out_dir) {
  RunContext ctx;
  ctx.subcommand = subcommand;
  ctx.options_file = options_file;
  ctx.opts = OptionSet::parse_file(options_file);
  if (have_seed) ctx.opts.override_int("env_seed", seed_override);
  if (workers_override > 0) ctx.opts.override_int("env_numSubEnvironments", workers_override);
  if (!out_dir.empty()) {
    ctx.out_dir = out_dir;
    ctx.have_out_dir = true;
  }
  ctx.env = EnvSpec::from_options(ctx.opts);
  for (const auto& w : ctx.opts.warnings()) std::cerr << "options: " << w << '\n';

  EnvSpec display_env = ctx.env;
  if (display_env.display_file_base != ".") {
    display_env.display_file_base = resolve_path(ctx, display_env.display_file_base).string();
  }
  ctx.display = open_display_file(display_env, 0);
  if (ctx.display) {
    const auto path = display_file_path(display_env, 0);
    ctx.manifest.push_back(*path);
    *ctx.display << "uqforge " << subcommand << '\n'
                 << "options file: " << options_file << '\n'
                 << "--- effective options ---\n"
                 << ctx.opts.emit() << "--- run ---\n";
  }
  if (ctx.env.seed >= 0 && ctx.env.num_sub_environments > 1) {
    ctx.note(
        "warning: env_seed >= 0 with multiple sub-environments; all chains will draw identical "
        "samples (use a negative seed for per-rank streams)");
  }
  flag_problem_options(ctx);
  return ctx;
}

int finish(RunContext& ctx) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
  for (const auto& p : ctx.manifest) {
    if (!fs::exists(p)) {
      std::cerr << "error: expected output " << p << " was not written\n";
      return 1;
    }
  }
  std::cout << "subcommand: " << ctx.subcommand << '\n';
  std::cout << "options file: " << ctx.options_file.string() << '\n';
  for (const auto& line : ctx.summary) std::cout << line << '\n';
  std::cout << "outputs:\n";
  for (const auto& p : ctx.manifest) std::cout << "  " << p.string() << '\n';
  std::cout << "wall time: " << fmt(seconds, 3) << " s\n";
  if (ctx.display) *ctx.display << "wall time: " << fmt(seconds, 3) << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// chain emission and diagnostics

void write_chain_set(RunContext& ctx, const std::vector<SampleSequence>& chains,
                     const SampleSequence& unified, const std::string& base_key,
                     const std::string& var_prefix, const std::string& allow_all_key,
                     const std::string& allowed_set_key) {
  const std::string base = ctx.opts.get_string(base_key);
  if (base == ".") return;
  const bool allow_all = allow_all_key.empty() ? false : ctx.opts.get_flag(allow_all_key);
  const auto& allowed = ctx.opts.get_int_set(allowed_set_key);
  for (const auto& chain : chains) {
    const int id = chain.origin_worker();
    if (!allow_all && allowed.count(id) == 0) continue;
    const fs::path p = resolve_path(ctx, sub_file_name(base, id, ".m"));
    write_matrix_file(var_prefix + "_sub" + std::to_string(id), chain.as_matrix(), p);
    ctx.manifest.push_back(p);
  }
  const fs::path unified_path = resolve_path(ctx, base + ".m");
  write_matrix_file(var_prefix + "_unified", unified.as_matrix(), unified_path);
  ctx.manifest.push_back(unified_path);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

// (lag, autocorrelation), (grid, kde) and (grid, cdf) tables per component
void write_sequence_diagnostics(RunContext& ctx, const SampleSequence& seq, const std::string& base,
                                const std::vector<std::string>& names) {
  const int max_lag = std::min<int>(10, static_cast<int>(seq.size()) - 1);
  std::vector<std::string> header = {"lag"};
  std::vector<std::vector<double>> cols;
  std::vector<double> lags(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) lags[static_cast<std::size_t>(k)] = k;
  cols.push_back(lags);
  for (int j = 0; j < seq.dim(); ++j) {
    header.push_back(names[j]);
    cols.push_back(autocorrelation(seq, j, max_lag));
  }
  const fs::path acf = resolve_path(ctx, base + "_autocorrelation.csv");
  write_csv(acf, header, cols);
  ctx.manifest.push_back(acf);

  for (int j = 0; j < seq.dim(); ++j) {
    const std::vector<double> col = seq.column(j);
    const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
    const std::vector<double> grid = linspace(*mn, *mx, 100);
    const fs::path kde = resolve_path(ctx, base + "_kde_" + names[j] + ".csv");
    write_csv(kde, {"grid", "density"}, {grid, gaussian_kde(seq, j, grid)});
    ctx.manifest.push_back(kde);

    std::vector<double> cdf(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) cdf[g] = ecdf(seq, j, grid[g]);
    const fs::path cdfp = resolve_path(ctx, base + "_cdf_" + names[j] + ".csv");
    write_csv(cdfp, {"grid", "cdf"}, {grid, cdf});
    ctx.manifest.push_back(cdfp);
  }
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings runner shared by the DRAM-based subcommands

DramOptions dram_options_from(const OptionSet& o, const Vector& default_m0, const Matrix& default_c0) {
  DramOptions d;
  d.n_pos = o.get_int("ip_mh_rawChainSize");
  d.initial_position = default_m0;
  d.initial_proposal_cov = default_c0;
  if (o.get_string("ip_mh_initialPositionDataInputFileName") != ".") {
    if (o.get_string("ip_mh_initialPositionDataInputFileType") != "m") {
      throw UnsupportedOptionError("only matrix-text (\"m\") input files are supported");
    }
    const Matrix m = read_matrix_file(o.get_string("ip_mh_initialPositionDataInputFileName"));
    d.initial_position = m.row(0).transpose();
  }
  if (o.get_string("ip_mh_initialProposalCovMatrixDataInputFileName") != ".") {
    if (o.get_string("ip_mh_initialProposalCovMatrixDataInputFileType") != "m") {
      throw UnsupportedOptionError("only matrix-text (\"m\") input files are supported");
    }
    d.initial_proposal_cov =
        read_matrix_file(o.get_string("ip_mh_initialProposalCovMatrixDataInputFileName"));
  }
  d.n_stages = 1 + static_cast<int>(o.get_int("ip_mh_drMaxNumExtraStages"));
  d.stage_scales.assign(1, 1.0);
  for (double s : o.get_real_list("ip_mh_drListOfScalesForExtraStages")) d.stage_scales.push_back(s);
  if (static_cast<int>(d.stage_scales.size()) < d.n_stages) {
    throw UqError("ip_mh_drListOfScalesForExtraStages must provide one scale per extra stage");
  }
  // amEta's table default is 1.0; an untouched key falls back to the standard
  // 2.4^2/d scaling instead
  d.s_d = o.is_set("ip_mh_amEta") ? o.get_real("ip_mh_amEta") : 0.0;
  d.epsilon = o.get_real("ip_mh_amEpsilon");
  d.n0 = o.get_int("ip_mh_amInitialNonAdaptInterval");
  d.adapt_interval = o.get_int("ip_mh_amAdaptInterval");
  d.out_of_bounds_in_chain = o.get_flag("ip_mh_putOutOfBoundsInChain");
  return d;
}

struct SipRun {
  std::vector<SampleSequence> chains;
  SampleSequence unified;
  std::vector<double> acceptance;  // per worker
};

SipRun run_sip(RunContext& ctx, const TargetDensity& target, const Vector& m0, const Matrix& c0,
               const std::vector<std::string>& names) {
  const DramOptions base = dram_options_from(ctx.opts, m0, c0);
  const int n_workers = ctx.env.num_sub_environments;

  SipRun run;
  run.chains.resize(n_workers);
  run.acceptance.resize(n_workers);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int rank = 0; rank < n_workers; ++rank) {
    pool.emplace_back([&, rank]() {
      try {
        RngStream rng(static_cast<std::uint64_t>(seed_for_worker(ctx.env.seed, rank)));
        DramResult r = run_dram(target, base, rng);
        r.chain.set_origin_worker(rank);
        run.acceptance[rank] = r.acceptance_rate();
        run.chains[rank] = std::move(r.chain);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  run.unified = unify(run.chains);
  write_chain_set(ctx, run.chains, run.unified, "ip_mh_rawChainDataOutputFileName", "ip_mh_rawChain",
                  "ip_mh_rawChainDataOutputAllowAll", "ip_mh_rawChainDataOutputAllowedSet");
  if (ctx.opts.get_string("ip_mh_rawChainDataOutputFileName") != ".") {
    write_sequence_diagnostics(ctx, run.unified, ctx.opts.get_string("ip_mh_rawChainDataOutputFileName"),
                               names);
  }

  if (ctx.opts.get_flag("ip_mh_filteredChainGenerate")) {
    const FilterSpec spec{ctx.opts.get_real("ip_mh_filteredChainDiscardedPortion"),
                          ctx.opts.get_int("ip_mh_filteredChainLag")};
    std::vector<SampleSequence> filtered;
    for (const auto& c : run.chains) filtered.push_back(filter(c, spec));
    const SampleSequence filt_unified = unify(filtered);
    write_chain_set(ctx, filtered, filt_unified, "ip_mh_filteredChainDataOutputFileName",
                    "ip_mh_filteredChain", "ip_mh_filteredChainDataOutputAllowAll",
                    "ip_mh_filteredChainDataOutputAllowedSet");
    ctx.note("filtered chain: discard " + fmt(spec.discard_portion, 3) + ", lag " +
             std::to_string(spec.lag) + ", length " + std::to_string(filt_unified.size()));
  }

  double acc = 0.0;
  for (double a : run.acceptance) acc += a;
  ctx.note("raw chain: " + std::to_string(run.unified.size()) + " samples over " +
           std::to_string(n_workers) + " worker(s), acceptance " + fmt(acc / n_workers, 4));
  const auto [mean, cov] = mean_and_covariance(run.unified);
  for (int j = 0; j < run.unified.dim(); ++j) {
    ctx.note("posterior " + names[j] + ": mean " + fmt(mean[j]) + ", variance " + fmt(cov(j, j)));
  }
  if (run.unified.dim() > 1) {
    const Matrix corr = correlation_matrix(run.unified);
    ctx.note("posterior correlation(theta1, theta2): " + fmt(corr(0, 1)));
  }
  return run;
}

// ---------------------------------------------------------------------------
// Monte Carlo forward runner for a posterior-chain input

void run_sfp(RunContext& ctx, const SampleSequence& input_chain, const QoiMap& qoi,
             const std::vector<std::string>& param_names, const std::string& qoi_name) {
  const long requested = ctx.opts.get_int("fp_mc_qseq_size");
  if (requested != static_cast<long>(input_chain.size())) {
    ctx.note("notice: fp_mc_qseq_size = " + std::to_string(requested) +
             " overridden to the posterior chain length " + std::to_string(input_chain.size()));
  }
  const PropagateResult result = propagate(input_chain, qoi, ctx.env.num_sub_environments);
  SampleSequence pseq = result.params;
  SampleSequence qseq = result.qois;

  write_chain_set(ctx, {pseq}, pseq, "fp_mc_pseq_dataOutputFileName", "fp_mc_ParamSeq", "",
                  "fp_mc_pseq_dataOutputAllowedSet");
  write_chain_set(ctx, {qseq}, qseq, "fp_mc_qseq_dataOutputFileName", "fp_mc_QoiSeq", "",
                  "fp_mc_qseq_dataOutputAllowedSet");
  if (ctx.opts.get_string("fp_mc_qseq_dataOutputFileName") != ".") {
    write_sequence_diagnostics(ctx, qseq, ctx.opts.get_string("fp_mc_qseq_dataOutputFileName"),
                               {qoi_name});
  }

  const std::vector<double> q = qseq.column(0);
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(q.size());
  double var = 0.0;
  for (double v : q) var += (v - mean) * (v - mean);
  var /= static_cast<double>(q.size() - 1);
  ctx.note("qoi " + qoi_name + ": mean " + fmt(mean) + ", variance " + fmt(var));

  if (ctx.opts.get_flag("fp_computeCovariances") || ctx.opts.get_flag("fp_computeCorrelations")) {
    const JointStats stats = param_qoi_joint_stats(pseq, qseq);
    if (ctx.opts.get_flag("fp_computeCovariances")) {
      ctx.note("param-qoi covariance(" + param_names[0] + ", " + qoi_name + "): " +
               fmt(stats.covariance(0, pseq.dim())));
    }
    if (ctx.opts.get_flag("fp_computeCorrelations")) {
      ctx.note("param-qoi correlation(" + param_names[0] + ", " + qoi_name + "): " +
               fmt(stats.correlation(0, pseq.dim())));
    }
  }
}

// ---------------------------------------------------------------------------
// multilevel runner shared by bimodal and modal

MlOptions ml_options_from(const RunContext& ctx, long mixing_steps) {
  const auto& o = ctx.opts;
  MlOptions m;
  m.n_per_level = o.get_int("ip_ml_rawChainSize");
  m.beta_min = o.get_real("ip_ml_minEffectiveSizeRatio");
  m.beta_max = o.get_real("ip_ml_maxEffectiveSizeRatio");
  m.n_workers = ctx.env.num_sub_environments;
  m.n_stages = 1 + static_cast<int>(o.get_int("ip_ml_drMaxNumExtraStages"));
  m.stage_scales.assign(1, 1.0);
  for (double s : o.get_real_list("ip_ml_drScalesForExtraStages")) m.stage_scales.push_back(s);
  if (static_cast<int>(m.stage_scales.size()) < m.n_stages) {
    throw UqError("ip_ml_drScalesForExtraStages must provide one scale per extra stage");
  }
  // scaleCovMatrix = 0 proposes with the raw weighted covariance
  m.s_d = o.get_flag("ip_ml_scaleCovMatrix")
              ? (o.is_set("ip_ml_amEta") ? o.get_real("ip_ml_amEta") : 0.0)
              : 1.0;
  m.epsilon = o.get_real("ip_ml_amEpsilon");
  m.steps_per_draw = mixing_steps;

  // per-level overrides: ip_ml_<level>_<key> beats the run-wide value
  const OptionSet opts_copy = o;
  m.per_level_adjust = [opts_copy](int level, MlOptions& lo) {
    const auto level_key = [&](const std::string& suffix) {
      return opts_copy.resolve_ml_key(level, suffix);
    };
    lo.n_per_level = opts_copy.get_int(level_key("rawChainSize"));
    lo.n_stages = 1 + static_cast<int>(opts_copy.get_int(level_key("drMaxNumExtraStages")));
    lo.stage_scales.assign(1, 1.0);
    for (double s : opts_copy.get_real_list(level_key("drScalesForExtraStages"))) {
      lo.stage_scales.push_back(s);
    }
    if (static_cast<int>(lo.stage_scales.size()) < lo.n_stages) {
      throw UqError("drScalesForExtraStages must provide one scale per extra stage at level " +
                    std::to_string(level));
    }
    const std::string eta_key = level_key("amEta");
    lo.s_d = opts_copy.get_flag(level_key("scaleCovMatrix"))
                 ? (opts_copy.is_set(eta_key) ? opts_copy.get_real(eta_key) : 0.0)
                 : 1.0;
    lo.epsilon = opts_copy.get_real(level_key("amEpsilon"));
  };
  return m;
}

void emit_ml_outputs(RunContext& ctx, const MlResult& result, const std::vector<std::string>& names) {
  const std::string base = ctx.opts.get_string("ip_ml_rawChainDataOutputFileName");
  if (base != ".") {
    const fs::path p = resolve_path(ctx, base + ".m");
    write_matrix_file("ip_ml_rawChain_unified", result.posterior.as_matrix(), p);
    ctx.manifest.push_back(p);
    write_sequence_diagnostics(ctx, result.posterior, base, names);
  }

  // tau schedule: level, exponent, ESS ratio, evidence increment, acceptance
  std::vector<double> level, tau, ess_ratio, log_c, acceptance;
  for (const auto& rec : result.levels) {
    level.push_back(rec.level);
    tau.push_back(rec.tau);
    ess_ratio.push_back(rec.ess / static_cast<double>(rec.n_total));
    log_c.push_back(rec.log_c);
    acceptance.push_back(rec.acceptance_rate);
  }
  const std::string sched_base = base != "." ? base : std::string("ml_levels");
  const fs::path sched = resolve_path(ctx, sched_base + "_tau_schedule.csv");
  write_csv(sched, {"level", "tau", "ess_ratio", "log_c", "acceptance"},
            {level, tau, ess_ratio, log_c, acceptance});
  ctx.manifest.push_back(sched);

  // per-level raw chains for configured per-level output names, plus KDE
  // tables of every component at every level
  for (const auto& rec : result.levels) {
    if (rec.samples.empty()) continue;
    const std::string level_key = ctx.opts.resolve_ml_key(rec.level, "rawChainDataOutputFileName");
    if (level_key != "ip_ml_rawChainDataOutputFileName") {
      const std::string level_base = ctx.opts.get_string(level_key);
      if (level_base != ".") {
        const fs::path p = resolve_path(ctx, level_base + ".m");
        write_matrix_file("ip_ml_" + std::to_string(rec.level) + "_rawChain_unified",
                          rec.samples.as_matrix(), p);
        ctx.manifest.push_back(p);
      }
    }
    if (base != ".") {
      for (int j = 0; j < rec.samples.dim(); ++j) {
        const std::vector<double> col = rec.samples.column(j);
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        if (!(*mn < *mx)) continue;
        const std::vector<double> grid = linspace(*mn, *mx, 100);
        const fs::path p = resolve_path(
            ctx, base + "_level" + std::to_string(rec.level) + "_kde_" + names[j] + ".csv");
        write_csv(p, {"grid", "density"}, {grid, gaussian_kde(rec.samples, j, grid)});
        ctx.manifest.push_back(p);
      }
    }
  }

  ctx.note("levels: " + std::to_string(result.levels.size() - 1));
  ctx.note("log evidence: " + fmt(result.log_evidence));
  for (const auto& rec : result.levels) {
    if (rec.level == 0) continue;
    ctx.note("  level " + std::to_string(rec.level) + ": tau " + fmt(rec.tau) + ", ESS ratio " +
             fmt(rec.ess / static_cast<double>(rec.n_total), 4) + ", log c " + fmt(rec.log_c) +
             ", acceptance " + fmt(rec.acceptance_rate, 4));
  }
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_sip_simple(RunContext& ctx) {
  const TargetDensity target = problems::simple_sip_posterior();
  const Matrix c0 = 2.88 * Matrix::Identity(2, 2);
  run_sip(ctx, target, Vector::Zero(2), c0, {"theta1", "theta2"});
  return finish(ctx);
}

int cmd_sfp_simple(RunContext& ctx) {
  const long count = ctx.opts.get_int("fp_mc_qseq_size");
  const int workers = ctx.env.num_sub_environments;
  std::vector<SampleSequence> pseqs(workers), qseqs(workers);
  for (int rank = 0; rank < workers; ++rank) {
    RngStream rng(static_cast<std::uint64_t>(seed_for_worker(ctx.env.seed, rank)));
    const PropagateResult r = propagate(problems::simple_sfp_input(), count, problems::sum_qoi(), rng);
    pseqs[rank] = r.params;
    pseqs[rank].set_origin_worker(rank);
    qseqs[rank] = r.qois;
    qseqs[rank].set_origin_worker(rank);
  }
  const SampleSequence pseq = unify(pseqs);
  const SampleSequence qseq = unify(qseqs);

  write_chain_set(ctx, pseqs, pseq, "fp_mc_pseq_dataOutputFileName", "fp_mc_ParamSeq", "",
                  "fp_mc_pseq_dataOutputAllowedSet");
  write_chain_set(ctx, qseqs, qseq, "fp_mc_qseq_dataOutputFileName", "fp_mc_QoiSeq", "",
                  "fp_mc_qseq_dataOutputAllowedSet");
  if (ctx.opts.get_string("fp_mc_qseq_dataOutputFileName") != ".") {
    write_sequence_diagnostics(ctx, qseq, ctx.opts.get_string("fp_mc_qseq_dataOutputFileName"),
                               {"qoi"});
  }

  const std::vector<double> q = qseq.column(0);
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(q.size());
  double var = 0.0;
  for (double v : q) var += (v - mean) * (v - mean);
  var /= static_cast<double>(q.size() - 1);
  ctx.note("qseq: " + std::to_string(qseq.size()) + " samples, mean " + fmt(mean) + ", variance " +
           fmt(var));
  if (ctx.opts.get_flag("fp_computeCorrelations")) {
    const JointStats stats = param_qoi_joint_stats(pseq, qseq);
    ctx.note("param-qoi correlation(theta1, qoi): " + fmt(stats.correlation(0, 2)));
  }
  return finish(ctx);
}

int cmd_gravity(RunContext& ctx, double v0, double alpha, double h0) {
  const TargetDensity target = problems::gravity_posterior();
  const Matrix c0 = Matrix::Identity(1, 1) * 2.5e-3;
  const SipRun sip = run_sip(ctx, target, Vector::Constant(1, 9.5), c0, {"g"});
  if (ctx.opts.get_flag("fp_computeSolution")) {
    run_sfp(ctx, sip.unified, problems::projectile_qoi(v0, alpha, h0), {"g"}, "distance");
  }
  return finish(ctx);
}

int cmd_bimodal(RunContext& ctx, long mixing_steps) {
  const MlOptions opts = ml_options_from(ctx, mixing_steps);
  const MlResult result =
      run_amssa(problems::bimodal_prior(),
                [](const Vector& x) { return problems::bimodal_log_likelihood(x[0]); }, opts,
                static_cast<std::uint64_t>(seed_for_worker(ctx.env.seed, 0)));
  emit_ml_outputs(ctx, result, {"theta"});
  const double mass_low = ecdf(result.posterior, 0, 55.0);
  ctx.note("posterior mass near theta = 10: " + fmt(mass_low, 4));
  ctx.note("posterior mass near theta = 100: " + fmt(1.0 - mass_low, 4));
  return finish(ctx);
}

int cmd_modal(RunContext& ctx, int num_modes, bool beta_prior, long mixing_steps) {
  const MlOptions opts = ml_options_from(ctx, mixing_steps);
  const PriorSpec prior = problems::modal_prior(num_modes, beta_prior);
  const MlResult result = run_amssa(
      prior, [num_modes](const Vector& x) { return problems::modal_log_likelihood(x, num_modes); },
      opts, static_cast<std::uint64_t>(seed_for_worker(ctx.env.seed, 0)));
  emit_ml_outputs(ctx, result, {"theta1", "theta2", "sigma_sq"});
  const auto [mean, cov] = mean_and_covariance(result.posterior);
  for (int j = 0; j < 3; ++j) {
    ctx.note("posterior component " + std::to_string(j + 1) + ": mean " + fmt(mean[j]) +
             ", variance " + fmt(cov(j, j)));
  }
  ctx.note("modes requested: " + std::to_string(num_modes) +
           (beta_prior ? ", uniform x uniform x beta prior" : ", uniform prior"));
  return finish(ctx);
}

int cmd_gsa_line(RunContext& ctx, long n_samples, double x) {
  RngStream rng(static_cast<std::uint64_t>(seed_for_worker(ctx.env.seed, 0)));
  const SensitivityDesign design =
      build_design(problems::line_priors(), n_samples, problems::line_qoi(x), rng);
  const fs::path dir = ctx.have_out_dir ? ctx.out_dir : fs::path("outputData");
  for (const auto& p : write_gsa_files(design, dir, {"m", "c"})) ctx.manifest.push_back(p);

  const std::vector<FirstOrderMethod> fo = {FirstOrderMethod::Sobol1990, FirstOrderMethod::Saltelli2010,
                                            FirstOrderMethod::Jansen1999};
  const std::vector<TotalEffectMethod> te = {TotalEffectMethod::Homma1996, TotalEffectMethod::Sobol2007,
                                             TotalEffectMethod::Jansen1999};
  const std::vector<std::string> names = {"m", "c"};
  std::vector<std::string> header = {"parameter"};
  std::vector<std::vector<double>> cols;
  cols.push_back({1.0, 2.0});
  for (const auto m : fo) {
    header.push_back(std::string("S_") + method_name(m));
    std::vector<double> v;
    for (int i = 0; i < 2; ++i) v.push_back(first_order(m, design, i).raw);
    cols.push_back(v);
  }
  for (const auto m : te) {
    header.push_back(std::string("T_") + method_name(m));
    std::vector<double> v;
    for (int i = 0; i < 2; ++i) v.push_back(total_effect(m, design, i).raw);
    cols.push_back(v);
  }
  const fs::path indices = dir / "sensitivity_indices.csv";
  write_csv(indices, header, cols);
  ctx.manifest.push_back(indices);

  for (int i = 0; i < 2; ++i) {
    ctx.note("S(" + names[i] + "): sobol1990 " + fmt(first_order(fo[0], design, i).raw, 4) +
             ", saltelli2010 " + fmt(first_order(fo[1], design, i).raw, 4) + ", jansen1999 " +
             fmt(first_order(fo[2], design, i).raw, 4));
    ctx.note("T(" + names[i] + "): homma1996 " + fmt(total_effect(te[0], design, i).raw, 4) +
             ", sobol2007 " + fmt(total_effect(te[1], design, i).raw, 4) + ", jansen1999 " +
             fmt(total_effect(te[2], design, i).raw, 4));
  }

  // convergence sweep over nested prefixes of the same design
  std::vector<double> sweep_n, sm_sobol, sm_saltelli, sc_sobol, sc_saltelli, tm_jansen, tc_jansen;
  for (long n = 500;; n *= 2) {
    const long use = std::min(n, n_samples);
    const SensitivityDesign h = design.head(use);
    sweep_n.push_back(static_cast<double>(use));
    sm_sobol.push_back(first_order(FirstOrderMethod::Sobol1990, h, 0).raw);
    sm_saltelli.push_back(first_order(FirstOrderMethod::Saltelli2010, h, 0).raw);
    sc_sobol.push_back(first_order(FirstOrderMethod::Sobol1990, h, 1).raw);
    sc_saltelli.push_back(first_order(FirstOrderMethod::Saltelli2010, h, 1).raw);
    tm_jansen.push_back(total_effect(TotalEffectMethod::Jansen1999, h, 0).raw);
    tc_jansen.push_back(total_effect(TotalEffectMethod::Jansen1999, h, 1).raw);
    if (use >= n_samples) break;
  }
  const fs::path sweep = dir / "sensitivity_convergence.csv";
  write_csv(sweep,
            {"N", "S_m_sobol1990", "S_m_saltelli2010", "S_c_sobol1990", "S_c_saltelli2010",
             "T_m_jansen1999", "T_c_jansen1999"},
            {sweep_n, sm_sobol, sm_saltelli, sc_sobol, sc_saltelli, tm_jansen, tc_jansen});
  ctx.manifest.push_back(sweep);
  ctx.note("design: N = " + std::to_string(n_samples) + ", x = " + fmt(x, 4) +
           ", sample files: " + std::to_string(2 * 2 + 2));
  return finish(ctx);
}

int cmd_validate(const std::string& options_file) {
  const OptionSet opts = OptionSet::parse_file(options_file);
  std::cout << opts.emit();
  for (const auto& w : opts.warnings()) std::cerr << "warning: " << w << '\n';
  std::cout << "ok: " << options_file << " parsed with " << opts.warnings().size() << " warning(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uqforge - statistical inverse/forward problems, multilevel sampling and sensitivity analysis"};
  app.require_subcommand(1);

  std::string options_file;
  long long seed = 0;
  int workers = 0;
  std::string out_dir;
  long n_samples = 25000;
  double x = 2.0;
  int modes = 1;
  bool beta_prior = false;
  long mixing_steps = 8;
  double v0 = 5.0, alpha = M_PI / 4.0, h0 = 0.0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("options-file", options_file, "input options file")->required();
    sub->add_option("--seed", seed, "override env_seed");
    sub->add_option("--workers", workers, "override env_numSubEnvironments");
    sub->add_option("--out-dir", out_dir, "directory to re-root relative output paths");
  };

  CLI::App* sip = app.add_subcommand("sip-simple", "two-parameter Gaussian inverse problem");
  add_common(sip);
  CLI::App* sfp = app.add_subcommand("sfp-simple", "forward propagation of theta1 + theta2");
  add_common(sfp);
  CLI::App* gravity = app.add_subcommand("gravity", "free-fall calibration plus projectile propagation");
  add_common(gravity);
  gravity->add_option("--v0", v0, "projectile launch speed");
  gravity->add_option("--alpha", alpha, "projectile launch angle (radians)");
  gravity->add_option("--h0", h0, "projectile launch height");
  CLI::App* bimodal = app.add_subcommand("bimodal", "multilevel sampling of a two-mode target");
  add_common(bimodal);
  bimodal->add_option("--mixing-steps", mixing_steps, "MH sweeps behind each emitted sample");
  CLI::App* modal = app.add_subcommand("modal", "multilevel sampling of the three-parameter modal target");
  add_common(modal);
  modal->add_option("--modes", modes, "number of modes (1 or 2)")->check(CLI::Range(1, 2));
  modal->add_flag("--beta-prior", beta_prior, "use the beta prior variant for sigma^2");
  modal->add_option("--mixing-steps", mixing_steps, "MH sweeps behind each emitted sample");
  CLI::App* gsa = app.add_subcommand("gsa-line", "sensitivity indices of the straight line y = m x + c");
  add_common(gsa);
  gsa->add_option("--n-samples", n_samples, "design rows per matrix")->check(CLI::PositiveNumber);
  gsa->add_option("--x", x, "abscissa at which the line is evaluated");
  CLI::App* validate = app.add_subcommand("validate-options", "parse an options file and print it");
  validate->add_option("options-file", options_file, "input options file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(options_file);
    CLI::App* sub = app.get_subcommands().front();
    const bool have_seed = sub->count("--seed") > 0;
    RunContext ctx = make_context(sub->get_name(), options_file, seed, have_seed, workers, out_dir);
    if (sip->parsed()) return cmd_sip_simple(ctx);
    if (sfp->parsed()) return cmd_sfp_simple(ctx);
    if (gravity->parsed()) return cmd_gravity(ctx, v0, alpha, h0);
    if (bimodal->parsed()) return cmd_bimodal(ctx, mixing_steps);
    if (modal->parsed()) return cmd_modal(ctx, modes, beta_prior, mixing_steps);
    if (gsa->parsed()) return cmd_gsa_line(ctx, n_samples, x);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
