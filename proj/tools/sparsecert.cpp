// sparsecert command-line front end.
//
//   sparsecert verify   A.txt --method linf|l2|exact
//   sparsecert cmsv     A.txt --s 5 --method ip|sdr|both
//   sparsecert recover  A.txt y.txt --algorithm bp|ds|lasso [--k 2 ...]
//   sparsecert reproduce --table II --out-dir results
//   sparsecert generate --kind hadamard-first-rows --m 25 --n 256
//
// JSON goes to stdout (or --out); diagnostics to stderr.
// Exit codes: 0 ok, 2 input error, 3 solver failure, 4 size-guard refusal.

#include "sparsecert/cmsv.hpp"
#include "sparsecert/ensembles.hpp"
#include "sparsecert/io.hpp"
#include "sparsecert/recovery.hpp"
#include "sparsecert/reproduce.hpp"
#include "sparsecert/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace sparsecert;

namespace {

enum Exit { kOk = 0, kInput = 2, kSolver = 3, kSizeGuard = 4 };

struct Common {
  double tol = 0.0;  // 0: each solver's default
  int max_iter = 0;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.tol, "solver tolerance (default: per solver)")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", c.max_iter, "solver iteration cap (default: per solver)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "worker threads (fallback: CMSV_THREADS)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "write the JSON report here instead of stdout");
}

// --threads, then CMSV_THREADS, then the OpenMP default.
void apply_threads(const Common& c) {
  int threads = c.threads;
  if (threads == 0) {
    if (const char* env = std::getenv("CMSV_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1 || v > 4096) {
        throw DomainError(std::string("CMSV_THREADS must be a positive integer, got '") + env + "'");
      }
      threads = static_cast<int>(v);
    }
  }
  set_thread_count(threads);
}

LpOptions lp_options(const Common& c) {
  LpOptions o;
  if (c.tol > 0) o.tol = c.tol;
  if (c.max_iter > 0) o.max_iter = c.max_iter;
  return o;
}

SdpOptions sdp_options(const Common& c) {
  SdpOptions o;
  if (c.tol > 0) o.tol = c.tol;
  if (c.max_iter > 0) o.max_iter = c.max_iter;
  return o;
}

void emit(const Common& c, Json j) {
  const std::string text = dump_json(j) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ParseError("cannot open '" + c.out + "' for writing");
  f << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SensingMatrix load_matrix(const std::string& path) { return SensingMatrix(read_matrix(path), false, path); }

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::string matrix;
  std::string method = "linf";
};

int run_verify(const VerifyArgs& a) {
  apply_threads(a.common);
  const SensingMatrix m = load_matrix(a.matrix);
  const auto t0 = std::chrono::steady_clock::now();
  VerificationResult r;
  if (a.method == "exact") {
    ExactOracleOptions o;
    o.lp = lp_options(a.common);
    r = verify_exact(m, o);
  } else {
    VerifyOptions o;
    o.lp = lp_options(a.common);
    o.sdp = sdp_options(a.common);
    r = a.method == "l2" ? verify_l2(m, o) : verify_linf(m, o);
  }
  Json j;
  j["command"] = "verify";
  j["matrix"] = a.matrix;
  j["m"] = m.rows();
  j["n"] = m.cols();
  j["result"] = to_json(r);
  j["wall_time"] = seconds_since(t0);
  emit(a.common, j);
  return kOk;
}

// ---- cmsv -------------------------------------------------------------------

struct CmsvArgs {
  Common common;
  std::string matrix;
  std::string method = "both";
  double s = 1.0;
  int restarts = 50;
  std::uint64_t seed = 0;
};

int run_cmsv(const CmsvArgs& a) {
  apply_threads(a.common);
  const SensingMatrix m = load_matrix(a.matrix);
  const auto t0 = std::chrono::steady_clock::now();
  CmsvEstimate e;
  if (a.method != "sdr") {
    CmsvIpOptions o;
    o.restarts = a.restarts;
    o.seed = a.seed;
    if (a.common.tol > 0) o.kkt_tol = a.common.tol;
    if (a.common.max_iter > 0) o.max_newton = a.common.max_iter;
    e = compute_cmsv_ip(m, a.s, o);
  }
  if (a.method != "ip") {
    CmsvSdrOptions o;
    o.sdp = sdp_options(a.common);
    const CmsvEstimate lower = cmsv_lower_sdr(m, a.s, o);
    if (a.method == "sdr") {
      e = lower;
    } else {
      e.rho_lower = lower.rho_lower;
      e.objective_lower = lower.objective_lower;
      e.relaxation_value = lower.relaxation_value;
    }
  }
  Json j;
  j["command"] = "cmsv";
  j["matrix"] = a.matrix;
  j["method"] = a.method;
  j["result"] = to_json(e);
  if (a.method == "both") j["bracket"] = Json::array({e.rho_lower, e.rho_upper});
  j["wall_time"] = seconds_since(t0);
  emit(a.common, j);
  return kOk;
}

// ---- recover ----------------------------------------------------------------

struct RecoverArgs {
  Common common;
  std::string matrix, y;
  std::string algorithm = "bp";
  double eps = 0.0;
  std::optional<double> lambda_sigma;
  double kappa = 0.5;
  std::optional<Index> k;
  std::string rho_method = "sdr";
  int restarts = 50;
  std::uint64_t seed = 0;
  bool ric = false;
};

// rho_s is constant for s >= n (the l1 constraint is inactive there).
double rho_for(const SensingMatrix& m, double s, const RecoverArgs& a) {
  s = std::min(s, static_cast<double>(m.cols()));
  if (a.rho_method == "ip") {
    CmsvIpOptions o;
    o.restarts = a.restarts;
    o.seed = a.seed;
    return compute_cmsv_ip(m, s, o).rho_upper;
  }
  CmsvSdrOptions o;
  o.sdp = sdp_options(a.common);
  return cmsv_lower_sdr(m, s, o).rho_lower;
}

int run_recover(const RecoverArgs& a) {
  apply_threads(a.common);
  const SensingMatrix m = load_matrix(a.matrix);
  const Vector y = read_vector(a.y);
  if ((a.algorithm == "ds" || a.algorithm == "lasso") && !a.lambda_sigma) {
    throw DomainError("--lambda-sigma is required for " + a.algorithm);
  }
  const auto t0 = std::chrono::steady_clock::now();
  RecoveryResult r;
  if (a.algorithm == "bp") {
    BpOptions o;
    o.lp = lp_options(a.common);
    if (a.common.tol > 0) o.tol = a.common.tol;
    if (a.common.max_iter > 0) o.max_iter = a.common.max_iter;
    r = solve_bp(m, y, a.eps, o);
  } else if (a.algorithm == "ds") {
    r = solve_ds(m, y, *a.lambda_sigma, lp_options(a.common));
  } else {
    LassoOptions o;
    if (a.common.tol > 0) o.tol = a.common.tol;
    if (a.common.max_iter > 0) o.max_sweeps = a.common.max_iter;
    r = solve_lasso(m, y, *a.lambda_sigma, o);
  }
  Json j;
  j["command"] = "recover";
  j["matrix"] = a.matrix;
  j["measurements"] = a.y;
  j["result"] = to_json(r);
  j["bounds"] = nullptr;
  if (a.k && a.rho_method != "none") {
    BoundInputs in;
    in.k = *a.k;
    in.eps = a.eps;
    in.lambda_sigma = a.lambda_sigma.value_or(0.0);
    in.kappa = a.kappa;
    in.rho_source = a.rho_method == "ip" ? RhoSource::IP : RhoSource::SDR;
    const double s_4k = 4.0 * static_cast<double>(in.k);
    const double s_lasso = lasso_sparsity_level(in.k, in.kappa);
    in.rho_4k = rho_for(m, s_4k, a);
    const double n = static_cast<double>(m.cols());
    in.rho_lasso = std::min(s_lasso, n) == std::min(s_4k, n) ? in.rho_4k : rho_for(m, s_lasso, a);
    if (a.ric) {
      const Index n_cols = m.cols();
      in.delta_2k = ric_exact(m, std::min(2 * in.k, n_cols)).delta_k;
      in.delta_3k = ric_exact(m, std::min(3 * in.k, n_cols)).delta_k;
    }
    Json b = to_json(evaluate_bounds(in));
    b["rho_4k"] = in.rho_4k;
    b["rho_lasso"] = in.rho_lasso;
    b["s_4k"] = s_4k;
    b["s_lasso"] = s_lasso;
    if (in.delta_2k) b["delta_2k"] = *in.delta_2k;
    if (in.delta_3k) b["delta_3k"] = *in.delta_3k;
    j["bounds"] = b;
  }
  j["wall_time"] = seconds_since(t0);
  emit(a.common, j);
  return kOk;
}

// ---- reproduce --------------------------------------------------------------

struct ReproduceArgs {
  Common common;
  std::string table;
  ReproduceConfig config;
  int restarts = 0;
  bool no_sdr = false;
  bool quiet = false;
};

int run_reproduce(ReproduceArgs& a) {
  apply_threads(a.common);
  const auto target = parse_repro_target(a.table);
  if (!target) throw DomainError("unknown table '" + a.table + "'");
  ReproduceConfig& c = a.config;
  c.target = *target;
  c.verify.lp = lp_options(a.common);
  c.verify.sdp = sdp_options(a.common);
  if (a.restarts > 0) c.restarts = a.restarts;
  c.sdr = !a.no_sdr;
  if (!a.quiet) c.progress = [](const std::string& line) { std::cerr << line << std::endl; };
  const auto t0 = std::chrono::steady_clock::now();
  const ReproduceReport rep = reproduce(c);
  Json j;
  j["command"] = "reproduce";
  j["table"] = a.table;
  j["files"] = rep.files;
  j["rows"] = rep.rows;
  j["failed_rows"] = rep.failed_rows;
  j["build_id"] = std::string(build_id());
  j["wall_time"] = seconds_since(t0);
  emit(a.common, j);
  return rep.failed_rows == 0 ? kOk : kSolver;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string kind = "gaussian";
  EnsembleSpec spec;
  std::string out;
};

int run_generate(GenerateArgs& a) {
  const auto kind = parse_ensemble_kind(a.kind);
  if (!kind) throw DomainError("unknown ensemble kind '" + a.kind + "'");
  a.spec.kind = *kind;
  const SensingMatrix m = generate(a.spec);
  if (a.out.empty()) {
    std::cout << "# " << m.provenance() << "\n";
    write_matrix_text(std::cout, m.data());
  } else {
    write_matrix(a.out, m.data());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery certificates: null space verification, l1-CMSV estimates, recovery bounds"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "lower bounds on the critical sparsity k*");
  verify->add_option("matrix", va.matrix, "matrix file (text 'm n' header, or .csv)")->required();
  verify->add_option("--method", va.method, "linf, l2 or exact")
      ->check(CLI::IsMember({"linf", "l2", "exact"}));
  add_common(verify, va.common);

  CmsvArgs ca;
  auto* cmsv = app.add_subcommand("cmsv", "l1-constrained minimal singular value rho_s");
  cmsv->add_option("matrix", ca.matrix, "matrix file")->required();
  cmsv->add_option("--s", ca.s, "sparsity level, 1 <= s <= n")->required()->check(CLI::Range(1.0, 1e9));
  cmsv->add_option("--method", ca.method, "ip (upper estimate), sdr (certified lower bound) or both")
      ->check(CLI::IsMember({"ip", "sdr", "both"}));
  cmsv->add_option("--restarts", ca.restarts, "IP restarts")->check(CLI::PositiveNumber);
  cmsv->add_option("--seed", ca.seed, "IP restart seed");
  add_common(cmsv, ca.common);

  RecoverArgs ra;
  auto* recover = app.add_subcommand("recover", "basis pursuit / Dantzig selector / LASSO with error bounds");
  recover->add_option("matrix", ra.matrix, "matrix file")->required();
  recover->add_option("y", ra.y, "measurement vector file, one value per line")->required();
  recover->add_option("--algorithm,--method", ra.algorithm, "bp, ds or lasso")
      ->check(CLI::IsMember({"bp", "ds", "lasso"}));
  recover->add_option("--eps", ra.eps, "BP residual bound ||y - Az||_2 <= eps")->check(CLI::NonNegativeNumber);
  recover->add_option("--lambda-sigma", ra.lambda_sigma, "DS / LASSO parameter lambda_n * sigma")
      ->check(CLI::NonNegativeNumber);
  recover->add_option("--kappa", ra.kappa, "LASSO noise fraction kappa in (0, 1)")->check(CLI::Range(1e-12, 1 - 1e-12));
  recover->add_option("--k", ra.k, "signal sparsity; enables the error-bound report")->check(CLI::PositiveNumber);
  recover->add_option("--rho-method", ra.rho_method, "rho for the bounds: sdr (certified), ip or none")
      ->check(CLI::IsMember({"sdr", "ip", "none"}));
  recover->add_option("--restarts", ra.restarts, "IP restarts for --rho-method ip")->check(CLI::PositiveNumber);
  recover->add_option("--seed", ra.seed, "IP restart seed");
  recover->add_flag("--ric", ra.ric, "also compute delta_2k, delta_3k by enumeration (small n only)");
  add_common(recover, ra.common);

  ReproduceArgs pa;
  auto* repro = app.add_subcommand("reproduce", "regenerate a table or figure as CSV");
  repro->add_option("--table,table", pa.table, "I, II, III, IV, V, fig1 or fig2")
      ->required()
      ->check(CLI::IsMember({"I", "II", "III", "IV", "V", "fig1", "fig2"}));
  repro->add_option("--out-dir", pa.config.out_dir, "output directory");
  repro->add_option("--seed", pa.config.seed, "base seed");
  repro->add_option("--trials", pa.config.trials, "I: matrices per m")->check(CLI::PositiveNumber);
  repro->add_option("--row-subsets", pa.config.row_subsets, "II: random row subsets per m (0 = first rows only)")
      ->check(CLI::NonNegativeNumber);
  repro->add_option("--restarts", pa.restarts, "IP restarts (V, figures)")->check(CLI::PositiveNumber);
  repro->add_option("--s", pa.config.fig1_s, "fig1: sparsity grid")->check(CLI::Range(1.0, 60.0));
  repro->add_option("--m-step", pa.config.fig2_m_step, "fig2: step in m")->check(CLI::PositiveNumber);
  repro->add_flag("--no-sdr", pa.no_sdr, "figures: skip the semidefinite bound");
  repro->add_flag("--allow-large", pa.config.allow_large, "permit table IV (n = 1024)");
  repro->add_flag("--quiet", pa.quiet, "no progress lines on stderr");
  add_common(repro, pa.common);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write a sensing matrix file");
  gen->add_option("--kind", ga.kind, "gaussian, bernoulli, hadamard-first-rows or hadamard-random-rows")
      ->check(CLI::IsMember({"gaussian", "bernoulli", "hadamard-first-rows", "hadamard-random-rows"}));
  gen->add_option("--m", ga.spec.m, "rows")->required()->check(CLI::PositiveNumber);
  gen->add_option("--n", ga.spec.n, "columns")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", ga.spec.seed, "seed");
  gen->add_flag("--normalize", ga.spec.normalize, "scale columns to unit norm");
  gen->add_option("--out", ga.out, "output file (.csv for CSV); default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*verify) return run_verify(va);
    if (*cmsv) return run_cmsv(ca);
    if (*recover) return run_recover(ra);
    if (*repro) return run_reproduce(pa);
    if (*gen) return run_generate(ga);
  } catch (const SizeGuardError& e) {
    std::cerr << "size guard: " << e.what() << "\n";
    return kSizeGuard;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kInput;
}
