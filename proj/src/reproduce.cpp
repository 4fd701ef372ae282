#include "sparsecert/reproduce.hpp"

#include "sparsecert/cmsv.hpp"
#include "sparsecert/ensembles.hpp"
#include "sparsecert/io.hpp"
#include "sparsecert/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#ifndef SPARSECERT_BUILD_ID
#define SPARSECERT_BUILD_ID "unknown"
#endif

namespace sparsecert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string num(double v) { return format_double(v); }
std::string num(Index v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

// CSV file with a '#' provenance block; rows are flushed as they are written
// so an interrupted run leaves every finished row on disk.
class CsvOut {
 public:
  CsvOut(const std::string& path, const ReproduceConfig& c, const std::string& config_line,
         const std::vector<std::string>& header)
      : out_(path), width_(header.size()) {
    if (!out_) throw DomainError("cannot open '" + path + "' for writing");
    out_ << "# sparsecert reproduce target=" << to_string(c.target) << '\n'
         << "# build_id=" << build_id() << '\n'
         << "# seed=" << c.seed << '\n'
         << "# config: " << config_line << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
    out_ << '\n' << std::flush;
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

struct Run {
  const ReproduceConfig& c;
  ReproduceReport report;

  std::string path(const std::string& name) {
    const auto p = (std::filesystem::path(c.out_dir) / name).string();
    report.files.push_back(p);
    return p;
  }

  void done(const std::string& status, const std::string& what) {
    ++report.rows;
    if (status != "ok") ++report.failed_rows;
    if (c.progress) c.progress(what + " " + status);
  }

  VerifyOptions verify_options() const {
    VerifyOptions v = c.verify;
    v.exec = c.exec;
    return v;
  }
};

std::string error_status(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e)) return std::string("solver-error: ") + e.what();
  if (dynamic_cast<const SizeGuardError*>(&e)) return std::string("size-guard: ") + e.what();
  return std::string("error: ") + e.what();
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// ---- Table I: Bernoulli n = 40, L2 and L-infinity ---------------------------

void table_i(Run& r) {
  const auto& c = r.c;
  if (c.trials < 1) throw DomainError("trials must be at least 1");
  CsvOut out(r.path("table1.csv"), c,
             "bernoulli n=40 trials=" + std::to_string(c.trials) +
                 " matrix_seed=mix_stream(mix_stream(seed,m),trial)",
             {"m", "trial", "matrix_seed", "k_l2", "k_linf", "tau_l2", "tau_linf", "time_l2", "time_linf",
              "status"});
  CsvOut summary(r.path("table1_summary.csv"), c, "medians over trials; reference = expected k values",
                 {"m", "trials", "ok", "median_k_l2", "median_k_linf", "reference_k_l2", "reference_k_linf"});
  for (const auto& ref : table_i_reference()) {
    std::vector<double> kl2, kinf;
    int ok = 0;
    for (int t = 0; t < c.trials; ++t) {
      const std::uint64_t seed = mix_stream(mix_stream(c.seed, static_cast<std::uint64_t>(ref.m)),
                                            static_cast<std::uint64_t>(t));
      std::string status = "ok";
      VerificationResult l2, linf;
      try {
        const SensingMatrix a = generate({EnsembleKind::Bernoulli, ref.m, 40, seed, false});
        l2 = verify_l2(a, r.verify_options());
        linf = verify_linf(a, r.verify_options());
        kl2.push_back(static_cast<double>(l2.k_lower));
        kinf.push_back(static_cast<double>(linf.k_lower));
        ++ok;
      } catch (const std::exception& e) {
        status = error_status(e);
      }
      const bool good = status == "ok";
      out.row({num(ref.m), num(t), std::to_string(seed), good ? num(l2.k_lower) : "", good ? num(linf.k_lower) : "",
               good ? num(l2.tau) : "", good ? num(linf.tau) : "", good ? num(l2.runtime) : "",
               good ? num(linf.runtime) : "", status});
      r.done(status, "table I m=" + std::to_string(ref.m) + " trial=" + std::to_string(t));
    }
    summary.row({num(ref.m), num(c.trials), num(ok), num(median(kl2)), num(median(kinf)), num(ref.k_first),
                 num(ref.k_second)});
  }
}

// ---- L-infinity tables (II, III, IV) ----------------------------------------

void linf_row(Run& r, CsvOut& out, const std::vector<std::string>& prefix, const SensingMatrix& a,
              Index reference, const std::string& what, std::vector<double>* k_out = nullptr) {
  std::string status = "ok";
  VerificationResult v;
  try {
    v = verify_linf(a, r.verify_options());
    if (k_out) k_out->push_back(static_cast<double>(v.k_lower));
  } catch (const std::exception& e) {
    status = error_status(e);
    if (k_out) k_out->push_back(kNaN);
  }
  std::vector<std::string> row = prefix;
  const bool good = status == "ok";
  row.insert(row.end(), {good ? num(v.k_lower) : "", reference >= 0 ? num(reference) : "",
                         good ? num(v.tau) : "", good ? num(v.runtime) : "", status});
  out.row(row);
  r.done(status, what);
}

void table_ii(Run& r) {
  const auto& c = r.c;
  if (c.row_subsets < 0) throw DomainError("row_subsets must be >= 0");
  CsvOut out(r.path("table2.csv"), c,
             "hadamard n=256; selection=first-rows, then " + std::to_string(c.row_subsets) +
                 " random row subsets with seed mix_stream(mix_stream(seed,m),subset)",
             {"selection", "subset", "m", "k_linf", "reference_k_linf", "tau", "time", "status"});
  const Matrix h = sylvester_hadamard(256);
  std::vector<std::vector<double>> random_k(table_ii_reference().size());
  std::vector<double> first_k;
  for (std::size_t i = 0; i < table_ii_reference().size(); ++i) {
    const auto& ref = table_ii_reference()[i];
    linf_row(r, out, {"first-rows", "", num(ref.m)}, SensingMatrix(h.topRows(ref.m)), ref.k_first,
             "table II first-rows m=" + std::to_string(ref.m), &first_k);
    for (int t = 0; t < c.row_subsets; ++t) {
      const std::uint64_t seed = mix_stream(mix_stream(c.seed, static_cast<std::uint64_t>(ref.m)),
                                            static_cast<std::uint64_t>(t));
      const SensingMatrix a = generate({EnsembleKind::HadamardRandomRows, ref.m, 256, seed, false});
      linf_row(r, out, {"random-rows", num(t), num(ref.m)}, a, ref.k_first,
               "table II random-rows m=" + std::to_string(ref.m) + " subset=" + std::to_string(t),
               &random_k[i]);
    }
  }
  CsvOut summary(r.path("table2_summary.csv"), c, "reference = expected k values",
                 {"m", "k_first_rows", "random_min", "random_max", "reference_k_linf", "reference_in_band"});
  for (std::size_t i = 0; i < table_ii_reference().size(); ++i) {
    const auto& ref = table_ii_reference()[i];
    double lo = kNaN, hi = kNaN;
    for (double k : random_k[i]) {
      if (!std::isfinite(k)) continue;
      lo = std::isfinite(lo) ? std::min(lo, k) : k;
      hi = std::isfinite(hi) ? std::max(hi, k) : k;
    }
    const bool in_band = std::isfinite(lo) && lo <= ref.k_first && ref.k_first <= hi;
    summary.row({num(ref.m), num(first_k[i]), num(lo), num(hi), num(ref.k_first),
                 c.row_subsets > 0 ? (in_band ? "1" : "0") : ""});
  }
}

// First m rows of one n x n Gaussian draw, raw and column-normalized.
void gaussian_linf_table(Run& r, const std::string& file, Index n, const std::vector<ReferenceRow>& refs,
                         bool second) {
  const auto& c = r.c;
  CsvOut out(r.path(file), c,
             "gaussian n=" + std::to_string(n) + " first m rows of one n x n draw (matrix_seed=seed); "
             "normalized=1 rescales columns to unit norm",
             {"normalized", "m", "k_linf", "reference_k_linf", "tau", "time", "status"});
  const Matrix g = generate({EnsembleKind::Gaussian, n, n, c.seed, false}).data();
  for (const auto& ref : refs) {
    const SensingMatrix raw(g.topRows(ref.m));
    const Index reference = second ? ref.k_second : ref.k_first;
    linf_row(r, out, {"0", num(ref.m)}, raw, reference, file + " m=" + std::to_string(ref.m));
    linf_row(r, out, {"1", num(ref.m)}, normalize_columns(raw), reference,
             file + " normalized m=" + std::to_string(ref.m));
  }
}

void table_iv(Run& r) {
  const auto& c = r.c;
  if (!c.allow_large) {
    throw SizeGuardError("table IV runs 1024 linear programs per row on n = 1024 matrices (hours); "
                         "set allow_large (--allow-large) to run it");
  }
  CsvOut out(r.path("table4.csv"), c, "n=1024; hadamard first rows, gaussian first m rows of one draw",
             {"kind", "m", "k_linf", "reference_k_linf", "tau", "time", "status"});
  const Matrix h = sylvester_hadamard(1024);
  const Matrix g = generate({EnsembleKind::Gaussian, 1024, 1024, c.seed, false}).data();
  for (const auto& ref : table_iv_reference()) {
    linf_row(r, out, {"hadamard", num(ref.m)}, SensingMatrix(h.topRows(ref.m)), ref.k_first,
             "table IV hadamard m=" + std::to_string(ref.m));
    linf_row(r, out, {"gaussian", num(ref.m)}, SensingMatrix(g.topRows(ref.m)), ref.k_second,
             "table IV gaussian m=" + std::to_string(ref.m));
  }
}

// ---- Table V: IP vs SDR on one 20 x 60 Gaussian, s = 5 ----------------------

void table_v(Run& r) {
  const auto& c = r.c;
  const int restarts = c.restarts.value_or(50);
  const double s = 5.0;
  CsvOut out(r.path("table5.csv"), c,
             "gaussian 20x60 matrix_seed=seed s=5 restarts=" + std::to_string(restarts) +
                 "; F read as ||Az||_2 (norm) and ||Az||_2^2 (squared); statistics over converged restarts",
             {"method", "reading", "min_F", "mean_F", "std_F", "mean_time", "converged", "runs", "status"});
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 20, 60, c.seed, false});

  std::string status = "ok";
  CmsvEstimate ip;
  double ip_time = 0.0;
  try {
    CmsvIpOptions o;
    o.restarts = restarts;
    o.seed = c.seed;
    o.exec = c.exec;
    const auto t0 = Clock::now();
    ip = compute_cmsv_ip(a, s, o);
    ip_time = seconds_since(t0) / restarts;
  } catch (const std::exception& e) {
    status = error_status(e);
  }
  for (const bool squared : {false, true}) {
    std::vector<double> f;
    for (Index i = 0; i < ip.per_restart_values.size(); ++i) {
      if (!ip.converged_flags[static_cast<std::size_t>(i)]) continue;
      const double v = std::max(ip.per_restart_values[i], 0.0);
      f.push_back(squared ? v : std::sqrt(v));
    }
    double mn = kNaN, mean = kNaN, sd = kNaN;
    if (!f.empty()) {
      mn = *std::min_element(f.begin(), f.end());
      double sum = 0.0;
      for (double v : f) sum += v;
      mean = sum / static_cast<double>(f.size());
      if (f.size() > 1) {
        double ss = 0.0;
        for (double v : f) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(f.size() - 1));
      }
    }
    out.row({"IP", squared ? "squared" : "norm", num(mn), num(mean), num(sd), num(ip_time),
             num(static_cast<int>(f.size())), num(restarts), status});
    r.done(status, std::string("table V IP ") + (squared ? "squared" : "norm"));
  }

  status = "ok";
  CmsvEstimate sdr;
  double sdr_time = 0.0;
  try {
    const auto t0 = Clock::now();
    sdr = cmsv_lower_sdr(a, s);
    sdr_time = seconds_since(t0);
  } catch (const std::exception& e) {
    status = error_status(e);
  }
  for (const bool squared : {false, true}) {
    const double v = sdr.relaxation_value;
    const double f = squared ? v : std::sqrt(std::max(v, 0.0));
    out.row({"SDR", squared ? "squared" : "norm", num(f), num(f), num(kNaN), num(sdr_time), status == "ok" ? "1" : "0",
             "1", status});
    r.done(status, std::string("table V SDR ") + (squared ? "squared" : "norm"));
  }
}

// ---- Figures: rho_s of normalized first-m-row Bernoulli matrices, n = 60 ----

struct CmsvPoint {
  double rho_ip = kNaN, rho_sdr = kNaN, sdr_value = kNaN;
  std::string status = "ok";
};

CmsvPoint cmsv_point(const Run& r, const SensingMatrix& a, double s, int restarts, std::uint64_t ip_seed) {
  CmsvPoint p;
  std::vector<std::string> errors;
  try {
    CmsvIpOptions o;
    o.restarts = restarts;
    o.seed = ip_seed;
    o.exec = r.c.exec;
    p.rho_ip = compute_cmsv_ip(a, s, o).rho_upper;
  } catch (const std::exception& e) {
    errors.push_back("IP " + error_status(e));
  }
  if (r.c.sdr) {
    try {
      const CmsvEstimate e = cmsv_lower_sdr(a, s);
      p.rho_sdr = e.rho_lower;
      p.sdr_value = e.relaxation_value;
    } catch (const std::exception& e) {
      errors.push_back("SDR " + error_status(e));
    }
  }
  if (!errors.empty()) {
    p.status.clear();
    for (const auto& m : errors) p.status += (p.status.empty() ? "" : "; ") + m;
  }
  return p;
}

Matrix figure_base(const ReproduceConfig& c) {
  return generate({EnsembleKind::Bernoulli, 60, 60, c.seed, false}).data();
}

void figure_1(Run& r) {
  const auto& c = r.c;
  const int restarts = c.restarts.value_or(30);
  CsvOut out(r.path("fig1.csv"), c,
             "bernoulli base 60x60 (matrix_seed=seed); A = first m rows, columns normalized; IP restarts=" +
                 std::to_string(restarts) + " with ip_seed=mix_stream(seed,m) shared across s; sdr=" +
                 (c.sdr ? "1" : "0"),
             {"m", "s", "rho_ip", "rho_sdr", "sdr_relaxation_value", "status"});
  const Matrix b = figure_base(c);
  for (const Index m : {Index{10}, Index{20}, Index{40}}) {
    const SensingMatrix a = normalize_columns(SensingMatrix(b.topRows(m)));
    for (const double s : c.fig1_s) {
      const CmsvPoint p = cmsv_point(r, a, s, restarts, mix_stream(c.seed, static_cast<std::uint64_t>(m)));
      out.row({num(m), num(s), num(p.rho_ip), num(p.rho_sdr), num(p.sdr_value), p.status});
      r.done(p.status, "fig1 m=" + std::to_string(m) + " s=" + num(s));
    }
  }
}

void figure_2(Run& r) {
  const auto& c = r.c;
  const int restarts = c.restarts.value_or(30);
  if (c.fig2_m_step < 1) throw DomainError("fig2 m step must be at least 1");
  CsvOut out(r.path("fig2.csv"), c,
             "bernoulli base 60x60 (matrix_seed=seed); A = first m rows, columns normalized, m from 2s to 60 step " +
                 std::to_string(c.fig2_m_step) + "; IP restarts=" + std::to_string(restarts) +
                 " with ip_seed=mix_stream(seed,m); sdr=" + (c.sdr ? "1" : "0"),
             {"s", "m", "rho_ip", "rho_sdr", "sdr_relaxation_value", "status"});
  const Matrix b = figure_base(c);
  for (const double s : c.fig2_s) {
    if (!(s >= 1.0) || s > 30.0) throw DomainError("fig2 sparsity levels must lie in [1, 30]");
    for (Index m = static_cast<Index>(std::ceil(2 * s)); m <= 60; m += c.fig2_m_step) {
      const SensingMatrix a = normalize_columns(SensingMatrix(b.topRows(m)));
      const CmsvPoint p = cmsv_point(r, a, s, restarts, mix_stream(c.seed, static_cast<std::uint64_t>(m)));
      out.row({num(s), num(m), num(p.rho_ip), num(p.rho_sdr), num(p.sdr_value), p.status});
      r.done(p.status, "fig2 s=" + num(s) + " m=" + std::to_string(m));
    }
  }
}

}  // namespace

std::string_view to_string(ReproTarget t) {
  switch (t) {
    case ReproTarget::TableI: return "I";
    case ReproTarget::TableII: return "II";
    case ReproTarget::TableIII: return "III";
    case ReproTarget::TableIV: return "IV";
    case ReproTarget::TableV: return "V";
    case ReproTarget::Fig1: return "fig1";
    case ReproTarget::Fig2: return "fig2";
  }
  return "?";
}

std::optional<ReproTarget> parse_repro_target(std::string_view name) {
  for (auto t : {ReproTarget::TableI, ReproTarget::TableII, ReproTarget::TableIII, ReproTarget::TableIV,
                 ReproTarget::TableV, ReproTarget::Fig1, ReproTarget::Fig2}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

std::string_view build_id() { return SPARSECERT_BUILD_ID; }

const std::vector<ReferenceRow>& table_i_reference() {
  static const std::vector<ReferenceRow> rows{{20, 1, 1}, {24, 1, 2}, {28, 2, 3}, {32, 2, 3}};
  return rows;
}

const std::vector<ReferenceRow>& table_ii_reference() {
  static const std::vector<ReferenceRow> rows{{25, 1, -1},  {51, 2, -1},  {76, 3, -1},
                                              {102, 4, -1}, {128, 5, -1}, {153, 7, -1},
                                              {179, 9, -1}, {204, 12, -1}, {230, 19, -1}};
  return rows;
}

const std::vector<ReferenceRow>& table_iii_reference() {
  static const std::vector<ReferenceRow> rows{{25, 1, -1},  {51, 2, -1},  {76, 3, -1},
                                              {102, 4, -1}, {128, 4, -1}, {153, 6, -1},
                                              {179, 7, -1}, {204, 10, -1}, {230, 13, -1}};
  return rows;
}

const std::vector<ReferenceRow>& table_iv_reference() {
  static const std::vector<ReferenceRow> rows{{102, 3, 2},  {204, 4, 4},   {307, 6, 6},
                                              {409, 8, 7},  {512, 11, 10}, {614, 14, 12},
                                              {716, 18, 15}, {819, 24, 20}, {921, 37, 29}};
  return rows;
}

ReproduceReport reproduce(const ReproduceConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  Run r{config, {}};
  switch (config.target) {
    case ReproTarget::TableI: table_i(r); break;
    case ReproTarget::TableII: table_ii(r); break;
    case ReproTarget::TableIII: gaussian_linf_table(r, "table3.csv", 256, table_iii_reference(), false); break;
    case ReproTarget::TableIV: table_iv(r); break;
    case ReproTarget::TableV: table_v(r); break;
    case ReproTarget::Fig1: figure_1(r); break;
    case ReproTarget::Fig2: figure_2(r); break;
  }
  return r.report;
}

}  // namespace sparsecert
