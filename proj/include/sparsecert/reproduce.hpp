// Table and figure reproduction runs, written as CSV with a provenance header.
#pragma once

#include "sparsecert/core.hpp"
#include "sparsecert/parallel.hpp"
#include "sparsecert/verify.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sparsecert {

enum class ReproTarget { TableI, TableII, TableIII, TableIV, TableV, Fig1, Fig2 };

// "I" .. "V", "fig1", "fig2".
std::string_view to_string(ReproTarget t);
std::optional<ReproTarget> parse_repro_target(std::string_view name);

// Commit id baked in at configure time ("unknown" outside a git checkout).
std::string_view build_id();

struct ReproduceConfig {
  ReproTarget target = ReproTarget::TableII;
  std::string out_dir = ".";
  std::uint64_t seed = 2011;
  Exec exec = Exec::Parallel;
  VerifyOptions verify;

  int trials = 20;        // I: Bernoulli matrices per m
  int row_subsets = 20;   // II: random row subsets next to the first-rows run; 0 disables
  bool allow_large = false;  // IV (n = 1024) refuses to run without it
  std::optional<int> restarts;  // IP restarts; default 50 for V, 30 for the figures
  bool sdr = true;        // figures: also run the semidefinite lower bound
  std::vector<double> fig1_s{1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20};
  std::vector<double> fig2_s{5, 10, 20};
  Index fig2_m_step = 1;

  std::function<void(const std::string&)> progress;  // optional, one call per finished row
};

struct ReproduceReport {
  std::vector<std::string> files;
  int rows = 0;
  int failed_rows = 0;  // rows whose status is not "ok"
};

// Runs one target and writes <out_dir>/table1.csv, table2.csv, ... (plus a
// *_summary.csv for I and II). Rows that fail record their error in the
// status column; the run continues. Throws SizeGuardError for IV without
// allow_large, DomainError for bad configuration.
ReproduceReport reproduce(const ReproduceConfig& config);

// Expected k lower bounds by m for each table target.
struct ReferenceRow {
  Index m;
  Index k_first;   // I: L2; II / III: L-infinity; IV: L-infinity Hadamard
  Index k_second;  // I: L-infinity; IV: L-infinity Gaussian; unused otherwise
};
const std::vector<ReferenceRow>& table_i_reference();    // n = 40 Bernoulli
const std::vector<ReferenceRow>& table_ii_reference();   // n = 256 Hadamard
const std::vector<ReferenceRow>& table_iii_reference();  // n = 256 Gaussian
const std::vector<ReferenceRow>& table_iv_reference();   // n = 1024

}  // namespace sparsecert
