// Sensing-matrix generators and the Monte Carlo concentration study.
#pragma once

#include "sparsecert/cmsv.hpp"
#include "sparsecert/core.hpp"
#include "sparsecert/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace sparsecert {

enum class EnsembleKind { Gaussian, Bernoulli, HadamardFirstRows, HadamardRandomRows };

std::string_view to_string(EnsembleKind k);
// Accepts the names printed by to_string: gaussian, bernoulli,
// hadamard-first-rows, hadamard-random-rows.
std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  Index m = 1;
  Index n = 1;
  std::uint64_t seed = 0;
  bool normalize = false;
};

// Throws DomainError for nonpositive sizes, and for Hadamard kinds when n is
// not a power of two or m > n.
void validate(const EnsembleSpec& spec);

// Sylvester Hadamard matrix of order n (a power of two):
// H_1 = [1], H_2k = [[H_k, H_k], [H_k, -H_k]].
Matrix sylvester_hadamard(Index n);

// gaussian: iid N(0, 1); bernoulli: iid +-1 with equal probability, both drawn
// from Rng(seed, 0) in column-major order. hadamard-first-rows keeps rows
// 0..m-1 of the Sylvester matrix; hadamard-random-rows keeps a uniformly
// random m-subset (from Rng(seed, 0)), in increasing row order. The same spec
// always gives the same matrix, bit for bit.
SensingMatrix generate(const EnsembleSpec& spec);

// Row indices picked by hadamard-random-rows.
std::vector<Index> random_row_subset(Index m, Index n, std::uint64_t seed);

struct ConcentrationOptions {
  int restarts = 10;     // IP restarts per matrix
  double band = 0.25;    // reports how often rho_s lies in [1 - band, 1 + band]
  Exec exec = Exec::Parallel;
  CmsvIpOptions ip;      // restarts / seed / exec are overridden per trial
};

struct ConcentrationRow {
  Index m = 0;
  int trials = 0;
  int failures = 0;        // solver failures, excluded from the statistics
  double mean_deviation = 0.0;  // mean |1 - rho_s(A / sqrt(m))|
  double standard_error = 0.0;
  double mean_rho = 0.0;
  double band_frequency = 0.0;  // fraction with |1 - rho_s| <= band
  std::vector<double> rho;      // per trial, NaN for failures
};

// For every m draws `trials` matrices of the given kind (m x n), scales them
// by 1/sqrt(m) and estimates rho_s with compute_cmsv_ip. Trial t at row m uses
// the matrix seed mix_stream(mix_stream(seed, m), t).
std::vector<ConcentrationRow> concentration_study(EnsembleKind kind, Index n, double s,
                                                  const std::vector<Index>& m_grid, int trials,
                                                  std::uint64_t seed,
                                                  const ConcentrationOptions& options = {});

// Mean deviation nonincreasing in m up to two standard errors of the
// difference between consecutive rows.
bool concentration_trend_holds(const std::vector<ConcentrationRow>& rows);

}  // namespace sparsecert
