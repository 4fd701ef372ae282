#include "sparsecert/ensembles.hpp"

#include "sparsecert/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sparsecert {

namespace {

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

bool is_hadamard(EnsembleKind k) {
  return k == EnsembleKind::HadamardFirstRows || k == EnsembleKind::HadamardRandomRows;
}

std::string describe(const EnsembleSpec& s) {
  return std::string(to_string(s.kind)) + " m=" + std::to_string(s.m) +
         " n=" + std::to_string(s.n) + " seed=" + std::to_string(s.seed) +
         (s.normalize ? " normalized" : "");
}

}  // namespace

std::string_view to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::Gaussian: return "gaussian";
    case EnsembleKind::Bernoulli: return "bernoulli";
    case EnsembleKind::HadamardFirstRows: return "hadamard-first-rows";
    case EnsembleKind::HadamardRandomRows: return "hadamard-random-rows";
  }
  return "?";
}

std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name) {
  for (auto k : {EnsembleKind::Gaussian, EnsembleKind::Bernoulli, EnsembleKind::HadamardFirstRows,
                 EnsembleKind::HadamardRandomRows}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void validate(const EnsembleSpec& spec) {
  if (spec.m < 1 || spec.n < 1) {
    throw DomainError("matrix sizes must be positive, got " + std::to_string(spec.m) + " x " +
                      std::to_string(spec.n));
  }
  if (is_hadamard(spec.kind)) {
    if (!is_power_of_two(spec.n)) {
      throw DomainError("Hadamard order must be a power of two, got " + std::to_string(spec.n));
    }
    if (spec.m > spec.n) {
      throw DomainError("cannot take " + std::to_string(spec.m) + " rows of a Hadamard matrix of order " +
                        std::to_string(spec.n));
    }
  }
}

Matrix sylvester_hadamard(Index n) {
  if (!is_power_of_two(n)) throw DomainError("Hadamard order must be a power of two");
  // Entry (i, j) of the Sylvester matrix is (-1)^{popcount(i & j)}.
  Matrix h(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const auto bits = static_cast<std::uint64_t>(i & j);
      h(i, j) = (std::popcount(bits) & 1) ? -1.0 : 1.0;
    }
  }
  return h;
}

std::vector<Index> random_row_subset(Index m, Index n, std::uint64_t seed) {
  if (m < 0 || m > n) throw DomainError("row subset size out of range");
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  Rng rng(seed, 0);
  // Partial Fisher-Yates.
  for (Index i = 0; i < m; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  rows.resize(static_cast<std::size_t>(m));
  std::sort(rows.begin(), rows.end());
  return rows;
}

SensingMatrix generate(const EnsembleSpec& spec) {
  validate(spec);
  Matrix a(spec.m, spec.n);
  switch (spec.kind) {
    case EnsembleKind::Gaussian: {
      Rng rng(spec.seed, 0);
      for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal();
      break;
    }
    case EnsembleKind::Bernoulli: {
      Rng rng(spec.seed, 0);
      for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.sign();
      break;
    }
    case EnsembleKind::HadamardFirstRows:
      a = sylvester_hadamard(spec.n).topRows(spec.m);
      break;
    case EnsembleKind::HadamardRandomRows: {
      const Matrix h = sylvester_hadamard(spec.n);
      const auto rows = random_row_subset(spec.m, spec.n, spec.seed);
      for (Index i = 0; i < spec.m; ++i) a.row(i) = h.row(rows[static_cast<std::size_t>(i)]);
      break;
    }
  }
  SensingMatrix out(std::move(a), false, describe(spec));
  if (!spec.normalize) return out;
  const SensingMatrix scaled = normalize_columns(out);
  return SensingMatrix(scaled.data(), true, describe(spec));
}

std::vector<ConcentrationRow> concentration_study(EnsembleKind kind, Index n, double s,
                                                  const std::vector<Index>& m_grid, int trials,
                                                  std::uint64_t seed,
                                                  const ConcentrationOptions& options) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (!(options.band > 0)) throw DomainError("band must be positive");
  std::vector<ConcentrationRow> table;
  for (const Index m : m_grid) {
    EnsembleSpec spec{kind, m, n, 0, false};
    validate(spec);
    const std::uint64_t row_seed = mix_stream(seed, static_cast<std::uint64_t>(m));
    // Trials run in parallel; each IP call runs its restarts serially.
    const auto rho = map_indices<double>(trials, options.exec, [&](std::ptrdiff_t t) {
      EnsembleSpec ts = spec;
      ts.seed = mix_stream(row_seed, static_cast<std::uint64_t>(t));
      const SensingMatrix raw = generate(ts);
      const SensingMatrix a(raw.data() / std::sqrt(static_cast<double>(m)));
      CmsvIpOptions ip = options.ip;
      ip.restarts = options.restarts;
      ip.seed = ts.seed;
      ip.exec = Exec::Serial;
      try {
        return compute_cmsv_ip(a, s, ip).rho_upper;
      } catch (const SolverError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    });

    ConcentrationRow row;
    row.m = m;
    row.trials = trials;
    row.rho = rho;
    double sum = 0.0, sum_sq = 0.0, sum_rho = 0.0;
    int in_band = 0, ok = 0;
    for (const double r : rho) {
      if (!std::isfinite(r)) {
        ++row.failures;
        continue;
      }
      const double d = std::abs(1.0 - r);
      sum += d;
      sum_sq += d * d;
      sum_rho += r;
      in_band += d <= options.band ? 1 : 0;
      ++ok;
    }
    if (ok > 0) {
      row.mean_deviation = sum / ok;
      row.mean_rho = sum_rho / ok;
      row.band_frequency = static_cast<double>(in_band) / ok;
      if (ok > 1) {
        const double var = std::max(0.0, (sum_sq - ok * row.mean_deviation * row.mean_deviation) / (ok - 1));
        row.standard_error = std::sqrt(var / ok);
      }
    } else {
      row.mean_deviation = row.mean_rho = row.band_frequency = std::numeric_limits<double>::quiet_NaN();
    }
    table.push_back(std::move(row));
  }
  return table;
}

bool concentration_trend_holds(const std::vector<ConcentrationRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (!std::isfinite(a.mean_deviation) || !std::isfinite(b.mean_deviation)) return false;
    const double slack = 2.0 * std::hypot(a.standard_error, b.standard_error);
    if (b.mean_deviation > a.mean_deviation + slack) return false;
  }
  return true;
}

}  // namespace sparsecert
