#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cagefit/corpus.hpp"
#include "cagefit/descent.hpp"
#include "cagefit/errors.hpp"
#include "cagefit/evolution.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/hybrid.hpp"
#include "cagefit/sampling.hpp"

namespace cagefit {

enum class Algorithm { NR, LM, DNR, GA, NRGA, LMGA, DNRGA };

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 7>
    kAlgorithmNames{{{Algorithm::NR, "nr"},
                     {Algorithm::LM, "lm"},
                     {Algorithm::DNR, "dnr"},
                     {Algorithm::GA, "ga"},
                     {Algorithm::NRGA, "nrga"},
                     {Algorithm::LMGA, "lmga"},
                     {Algorithm::DNRGA, "dnrga"}}};

inline std::string_view algorithm_name(Algorithm a) {
  for (const auto& [alg, name] : kAlgorithmNames) {
    if (alg == a) return name;
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& [alg, name] : kAlgorithmNames) {
    if (lower == name) return alg;
  }
  return std::nullopt;
}

struct SyntheticSpec {
  int count = 0;
  std::uint64_t seed = 0;
  Standard standard = Standard::IEC;
  SyntheticWindows windows{};
};

/// A full batch-run description. Exactly one corpus source must be set.
/// The descent block configures NR/LM/DNR directly and serves as the inner
/// solver of the hybrids; the hybrid block's own inner settings are
/// overwritten from it, so one config drives both halves consistently.
struct RunConfig {
  Algorithm algorithm = Algorithm::DNRGA;
  DescentConfig descent{};
  GaConfig ga{};
  HybridConfig hybrid{};
  std::optional<std::string> corpus_path;
  std::optional<SyntheticSpec> synthetic;
  std::string out_path;  // empty: don't persist
  ResultFormat out_format = ResultFormat::Csv;
  int parallelism = 1;
  std::uint64_t seed = 0;
};

struct StatsCell {
  std::size_t n_motors = 0;
  std::size_t n_converged = 0;
  double convergence_rate = std::numeric_limits<double>::quiet_NaN();
  double avg_squared_error = std::numeric_limits<double>::quiet_NaN();
  double max_squared_error = std::numeric_limits<double>::quiet_NaN();
};

/// Convergence and error aggregates per standard, overall and by power
/// band, plus corpus-wide wall-clock timing of the solve calls. Aggregates
/// of an empty group are NaN (null in JSON); error aggregates skip motors
/// whose squared error came out non-finite.
struct CorpusStats {
  struct Group {
    StatsCell overall;
    std::array<StatsCell, 6> by_band;
  };
  std::string algorithm;
  Group iec;
  Group nema;
  StatsCell total;
  double avg_solution_s = std::numeric_limits<double>::quiet_NaN();
  double max_solution_s = std::numeric_limits<double>::quiet_NaN();
};

struct BatchResult {
  std::vector<TimedOutcome> outcomes;
  CorpusStats stats;
};

// ---------------------------------------------------------------------------
// Single-motor dispatch

/// FNV-1a of the id mixed into the run seed: reproducible per motor and
/// independent of corpus order or scheduling.
inline std::uint64_t motor_seed(std::uint64_t run_seed, const std::string& id) {
  return derive_seed(run_seed, fnv1a64(id));
}

namespace detail {

inline DescentConfig seeded_descent(DescentConfig cfg, std::uint64_t seed) {
  if (cfg.initial_guess.kind == GuessKind::Sample) cfg.initial_guess.seed = seed;
  return cfg;
}

}  // namespace detail

/// Runs one motor under the configured algorithm with a per-motor seed.
inline SolveOutcome solve_motor(const TargetVector& targets, const RunConfig& cfg,
                                std::uint64_t seed) {
  switch (cfg.algorithm) {
    case Algorithm::NR:
      return solve_descent(DescentAlgorithm::NR, targets,
                           detail::seeded_descent(cfg.descent, seed));
    case Algorithm::LM:
      return solve_descent(DescentAlgorithm::LM, targets,
                           detail::seeded_descent(cfg.descent, seed));
    case Algorithm::DNR:
      return solve_descent(DescentAlgorithm::DNR, targets,
                           detail::seeded_descent(cfg.descent, seed));
    case Algorithm::GA: {
      GaConfig ga = cfg.ga;
      ga.seed = seed;
      return solve_ga(targets, ga);
    }
    case Algorithm::NRGA:
    case Algorithm::LMGA:
    case Algorithm::DNRGA: {
      HybridConfig h = cfg.hybrid;
      h.inner = cfg.algorithm == Algorithm::NRGA   ? DescentAlgorithm::NR
                : cfg.algorithm == Algorithm::LMGA ? DescentAlgorithm::LM
                                                   : DescentAlgorithm::DNR;
      h.inner_cfg = detail::seeded_descent(cfg.descent, derive_seed(seed, 1));
      h.seed = seed;
      return solve_hybrid(targets, h).outcome;
    }
  }
  throw ValidationError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// Aggregation

namespace detail {

inline void finish_cell(StatsCell& c, double err_sum, double err_max,
                        std::size_t err_n) {
  if (c.n_motors > 0) {
    c.convergence_rate =
        static_cast<double>(c.n_converged) / static_cast<double>(c.n_motors);
  }
  if (err_n > 0) {
    c.avg_squared_error = err_sum / static_cast<double>(err_n);
    c.max_squared_error = err_max;
  }
}

struct CellAccum {
  StatsCell cell;
  double err_sum = 0;
  double err_max = 0;
  std::size_t err_n = 0;

  void add(bool converged, double squared_error) {
    ++cell.n_motors;
    if (converged) ++cell.n_converged;
    if (std::isfinite(squared_error)) {
      err_sum += squared_error;
      if (err_n == 0 || squared_error > err_max) err_max = squared_error;
      ++err_n;
    }
  }
  StatsCell finish() {
    finish_cell(cell, err_sum, err_max, err_n);
    return cell;
  }
};

}  // namespace detail

/// Aggregates already-computed outcomes; folding the persisted per-motor
/// rows back through this function reproduces a batch's stats exactly.
inline CorpusStats compute_stats(const std::vector<MotorRecord>& records,
                                 const std::vector<TimedOutcome>& outcomes,
                                 const std::string& algorithm) {
  if (records.size() != outcomes.size()) {
    throw ValidationError("records and outcomes differ in length");
  }
  detail::CellAccum total;
  std::array<detail::CellAccum, 2> overall;                    // [IEC, NEMA]
  std::array<std::array<detail::CellAccum, 6>, 2> by_band{};
  double time_sum = 0, time_max = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t g = records[i].standard == Standard::IEC ? 0 : 1;
    const bool conv = outcomes[i].outcome.converged;
    const double err = outcomes[i].outcome.squared_error;
    total.add(conv, err);
    overall[g].add(conv, err);
    by_band[g][band_index(records[i].plate.p_m_fl / 1000.0)].add(conv, err);
    const double s = outcomes[i].wall_ms / 1000.0;
    time_sum += s;
    if (s > time_max) time_max = s;
  }

  CorpusStats stats;
  stats.algorithm = algorithm;
  stats.total = total.finish();
  stats.iec.overall = overall[0].finish();
  stats.nema.overall = overall[1].finish();
  for (std::size_t b = 0; b < 6; ++b) {
    stats.iec.by_band[b] = by_band[0][b].finish();
    stats.nema.by_band[b] = by_band[1][b].finish();
  }
  if (!records.empty()) {
    stats.avg_solution_s = time_sum / static_cast<double>(records.size());
    stats.max_solution_s = time_max;
  }
  return stats;
}

/// Rebuilds outcome fields from persisted rows so stats can be recomputed
/// from a results file. Rows must match the corpus one-to-one by id.
inline std::vector<TimedOutcome> outcomes_from_rows(
    const std::vector<MotorRecord>& records, const std::vector<ResultRow>& rows) {
  if (records.size() != rows.size()) {
    throw ValidationError("results file does not match the corpus in length");
  }
  std::vector<TimedOutcome> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].id != records[i].id) {
      throw ValidationError("results file id mismatch at row " + std::to_string(i + 1) +
                            ": '" + rows[i].id + "' vs '" + records[i].id + "'");
    }
    out[i].outcome.params = rows[i].params;
    out[i].outcome.squared_error = rows[i].squared_error;
    out[i].outcome.iterations = rows[i].iterations;
    out[i].outcome.converged = rows[i].converged;
    out[i].wall_ms = rows[i].wall_ms;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch driver

/// Canonical serialization of everything that affects results (not output
/// or parallelism settings), hashed so persisted rows can be traced to the
/// exact configuration that produced them.
inline std::string config_digest(const RunConfig& cfg) {
  std::ostringstream s;
  s.precision(17);
  const DescentConfig& d = cfg.descent;
  s << algorithm_name(cfg.algorithm) << '|' << d.max_iterations << ','
    << d.convergence_threshold << ',' << d.h_n << ',' << d.h << ','
    << d.restrictions.k_r << ',' << d.restrictions.k_x << ','
    << d.damping.lambda0 << ',' << d.damping.beta << ',' << d.damping.gamma << ','
    << d.damping.rho1 << ',' << d.damping.rho2 << ','
    << (d.damping.strategy == DampingStrategy::GainRatio ? "gr" : "et") << ','
    << static_cast<int>(d.initial_guess.kind) << '|' << cfg.ga.n_pop << ','
    << cfg.ga.n_pool << ',' << cfg.ga.n_elite << ',' << cfg.ga.crossover_fraction
    << ',' << cfg.ga.max_generations << ',' << cfg.ga.convergence_threshold << '|'
    << cfg.hybrid.n_pop << ',' << cfg.hybrid.n_pool << ',' << cfg.hybrid.n_elite
    << ',' << cfg.hybrid.crossover_fraction << ',' << cfg.hybrid.max_generations
    << ',' << cfg.hybrid.pair_lo << ',' << cfg.hybrid.pair_hi << ','
    << cfg.hybrid.mutation_sigma << ',' << cfg.hybrid.warm_start << '|'
    << cfg.seed;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(s.str())));
  return buf;
}

/// Resolves the configured corpus source. Exactly one must be set.
inline std::vector<MotorRecord> resolve_corpus(const RunConfig& cfg) {
  if (cfg.corpus_path.has_value() == cfg.synthetic.has_value()) {
    throw ValidationError("exactly one corpus source must be configured");
  }
  if (cfg.corpus_path) return load_corpus(*cfg.corpus_path).records;
  const SyntheticSpec& s = *cfg.synthetic;
  return generate_synthetic(s.count, s.seed, s.standard, s.windows);
}

/// Solves every record with motor-level parallelism. Outcomes keep corpus
/// order regardless of scheduling; per-motor randomness depends only on
/// (run seed, motor id), so any parallelism level produces identical
/// results. A motor whose solve throws is recorded as an unconverged row
/// with infinite error instead of aborting the batch.
inline std::vector<TimedOutcome> run_corpus(const std::vector<MotorRecord>& records,
                                            const RunConfig& cfg) {
  if (cfg.parallelism < 1) throw ValidationError("parallelism must be >= 1");
  std::vector<TimedOutcome> outcomes(records.size());

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    for (std::size_t i; (i = cursor.fetch_add(1)) < records.size();) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const TargetVector targets = to_targets(records[i].plate);
        outcomes[i].outcome =
            solve_motor(targets, cfg, motor_seed(cfg.seed, records[i].id));
      } catch (const std::exception&) {
        outcomes[i].outcome = SolveOutcome{};  // infinite error, not converged
      }
      outcomes[i].wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                    t0)
              .count();
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), records.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return outcomes;
}

inline BatchResult run_batch(const RunConfig& cfg) {
  const std::vector<MotorRecord> records = resolve_corpus(cfg);
  BatchResult result;
  result.outcomes = run_corpus(records, cfg);
  result.stats = compute_stats(records, result.outcomes,
                               std::string(algorithm_name(cfg.algorithm)));
  if (!cfg.out_path.empty()) {
    const RunMeta meta{std::string(algorithm_name(cfg.algorithm)),
                       config_digest(cfg)};
    persist_results(records, result.outcomes, meta, cfg.out_path, cfg.out_format);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Markdown, Csv, Json };

namespace detail {

inline std::string pct_cell(const StatsCell& c) {
  if (c.n_motors == 0) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%zu (%.1f%%)", c.n_converged,
                100.0 * c.convergence_rate);
  return buf;
}

inline std::string err_cell(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void markdown_stats_row(std::ostringstream& out, std::string_view label,
                               const StatsCell& c) {
  out << "| " << label << " | " << c.n_motors << " | " << pct_cell(c) << " | "
      << err_cell(c.avg_squared_error) << " | " << err_cell(c.max_squared_error)
      << " |\n";
}

inline nlohmann::json cell_json(const StatsCell& c) {
  const auto num = [](double v) {
    return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
  };
  return nlohmann::json{{"n_motors", c.n_motors},
                        {"n_converged", c.n_converged},
                        {"convergence_rate", num(c.convergence_rate)},
                        {"avg_squared_error", num(c.avg_squared_error)},
                        {"max_squared_error", num(c.max_squared_error)}};
}

inline StatsCell cell_from_json(const nlohmann::json& j) {
  const auto num = [&](const char* key) {
    const nlohmann::json& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  StatsCell c;
  c.n_motors = j.at("n_motors").get<std::size_t>();
  c.n_converged = j.at("n_converged").get<std::size_t>();
  c.convergence_rate = num("convergence_rate");
  c.avg_squared_error = num("avg_squared_error");
  c.max_squared_error = num("max_squared_error");
  return c;
}

inline void csv_stats_row(std::ostringstream& out, std::string_view scope,
                          const StatsCell& c) {
  out << scope << ',' << c.n_motors << ',' << c.n_converged << ','
      << fmt17(c.convergence_rate) << ',' << fmt17(c.avg_squared_error) << ','
      << fmt17(c.max_squared_error) << '\n';
}

}  // namespace detail

inline std::string report(const CorpusStats& stats, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Markdown) {
    out << "# Batch results: " << stats.algorithm << "\n\n";
    out << "## Convergence and error\n\n";
    out << "| Group | Motors | Converged | Avg squared error | Max squared error |\n";
    out << "|---|---|---|---|---|\n";
    detail::markdown_stats_row(out, "IEC", stats.iec.overall);
    detail::markdown_stats_row(out, "NEMA", stats.nema.overall);
    detail::markdown_stats_row(out, "All", stats.total);
    const std::array<std::pair<std::string_view, const CorpusStats::Group*>, 2>
        groups{{{"IEC", &stats.iec}, {"NEMA", &stats.nema}}};
    for (const auto& [name, group] : groups) {
      if (group->overall.n_motors == 0) continue;
      out << "\n## " << name << " by rated power\n\n";
      out << "| Band | Motors | Converged | Avg squared error | Max squared error |\n";
      out << "|---|---|---|---|---|\n";
      for (std::size_t b = 0; b < kBandLabels.size(); ++b) {
        detail::markdown_stats_row(out, kBandLabels[b], group->by_band[b]);
      }
    }
    out << "\n## Timing\n\n";
    out << "| Average solution time (s) | Maximum solution time (s) |\n";
    out << "|---|---|\n";
    out << "| " << detail::err_cell(stats.avg_solution_s) << " | "
        << detail::err_cell(stats.max_solution_s) << " |\n";
    return out.str();
  }

  if (format == ReportFormat::Csv) {
    out << "scope,n_motors,n_converged,convergence_rate,avg_squared_error,"
           "max_squared_error\n";
    detail::csv_stats_row(out, "iec", stats.iec.overall);
    detail::csv_stats_row(out, "nema", stats.nema.overall);
    detail::csv_stats_row(out, "total", stats.total);
    const std::array<std::pair<std::string_view, const CorpusStats::Group*>, 2>
        groups{{{"iec", &stats.iec}, {"nema", &stats.nema}}};
    for (const auto& [name, group] : groups) {
      for (std::size_t b = 0; b < kBandLabels.size(); ++b) {
        std::string scope(name);
        scope += ':';
        scope += kBandLabels[b];
        detail::csv_stats_row(out, scope, group->by_band[b]);
      }
    }
    out << "timing," << detail::fmt17(stats.avg_solution_s) << ','
        << detail::fmt17(stats.max_solution_s) << ",,,\n";
    return out.str();
  }

  const auto group_json = [](const CorpusStats::Group& g) {
    nlohmann::json bands = nlohmann::json::array();
    for (std::size_t b = 0; b < g.by_band.size(); ++b) {
      nlohmann::json cell = detail::cell_json(g.by_band[b]);
      cell["band"] = kBandLabels[b];
      bands.push_back(std::move(cell));
    }
    return nlohmann::json{{"overall", detail::cell_json(g.overall)},
                          {"by_band", std::move(bands)}};
  };
  const auto num = [](double v) {
    return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
  };
  const nlohmann::json j{{"algorithm", stats.algorithm},
                         {"iec", group_json(stats.iec)},
                         {"nema", group_json(stats.nema)},
                         {"total", detail::cell_json(stats.total)},
                         {"avg_solution_s", num(stats.avg_solution_s)},
                         {"max_solution_s", num(stats.max_solution_s)}};
  return j.dump(2) + "\n";
}

/// Inverse of report(..., Json): the parsed stats are bit-equal to the
/// originals (NaN aggregates round-trip through JSON null).
inline CorpusStats stats_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed stats JSON", 1, 1);
  try {
    const auto group = [](const nlohmann::json& g) {
      CorpusStats::Group out;
      out.overall = detail::cell_from_json(g.at("overall"));
      const nlohmann::json& bands = g.at("by_band");
      for (std::size_t b = 0; b < out.by_band.size(); ++b) {
        out.by_band[b] = detail::cell_from_json(bands.at(b));
      }
      return out;
    };
    CorpusStats stats;
    stats.algorithm = j.at("algorithm").get<std::string>();
    stats.iec = group(j.at("iec"));
    stats.nema = group(j.at("nema"));
    stats.total = detail::cell_from_json(j.at("total"));
    stats.avg_solution_s = j.at("avg_solution_s").is_null()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : j.at("avg_solution_s").get<double>();
    stats.max_solution_s = j.at("max_solution_s").is_null()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : j.at("max_solution_s").get<double>();
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad stats JSON: ") + e.what(), 1, 1);
  }
}

}  // namespace cagefit
