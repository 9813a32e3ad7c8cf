#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cagefit/circuit.hpp"
#include "cagefit/descent.hpp"
#include "cagefit/errors.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/sampling.hpp"

namespace cagefit {

enum class Standard { IEC, NEMA };

inline std::string_view standard_name(Standard s) {
  return s == Standard::IEC ? "IEC" : "NEMA";
}

struct MotorRecord {
  std::string id;
  Standard standard = Standard::IEC;
  NameplateData plate{};
  // Set for synthetic records; the plate is then the exact forward model of
  // these parameters.
  std::optional<CircuitParams> truth;
};

/// Counts sum to the input row count.
struct CleansingReport {
  std::size_t duplicates_removed = 0;
  std::size_t missing_fields_removed = 0;
  std::size_t inconsistent_removed = 0;
  std::size_t retained = 0;
};

struct LoadResult {
  std::vector<MotorRecord> records;
  CleansingReport report;
};

// ---------------------------------------------------------------------------
// Power bands

struct PowerBand {
  double lo = 0;
  double hi = 0;  // infinity for the open top band

  bool operator==(const PowerBand&) const = default;
};

inline constexpr std::array<PowerBand, 6> kPowerBands{
    {{0.37, 3.6},
     {4.0, 15.0},
     {18.5, 75.0},
     {90.0, 185.0},
     {200.0, 630.0},
     {630.0, std::numeric_limits<double>::infinity()}}};

inline constexpr std::array<std::string_view, 6> kBandLabels{
    "0.37-3.6 kW", "4-15 kW",    "18.5-75 kW",
    "90-185 kW",   "200-630 kW", ">630 kW"};

/// Band assignment is total on (0, inf): ratings in the gaps between bands
/// go to the band with the nearest boundary, ties upward, so the cut points
/// are the gap midpoints.
inline std::size_t band_index(double p_kw) {
  if (!(p_kw > 0)) throw DomainError("power rating must be positive");
  if (p_kw < 3.8) return 0;
  if (p_kw < 16.75) return 1;
  if (p_kw < 82.5) return 2;
  if (p_kw < 192.5) return 3;
  if (p_kw <= 630.0) return 4;
  return 5;
}

inline PowerBand band_of(double p_kw) { return kPowerBands[band_index(p_kw)]; }

// ---------------------------------------------------------------------------
// CSV ingestion

/// Pairs of (foreign header, canonical header), applied case-insensitively
/// after lowercasing, for files whose columns are named differently.
using ColumnAliases = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string lower_trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') {
    cells.back().pop_back();
  }
  return cells;
}

inline std::string strip_ws(const std::string& cell) {
  std::size_t b = 0, e = cell.size();
  while (b < e && std::isspace(static_cast<unsigned char>(cell[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(cell[e - 1]))) --e;
  return cell.substr(b, e - b);
}

/// Empty cell reads as NaN (a missing value, cleansed later); anything else
/// must parse completely as a number.
inline double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string cell = strip_ws(raw);
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("not a number: '" + cell + "'", row, col);
  }
  return v;
}

inline std::optional<Standard> parse_standard(const std::string& cell) {
  const std::string s = lower_trim(cell);
  if (s == "iec") return Standard::IEC;
  if (s == "nema") return Standard::NEMA;
  return std::nullopt;
}

/// Bitwise plate key with NaN canonicalized, so identical incomplete rows
/// still register as duplicates. The id is deliberately not part of the key.
inline std::string plate_key(const MotorRecord& r) {
  std::string key;
  key.reserve(14 * sizeof(double) + 4);
  const auto push = [&key](double v) {
    if (std::isnan(v)) v = std::numeric_limits<double>::quiet_NaN();
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof buf);
    key.append(buf, sizeof buf);
  };
  key.push_back(r.standard == Standard::IEC ? 'I' : 'N');
  const NameplateData& p = r.plate;
  push(p.u_n);
  push(p.freq);
  push(p.n_fl);
  push(p.i_s_fl);
  push(p.p_m_fl);
  push(p.pf_fl);
  push(p.eff_fl);
  push(p.t_b_ratio);
  push(p.t_lr_ratio);
  push(p.i_lr_ratio);
  push(p.poles ? static_cast<double>(*p.poles) : std::numeric_limits<double>::quiet_NaN());
  return key;
}

}  // namespace detail

/// Loads a nameplate corpus and cleanses it in a fixed order: duplicate
/// plates first (first occurrence wins), then rows with missing power
/// factor, efficiency or torque-ratio cells, then rows whose numbers are
/// inconsistent (full-load torque above breakdown torque, rated speed at or
/// above synchronous, anything the per-unit conversion rejects). Structural
/// problems (bad header, malformed number, unknown standard) throw; bad
/// values only move rows into the report.
inline LoadResult load_corpus(const std::string& path,
                              const ColumnAliases& aliases = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1, 1);

  static constexpr std::array<std::string_view, 13> kColumns{
      "id",       "standard", "voltage_v", "freq_hz",   "speed_rpm",
      "current_a", "power_kw", "pf",        "eff",       "tb_ratio",
      "tlr_ratio", "ilr_ratio", "poles"};
  std::array<std::size_t, 13> where{};
  where.fill(SIZE_MAX);

  std::vector<std::string> header = detail::split_csv_line(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string name = detail::lower_trim(header[c]);
    for (const auto& [foreign, canonical] : aliases) {
      if (name == detail::lower_trim(foreign)) name = detail::lower_trim(canonical);
    }
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
      if (name == kColumns[k]) where[k] = c;
    }
  }
  for (std::size_t k = 0; k + 1 < kColumns.size(); ++k) {  // poles optional
    if (where[k] == SIZE_MAX) {
      throw ParseError("missing column '" + std::string(kColumns[k]) + "'", 1, k + 1);
    }
  }

  std::vector<MotorRecord> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (detail::strip_ws(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row_no, std::min(cells.size(), header.size()) + 1);
    }
    const auto cell = [&](std::size_t k) -> const std::string& { return cells[where[k]]; };
    const auto num = [&](std::size_t k) {
      return detail::parse_cell(cell(k), row_no, where[k] + 1);
    };

    MotorRecord r;
    r.id = detail::strip_ws(cell(0));
    if (r.id.empty()) throw ParseError("empty id", row_no, where[0] + 1);
    const auto std_parsed = detail::parse_standard(cell(1));
    if (!std_parsed) {
      throw ParseError("unknown standard '" + detail::strip_ws(cell(1)) + "'", row_no,
                       where[1] + 1);
    }
    r.standard = *std_parsed;
    r.plate.u_n = num(2);
    r.plate.freq = num(3);
    r.plate.n_fl = num(4);
    r.plate.i_s_fl = num(5);
    r.plate.p_m_fl = num(6) * 1000.0;  // column is kW, plate stores W
    r.plate.pf_fl = num(7);
    r.plate.eff_fl = num(8);
    r.plate.t_b_ratio = num(9);
    r.plate.t_lr_ratio = num(10);
    r.plate.i_lr_ratio = num(11);
    if (where[12] != SIZE_MAX) {
      const double poles = detail::parse_cell(cell(12), row_no, where[12] + 1);
      if (!std::isnan(poles)) r.plate.poles = static_cast<int>(poles);
    }
    rows.push_back(std::move(r));
  }

  LoadResult out;
  out.report = CleansingReport{};

  std::unordered_set<std::string> seen;
  std::vector<MotorRecord> unique;
  for (MotorRecord& r : rows) {
    if (seen.insert(detail::plate_key(r)).second) {
      unique.push_back(std::move(r));
    } else {
      ++out.report.duplicates_removed;
    }
  }

  for (MotorRecord& r : unique) {
    const NameplateData& p = r.plate;
    if (std::isnan(p.pf_fl) || std::isnan(p.eff_fl) || std::isnan(p.t_b_ratio) ||
        std::isnan(p.t_lr_ratio)) {
      ++out.report.missing_fields_removed;
      continue;
    }
    bool consistent = p.t_b_ratio >= 1.0;
    if (consistent) {
      try {
        to_targets(p);
      } catch (const ValidationError&) {
        consistent = false;
      }
    }
    if (!consistent) {
      ++out.report.inconsistent_removed;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  out.report.retained = out.records.size();
  return out;
}

/// Writes records back out in the load_corpus schema. Synthetic truths are
/// not persisted; a written corpus reloads as file-provenance records.
inline void write_corpus(const std::vector<MotorRecord>& records,
                         const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw IoError("cannot open " + path);
  outf << "id,standard,voltage_v,freq_hz,speed_rpm,current_a,power_kw,pf,eff,"
          "tb_ratio,tlr_ratio,ilr_ratio,poles\n";
  char buf[32];
  const auto num = [&](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const MotorRecord& r : records) {
    const NameplateData& p = r.plate;
    outf << r.id << ',' << standard_name(r.standard) << ',' << num(p.u_n) << ','
         << num(p.freq) << ',' << num(p.n_fl) << ',' << num(p.i_s_fl) << ','
         << num(p.p_m_fl / 1000.0) << ',' << num(p.pf_fl) << ',' << num(p.eff_fl)
         << ',' << num(p.t_b_ratio) << ',' << num(p.t_lr_ratio) << ','
         << num(p.i_lr_ratio) << ',' << (p.poles ? std::to_string(*p.poles) : "")
         << '\n';
  }
  if (!outf) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic corpora

/// Acceptance windows for synthetic draws; the defaults exclude machines
/// with no usable torque curve or implausible losses.
struct SyntheticWindows {
  double s_max_lo = 0.01;
  double s_max_hi = 0.9;
  double eff_lo = 0.5;
  double eff_hi = 0.999;
};

namespace detail {

/// Typical double-cage territory. Uniform draws over the whole initial-guess
/// box are dominated by parameter sets no real machine has (magnetizing
/// reactance near zero, core resistance rivaling the rotor's), and a corpus
/// of those measures nothing. Ground truths come from the ranges machines
/// actually occupy, with the cage ordering built in, and stay inside the
/// box the solvers sample their starting points from.
inline CircuitParams sample_machine(Rng& rng) {
  CircuitParams p;
  p.r_s = sample_in_range(rng, 0.005, 0.06);
  p.x_s = sample_in_range(rng, 0.04, 0.14);
  p.x_m = sample_in_range(rng, 1.2, 4.2);
  p.r_r1 = sample_in_range(rng, 0.006, 0.05);
  p.x_r1 = sample_in_range(rng, 0.10, 0.26);
  p.r_r2 = p.r_r1 * sample_in_range(rng, 1.8, std::min(4.0, 0.15 / p.r_r1));
  p.x_r2 = sample_in_range(rng, 0.025, 0.09);
  p.r_c = sample_in_range(rng, 15.0, 90.0);
  return p;
}

}  // namespace detail

/// Draws ground-truth machines from typical double-cage territory and builds
/// exactly consistent plates from the forward model, so every record is
/// solvable to squared error < 1e-20 by construction. Draws are rejected
/// when electrically meaningless: infeasible cage ordering, breakdown slip
/// outside the window, no rated slip with stator current 1 pu below
/// breakdown, or full-load efficiency outside the window.
inline std::vector<MotorRecord> generate_synthetic(
    int count, std::uint64_t seed, Standard standard,
    const SyntheticWindows& windows = {}) {
  if (count < 1) throw ValidationError("synthetic count must be >= 1");
  Rng rng(seed);
  std::uniform_int_distribution<int> pole_pairs(1, 4);
  std::uniform_real_distribution<double> log_power(std::log(0.37), std::log(1000.0));

  const double u_n = standard == Standard::IEC ? 400.0 : 460.0;
  const double freq = standard == Standard::IEC ? 50.0 : 60.0;

  std::vector<MotorRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  std::size_t attempts = 0;
  while (out.size() < static_cast<std::size_t>(count)) {
    ++attempts;
    if (attempts >= 1000 &&
        static_cast<double>(out.size()) < 0.001 * static_cast<double>(attempts)) {
      throw ResourceError("synthetic rejection rate above 99.9%");
    }

    const CircuitParams truth = detail::sample_machine(rng);
    if (!truth.feasible()) continue;
    BreakdownPoint bp;
    try {
      bp = breakdown_torque(truth);
    } catch (const DegenerateError&) {
      continue;
    }
    if (!(bp.s_max > windows.s_max_lo) || !(bp.s_max < windows.s_max_hi)) continue;

    // Rated slip: where the stator current crosses 1 pu, found by bisection
    // run to double exhaustion so the plate is consistent to rounding.
    if (!(operating_point(truth, 1e-4).i_stator < 1.0) ||
        !(operating_point(truth, bp.s_max).i_stator > 1.0)) {
      continue;
    }
    double lo = 1e-4, hi = bp.s_max;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (operating_point(truth, mid).i_stator < 1.0 ? lo : hi) = mid;
    }
    const double s_f = hi;

    const OperatingPoint fl = operating_point(truth, s_f);
    if (!(fl.efficiency > windows.eff_lo) || !(fl.efficiency < windows.eff_hi)) continue;
    if (!(fl.p_in > 0) || fl.p_in > 1.0) continue;  // plate pf must sit in (0, 1]
    const OperatingPoint lr = operating_point(truth, 1.0);

    MotorRecord r;
    r.standard = standard;
    r.truth = truth;
    NameplateData& p = r.plate;
    p.u_n = u_n;
    p.freq = freq;
    p.poles = 2 * pole_pairs(rng);
    const double n_sync = synchronous_speed(freq, *p.poles);
    p.n_fl = n_sync * (1.0 - s_f);
    const double p_kw = std::exp(log_power(rng));
    p.p_m_fl = p_kw * 1000.0;
    // Rated current is the per-unit base, so sizing it off the model's
    // full-load power makes the plate's pu power equal fl.p_mech exactly.
    p.i_s_fl = p.p_m_fl / (std::sqrt(3.0) * u_n * fl.p_mech);
    p.pf_fl = fl.p_in;  // apparent power is exactly 1 pu at rated current
    p.eff_fl = fl.efficiency;

    // Mirror the ratio normalization the per-unit conversion applies, so the
    // plate round-trips to the model's own magnitudes.
    const double s_base = std::sqrt(3.0) * u_n * p.i_s_fl;
    const double p_pu = p.p_m_fl / s_base;
    const double s_f_back = (n_sync - p.n_fl) / n_sync;
    const double t_n = p_pu / (1.0 - s_f_back);
    p.t_b_ratio = bp.t_b / t_n;
    p.t_lr_ratio = lr.torque / t_n;
    p.i_lr_ratio = lr.i_stator;
    if (!(p.t_b_ratio >= 1.0)) continue;  // keeps the cleanser a no-op on us

    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "syn-%s-%06zu",
                  standard == Standard::IEC ? "iec" : "nema", out.size() + 1);
    r.id = idbuf;
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Result persistence

enum class ResultFormat { Csv, JsonLines };

struct RunMeta {
  std::string algorithm;
  std::string config_digest;
};

struct TimedOutcome {
  SolveOutcome outcome{};
  double wall_ms = 0;
};

struct ResultRow {
  std::string id;
  std::string algorithm;
  std::string config_digest;
  bool converged = false;
  double squared_error = 0;
  int iterations = 0;
  CircuitParams params{};
  bool feasible = false;
  double wall_ms = 0;
};

namespace detail {

inline constexpr std::string_view kResultHeader =
    "id,algorithm,config_digest,converged,squared_error,iterations,"
    "r_s,x_s,x_m,r_r1,x_r1,r_r2,x_r2,r_c,feasible,wall_ms";

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// One row per motor. Doubles carry 17 significant digits in CSV (and
/// shortest round-trip form in JSONLINES) so convergence-threshold
/// comparisons survive a write/read cycle exactly.
inline void persist_results(const std::vector<MotorRecord>& records,
                            const std::vector<TimedOutcome>& outcomes,
                            const RunMeta& meta, const std::string& path,
                            ResultFormat format) {
  if (records.size() != outcomes.size()) {
    throw ValidationError("records and outcomes differ in length");
  }
  std::ofstream outf(path);
  if (!outf) throw IoError("cannot open " + path);

  if (format == ResultFormat::Csv) outf << detail::kResultHeader << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SolveOutcome& o = outcomes[i].outcome;
    const std::array<double, 8> raw = o.params.as_array();
    if (format == ResultFormat::Csv) {
      outf << records[i].id << ',' << meta.algorithm << ',' << meta.config_digest
           << ',' << (o.converged ? "true" : "false") << ','
           << detail::fmt17(o.squared_error) << ',' << o.iterations;
      for (const double v : raw) outf << ',' << detail::fmt17(v);
      outf << ',' << (o.params.feasible() ? "true" : "false") << ','
           << detail::fmt17(outcomes[i].wall_ms) << '\n';
    } else {
      nlohmann::json j{{"id", records[i].id},
                       {"algorithm", meta.algorithm},
                       {"config_digest", meta.config_digest},
                       {"converged", o.converged},
                       {"squared_error", o.squared_error},
                       {"iterations", o.iterations},
                       {"r_s", raw[0]},
                       {"x_s", raw[1]},
                       {"x_m", raw[2]},
                       {"r_r1", raw[3]},
                       {"x_r1", raw[4]},
                       {"r_r2", raw[5]},
                       {"x_r2", raw[6]},
                       {"r_c", raw[7]},
                       {"feasible", o.params.feasible()},
                       {"wall_ms", outcomes[i].wall_ms}};
      outf << j.dump() << '\n';
    }
  }
  if (!outf) throw IoError("write failed: " + path);
}

inline std::vector<ResultRow> read_results(const std::string& path,
                                           ResultFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t row_no = 0;

  const auto parse_bool = [](const std::string& cell, std::size_t row, std::size_t col) {
    const std::string s = detail::lower_trim(cell);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParseError("not a boolean: '" + cell + "'", row, col);
  };

  if (format == ResultFormat::Csv) {
    if (!std::getline(in, line)) throw ParseError("empty file", 1, 1);
    ++row_no;
    while (std::getline(in, line)) {
      ++row_no;
      if (detail::strip_ws(line).empty()) continue;
      const std::vector<std::string> cells = detail::split_csv_line(line);
      if (cells.size() != 16) {
        throw ParseError("expected 16 cells, got " + std::to_string(cells.size()),
                         row_no, std::min<std::size_t>(cells.size(), 16) + 1);
      }
      ResultRow r;
      r.id = detail::strip_ws(cells[0]);
      r.algorithm = detail::strip_ws(cells[1]);
      r.config_digest = detail::strip_ws(cells[2]);
      r.converged = parse_bool(cells[3], row_no, 4);
      r.squared_error = detail::parse_cell(cells[4], row_no, 5);
      r.iterations = static_cast<int>(detail::parse_cell(cells[5], row_no, 6));
      std::array<double, 8> raw{};
      for (std::size_t k = 0; k < 8; ++k) {
        raw[k] = detail::parse_cell(cells[6 + k], row_no, 7 + k);
      }
      r.params = CircuitParams::from_array(raw);
      r.feasible = parse_bool(cells[14], row_no, 15);
      r.wall_ms = detail::parse_cell(cells[15], row_no, 16);
      rows.push_back(std::move(r));
    }
    return rows;
  }

  while (std::getline(in, line)) {
    ++row_no;
    if (detail::strip_ws(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON line", row_no, 1);
    try {
      ResultRow r;
      r.id = j.at("id").get<std::string>();
      r.algorithm = j.at("algorithm").get<std::string>();
      r.config_digest = j.at("config_digest").get<std::string>();
      r.converged = j.at("converged").get<bool>();
      r.squared_error = j.at("squared_error").get<double>();
      r.iterations = j.at("iterations").get<int>();
      const std::array<double, 8> raw{
          j.at("r_s").get<double>(),  j.at("x_s").get<double>(),
          j.at("x_m").get<double>(),  j.at("r_r1").get<double>(),
          j.at("x_r1").get<double>(), j.at("r_r2").get<double>(),
          j.at("x_r2").get<double>(), j.at("r_c").get<double>()};
      r.params = CircuitParams::from_array(raw);
      r.feasible = j.at("feasible").get<bool>();
      r.wall_ms = j.at("wall_ms").get<double>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad result object: ") + e.what(), row_no, 1);
    }
  }
  return rows;
}

}  // namespace cagefit
