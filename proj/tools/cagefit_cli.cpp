#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cagefit.hpp>

namespace {

using namespace cagefit;

/// Shared algorithm knobs. Population flags feed both the plain GA and the
/// hybrid outer loop; the active algorithm reads its own block.
struct AlgoOptions {
  std::string algorithm = "dnrga";
  RunConfig cfg;

  void wire(CLI::App& cmd, bool with_parallelism) {
    cmd.add_option("--algorithm", algorithm, "nr, lm, dnr, ga, nrga, lmga, dnrga")
        ->capture_default_str();
    cmd.add_option("--kr", cfg.descent.restrictions.k_r,
                   "restriction ratio: stator R = kr * inner cage R")
        ->capture_default_str();
    cmd.add_option("--kx", cfg.descent.restrictions.k_x,
                   "restriction ratio: outer cage X = kx * stator X")
        ->capture_default_str();
    cmd.add_option("--max-iter", cfg.descent.max_iterations,
                   "descent iteration cap")
        ->capture_default_str();
    cmd.add_option("--threshold", cfg.descent.convergence_threshold,
                   "squared-error convergence threshold")
        ->capture_default_str();
    cmd.add_option("--hn", cfg.descent.h_n, "descent step-size coefficient")
        ->capture_default_str();
    cmd.add_option("--lambda0", cfg.descent.damping.lambda0,
                   "initial damping parameter")
        ->capture_default_str();
    cmd.add_option("--beta", cfg.descent.damping.beta,
                   "damping increase factor")
        ->capture_default_str();
    cmd.add_option("--gamma", cfg.descent.damping.gamma,
                   "damping decrease factor")
        ->capture_default_str();
    cmd.add_option("--strategy", strategy_, "gain-ratio or error-term")
        ->check(CLI::IsMember({"gain-ratio", "error-term"}))
        ->capture_default_str();
    cmd.add_option("--pop", pop_, "population size")->capture_default_str();
    cmd.add_option("--pool", pool_, "mating pool size")->capture_default_str();
    cmd.add_option("--elite", elite_, "elite children per generation")
        ->capture_default_str();
    cmd.add_option("--crossover-fraction", crossover_,
                   "fraction of children produced by crossover")
        ->capture_default_str();
    cmd.add_option("--generations", generations_, "generation cap")
        ->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "run seed")->capture_default_str();
    if (with_parallelism) {
      cmd.add_option("--parallelism", cfg.parallelism,
                     "motor-level worker count")
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
    }
  }

  RunConfig resolve() {
    const auto alg = parse_algorithm(algorithm);
    if (!alg) throw ValidationError("unknown algorithm: " + algorithm);
    cfg.algorithm = *alg;
    cfg.descent.damping.strategy = strategy_ == "gain-ratio"
                                       ? DampingStrategy::GainRatio
                                       : DampingStrategy::ErrorTerm;
    if (pop_) cfg.ga.n_pop = cfg.hybrid.n_pop = *pop_;
    if (pool_) cfg.ga.n_pool = cfg.hybrid.n_pool = *pool_;
    if (elite_) cfg.ga.n_elite = cfg.hybrid.n_elite = *elite_;
    if (crossover_) {
      cfg.ga.crossover_fraction = cfg.hybrid.crossover_fraction = *crossover_;
    }
    if (generations_) {
      cfg.ga.max_generations = cfg.hybrid.max_generations = *generations_;
    }
    return cfg;
  }

 private:
  std::string strategy_ = "error-term";
  std::optional<int> pop_;
  std::optional<int> pool_;
  std::optional<int> elite_;
  std::optional<double> crossover_;
  std::optional<int> generations_;
};

struct CorpusSourceOptions {
  std::string corpus_path;
  int synth_count = 0;
  std::uint64_t synth_seed = 0;
  std::string synth_standard = "iec";

  void wire(CLI::App& cmd) {
    cmd.add_option("--corpus", corpus_path, "nameplate corpus CSV");
    cmd.add_option("--synth-count", synth_count,
                   "generate a synthetic corpus of this size instead");
    cmd.add_option("--synth-seed", synth_seed, "synthetic corpus seed")
        ->capture_default_str();
    cmd.add_option("--synth-standard", synth_standard, "iec or nema")
        ->check(CLI::IsMember({"iec", "nema"}))
        ->capture_default_str();
  }

  void apply(RunConfig& cfg) const {
    if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
    if (synth_count > 0) {
      cfg.synthetic = SyntheticSpec{
          synth_count, synth_seed,
          synth_standard == "nema" ? Standard::NEMA : Standard::IEC};
    }
  }
};

ResultFormat parse_result_format(const std::string& s) {
  if (s == "csv") return ResultFormat::Csv;
  if (s == "jsonl") return ResultFormat::JsonLines;
  throw ValidationError("unknown results format: " + s);
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "md") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ValidationError("unknown report format: " + s);
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError("cannot write: " + path);
}

nlohmann::json outcome_json(const std::string& algorithm,
                            const SolveOutcome& out) {
  const CircuitParams& p = out.params;
  return nlohmann::json{
      {"algorithm", algorithm},
      {"converged", out.converged},
      {"squared_error", out.squared_error},
      {"iterations", out.iterations},
      {"feasible", p.feasible()},
      {"params",
       {{"r_s", p.r_s},
        {"x_s", p.x_s},
        {"x_m", p.x_m},
        {"r_r1", p.r_r1},
        {"x_r1", p.x_r1},
        {"r_r2", p.r_r2},
        {"x_r2", p.x_r2},
        {"r_c", p.r_c}}}};
}

void print_outcome(const std::string& algorithm, const SolveOutcome& out) {
  std::printf("algorithm      %s\n", algorithm.c_str());
  std::printf("converged      %s\n", out.converged ? "yes" : "no");
  std::printf("squared error  %.6g\n", out.squared_error);
  std::printf("iterations     %d\n", out.iterations);
  const CircuitParams& p = out.params;
  std::printf("r_s  %-12.6g x_s  %-12.6g x_m  %-12.6g r_r1 %-12.6g\n", p.r_s,
              p.x_s, p.x_m, p.r_r1);
  std::printf("x_r1 %-12.6g r_r2 %-12.6g x_r2 %-12.6g r_c  %-12.6g\n", p.x_r1,
              p.r_r2, p.x_r2, p.r_c);
  if (!p.feasible()) {
    std::printf("note: cage ordering (x_r1 > x_r2, r_r2 > r_r1) not satisfied\n");
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct EstimateCmd {
  AlgoOptions algo;
  NameplateData plate;
  int poles = 0;
  double power_kw = 0;
  std::string plate_csv;
  std::string out_path;

  void wire(CLI::App& cmd) {
    algo.wire(cmd, /*with_parallelism=*/false);
    cmd.add_option("--plate-csv", plate_csv,
                   "read the nameplate from a one-row corpus CSV");
    cmd.add_option("--voltage", plate.u_n, "rated line voltage (V)");
    cmd.add_option("--freq", plate.freq, "rated frequency (Hz)");
    cmd.add_option("--rpm", plate.n_fl, "full-load speed (rpm)");
    cmd.add_option("--current", plate.i_s_fl, "full-load current (A)");
    cmd.add_option("--power-kw", power_kw, "rated mechanical power (kW)");
    cmd.add_option("--pf", plate.pf_fl, "full-load power factor");
    cmd.add_option("--eff", plate.eff_fl, "full-load efficiency");
    cmd.add_option("--tb", plate.t_b_ratio, "breakdown / rated torque");
    cmd.add_option("--tlr", plate.t_lr_ratio, "locked-rotor / rated torque");
    cmd.add_option("--ilr", plate.i_lr_ratio, "locked-rotor / rated current");
    cmd.add_option("--poles", poles, "pole count (default: inferred)");
    cmd.add_option("--out", out_path, "write the estimate as JSON");
  }

  int run() {
    if (!plate_csv.empty()) {
      const LoadResult loaded = load_corpus(plate_csv);
      if (loaded.records.size() != 1) {
        throw ValidationError("expected exactly one usable plate row, got " +
                              std::to_string(loaded.records.size()));
      }
      plate = loaded.records.front().plate;
    } else {
      plate.p_m_fl = power_kw * 1000.0;
      if (poles > 0) plate.poles = poles;
    }
    const RunConfig cfg = algo.resolve();
    const TargetVector targets = to_targets(plate);
    const SolveOutcome out =
        solve_motor(targets, cfg, derive_seed(cfg.seed, fnv1a64("estimate")));
    print_outcome(algo.algorithm, out);
    if (!out_path.empty()) {
      write_or_print(outcome_json(algo.algorithm, out).dump(2) + "\n", out_path);
    }
    return 0;
  }
};

struct BatchCmd {
  AlgoOptions algo;
  CorpusSourceOptions source;
  std::string out_path;
  std::string out_format = "csv";
  std::string report_format = "md";
  std::string report_out;

  void wire(CLI::App& cmd) {
    algo.wire(cmd, /*with_parallelism=*/true);
    source.wire(cmd);
    cmd.add_option("--out", out_path, "persist per-motor results here");
    cmd.add_option("--format", out_format, "results format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    cmd.add_option("--report-format", report_format, "md, csv or json")
        ->check(CLI::IsMember({"md", "csv", "json"}))
        ->capture_default_str();
    cmd.add_option("--report-out", report_out,
                   "write the report here instead of stdout");
  }

  int run() {
    RunConfig cfg = algo.resolve();
    source.apply(cfg);
    cfg.out_path = out_path;
    cfg.out_format = parse_result_format(out_format);
    const BatchResult result = run_batch(cfg);
    write_or_print(report(result.stats, parse_report_format(report_format)),
                   report_out);
    return 0;
  }
};

struct SynthCmd {
  int count = 100;
  std::uint64_t seed = 0;
  std::string standard = "iec";
  std::string out_path;

  void wire(CLI::App& cmd) {
    cmd.add_option("--count", count, "number of motors")->capture_default_str();
    cmd.add_option("--seed", seed, "generator seed")->capture_default_str();
    cmd.add_option("--standard", standard, "iec or nema")
        ->check(CLI::IsMember({"iec", "nema"}))
        ->capture_default_str();
    cmd.add_option("--out", out_path, "corpus CSV to write")->required();
  }

  int run() {
    const auto records = generate_synthetic(
        count, seed, standard == "nema" ? Standard::NEMA : Standard::IEC);
    write_corpus(records, out_path);
    std::printf("wrote %zu motors to %s\n", records.size(), out_path.c_str());
    return 0;
  }
};

struct ReportCmd {
  CorpusSourceOptions source;
  std::string results_path;
  std::string results_format = "csv";
  std::string report_format = "md";
  std::string report_out;

  void wire(CLI::App& cmd) {
    source.wire(cmd);
    cmd.add_option("--results", results_path, "persisted per-motor results")
        ->required();
    cmd.add_option("--format", results_format, "results format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    cmd.add_option("--report-format", report_format, "md, csv or json")
        ->check(CLI::IsMember({"md", "csv", "json"}))
        ->capture_default_str();
    cmd.add_option("--report-out", report_out,
                   "write the report here instead of stdout");
  }

  int run() {
    RunConfig cfg;
    source.apply(cfg);
    const auto records = resolve_corpus(cfg);
    const auto rows =
        read_results(results_path, parse_result_format(results_format));
    const auto outcomes = outcomes_from_rows(records, rows);
    const std::string algorithm = rows.empty() ? "none" : rows.front().algorithm;
    const auto stats = compute_stats(records, outcomes, algorithm);
    write_or_print(report(stats, parse_report_format(report_format)),
                   report_out);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"double-cage induction motor parameter estimation"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file with [subcommand] sections; "
                 "command-line flags win");

  EstimateCmd estimate;
  BatchCmd batch;
  SynthCmd synth;
  ReportCmd rep;
  CLI::App* estimate_cmd =
      app.add_subcommand("estimate", "estimate one motor's parameters");
  estimate.wire(*estimate_cmd);
  CLI::App* batch_cmd =
      app.add_subcommand("batch", "run an algorithm over a corpus");
  batch.wire(*batch_cmd);
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "emit a synthetic ground-truth corpus");
  synth.wire(*synth_cmd);
  CLI::App* report_cmd =
      app.add_subcommand("report", "re-render persisted batch results");
  rep.wire(*report_cmd);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(estimate_cmd)) return estimate.run();
    if (app.got_subcommand(batch_cmd)) return batch.run();
    if (app.got_subcommand(synth_cmd)) return synth.run();
    if (app.got_subcommand(report_cmd)) return rep.run();
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cagefit::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
