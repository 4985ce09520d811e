// cmdp: generate instances, solve them exactly, run the primal-dual solvers
// and write per-step CSV histories with SVG plots.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmdp/baselines.hpp"
#include "cmdp/errors.hpp"
#include "cmdp/ground_truth.hpp"
#include "cmdp/history.hpp"
#include "cmdp/metrics.hpp"
#include "cmdp/model.hpp"
#include "cmdp/plot.hpp"
#include "cmdp/pmd_pd.hpp"
#include "cmdp/sampling.hpp"

namespace fs = std::filesystem;
using namespace cmdp;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAssertion = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string format = "csv";
};

struct SolverOptions {
  int macro_steps = 100;
  double eta_prime = 1.0;
  std::optional<double> eta;
  std::optional<double> alpha;
  std::optional<int> inner_steps;
  std::optional<double> xi;
  double tolerance = 0.0;
  bool no_svg = false;
};

void add_solver_options(CLI::App* cmd, SolverOptions& o) {
  cmd->add_option("--macro-steps,-K", o.macro_steps, "Macro steps (iterations for baselines)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eta-prime", o.eta_prime, "Dual step size")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--eta", o.eta, "Primal step size (default: theorem value for PMD-PD, 1 for baselines)");
  cmd->add_option("--alpha", o.alpha, "KL coefficient of PMD-PD (default: theorem value)");
  cmd->add_option("--inner-steps", o.inner_steps, "Fixed inner steps t_k (default: theorem schedule)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--xi", o.xi, "Slater margin (default: from the ground truth)");
  cmd->add_option("--tolerance", o.tolerance, "CRPO constraint tolerance");
  cmd->add_flag("--no-svg", o.no_svg, "Skip SVG plots");
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / name;
}

GroundTruth load_or_solve(const CmdpModel& model, const std::string& gt_path) {
  if (!gt_path.empty()) return read_ground_truth(gt_path);
  return solve_lp(model);
}

RunReference reference_of(const GroundTruth& gt) { return {gt.optimal_value, gt.lambda_star}; }

RunHistory run_algorithm(const std::string& algo, const CmdpModel& model, const GroundTruth& gt,
                         const SolverOptions& o, std::uint64_t seed) {
  const std::optional<double> xi = o.xi ? o.xi : std::optional<double>(gt.xi);
  if (algo == "pmd-pd" || algo == "pmd-pd-zero") {
    PmdPdConfig c;
    c.macro_steps = o.macro_steps;
    c.eta_prime = o.eta_prime;
    c.eta = o.eta;
    c.alpha = o.alpha;
    c.inner_steps = o.inner_steps;
    c.seed = seed;
    if (algo == "pmd-pd") {
      RunHistory h = run_pmd_pd(model, c, reference_of(gt));
      h.set_reference_value(gt.optimal_value);
      return h;
    }
    c.xi = xi;
    RunReference ref{gt.optimal_value, {}};
    RunHistory h = run_pmd_pd_zero(model, c, ref);
    h.set_reference_value(gt.optimal_value);
    return h;
  }
  if (algo == "npg-pd" || algo == "crpo") {
    BaselineConfig b;
    b.iterations = o.macro_steps;
    b.eta = o.eta.value_or(1.0);
    b.eta_prime = o.eta_prime;
    b.xi = xi;
    b.tolerance = o.tolerance;
    b.seed = seed;
    RunHistory h = algo == "npg-pd" ? run_npg_pd(model, b) : run_crpo(model, b);
    h.set_reference_value(gt.optimal_value);
    return h;
  }
  throw ValidationError("unknown algorithm '" + algo + "' (pmd-pd, pmd-pd-zero, npg-pd, crpo)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

void write_plots(const fs::path& stem, const std::vector<std::pair<std::string, MetricSeries>>& runs,
                 int constraint_count) {
  std::vector<PlotSeries> gap;
  std::vector<PlotSeries> viol;
  for (const auto& [name, ms] : runs) {
    gap.push_back({name, ms.t, ms.gap});
    for (int i = 0; i < constraint_count; ++i)
      viol.push_back({constraint_count > 1 ? name + " c" + std::to_string(i + 1) : name, ms.t,
                      ms.violation_positive[static_cast<std::size_t>(i)]});
  }
  const std::string base = stem.string();
  write_text(base + "_gap.svg", render_svg(gap, "Optimality gap", "iteration", "gap", false));
  write_text(base + "_gap_loglog.svg", render_svg(gap, "Optimality gap", "iteration", "gap", true));
  if (constraint_count > 0) {
    write_text(base + "_violation.svg",
               render_svg(viol, "Constraint violation", "iteration", "violation", false));
    write_text(base + "_violation_loglog.svg",
               render_svg(viol, "Constraint violation", "iteration", "violation", true));
  }
}

std::string slope_text(const std::vector<double>& t, const std::vector<double>& y) {
  try {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", loglog_slope(t, y).slope);
    return buf;
  } catch (const ValidationError&) {
    return "nan";
  }
}

int cmd_generate(const Globals& g, const RandomCmdpSpec& spec_in, std::optional<double> threshold,
                 const std::string& out) {
  RandomCmdpSpec spec = spec_in;
  spec.seed = g.seed;
  const CmdpModel model = threshold ? generate_random_max_form(spec, *threshold) : generate_random(spec);
  require_valid(model);
  const fs::path path = out.empty() ? out_path(g, "model.json") : fs::path(out);
  write_model(model, path.string());
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_ground_truth(const Globals& g, const std::string& model_path, const std::string& out) {
  const CmdpModel model = read_model(model_path);
  const GroundTruth gt = solve_lp(model);
  const fs::path path =
      out.empty() ? out_path(g, fs::path(model_path).stem().string() + ".gt") : fs::path(out);
  write_ground_truth(gt, path.string());
  if (gt.status != SolveStatus::optimal) {
    std::cout << "infeasible\n";
    return 0;
  }
  std::printf("optimal_value %.12g\n", gt.optimal_value);
  for (Eigen::Index i = 0; i < gt.lambda_star.size(); ++i)
    std::printf("lambda_%ld %.12g\n", static_cast<long>(i + 1), gt.lambda_star(i));
  std::printf("xi %.12g\n", gt.xi);
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_solve(const Globals& g, const std::string& model_path, const std::string& gt_path,
              const std::string& algo, const SolverOptions& o) {
  const CmdpModel model = read_model(model_path);
  const GroundTruth gt = load_or_solve(model, gt_path);
  if (gt.status != SolveStatus::optimal) throw ValidationError("model is infeasible");
  const RunHistory h = run_algorithm(algo, model, gt, o, g.seed);
  const fs::path csv = out_path(g, algo + ".csv");
  write_history_csv(h, csv.string());
  for (const auto& w : h.warnings()) std::cerr << "warning: " << w << "\n";
  const MetricSeries ms = compute_metrics(h, gt, model.from_reward_form());
  if (!o.no_svg) write_plots(out_path(g, algo), {{algo, ms}}, model.num_constraints());
  std::printf("%s final_gap %.6e", algo.c_str(), ms.gap.back());
  for (int i = 0; i < model.num_constraints(); ++i)
    std::printf(" violation_%d %.6e", i + 1, ms.violation[static_cast<std::size_t>(i)].back());
  std::printf("\n%s\n", csv.string().c_str());
  return 0;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_compare(const Globals& g, const std::string& model_path, const std::string& gt_path,
                const std::string& algos_text, const SolverOptions& base) {
  const CmdpModel model = read_model(model_path);
  const GroundTruth gt = load_or_solve(model, gt_path);
  if (gt.status != SolveStatus::optimal) throw ValidationError("model is infeasible");
  const std::vector<std::string> algos = split_list(algos_text);
  if (algos.empty()) throw ValidationError("--algos is empty");

  // PMD-PD takes --eta literally; baselines default to eta = 1.
  std::vector<std::future<RunHistory>> jobs;
  for (const auto& a : algos)
    jobs.push_back(std::async(std::launch::async, [&, a] { return run_algorithm(a, model, gt, base, g.seed); }));

  std::vector<std::pair<std::string, MetricSeries>> runs;
  std::ostringstream table;
  table << "algorithm,final_gap";
  for (int i = 0; i < model.num_constraints(); ++i) table << ",final_violation_" << i + 1;
  table << ",gap_slope";
  for (int i = 0; i < model.num_constraints(); ++i) table << ",violation_slope_" << i + 1;
  table << "\n";
  for (std::size_t j = 0; j < algos.size(); ++j) {
    const RunHistory h = jobs[j].get();
    const fs::path csv = out_path(g, algos[j] + ".csv");
    write_history_csv(h, csv.string());
    const HistoryTable back = read_history_csv(csv.string());
    const std::vector<double> t = back.series("k");
    table << algos[j] << "," << format_decimal(back.series("avg_gap").back());
    for (int i = 0; i < model.num_constraints(); ++i)
      table << "," << format_decimal(back.series("avg_violation_" + std::to_string(i + 1)).back());
    table << "," << slope_text(t, back.series("avg_gap"));
    for (int i = 0; i < model.num_constraints(); ++i) {
      std::vector<double> v = back.series("avg_violation_" + std::to_string(i + 1));
      for (double& x : v) x = std::max(x, 0.0);
      table << "," << slope_text(t, v);
    }
    table << "\n";
    runs.emplace_back(algos[j], compute_metrics(h, gt, model.from_reward_form()));
  }
  write_text(out_path(g, "summary.csv"), table.str());
  if (!base.no_svg) write_plots(out_path(g, "compare"), runs, model.num_constraints());
  std::cout << table.str();
  return 0;
}

int cmd_sample_run(const Globals& g, const std::string& model_path, const std::string& gt_path,
                   SampleConfig config) {
  const CmdpModel model = read_model(model_path);
  const GroundTruth gt = load_or_solve(model, gt_path);
  if (gt.status != SolveStatus::optimal) throw ValidationError("model is infeasible");
  config.seed = g.seed;
  SampleRunLog log;
  RunHistory h = run_pmd_pd_a(model, config, &log, reference_of(gt));
  h.set_reference_value(gt.optimal_value);
  const fs::path csv = out_path(g, "pmd-pd-a.csv");
  write_history_csv(h, csv.string());
  for (const auto& w : h.warnings()) std::cerr << "warning: " << w << "\n";
  const MetricSeries ms = compute_metrics(h, gt, model.from_reward_form());
  std::printf("K %zu queries %lld closed_form %lld final_gap %.6e", h.size(), log.queries,
              log.closed_form_queries(), ms.gap.back());
  for (int i = 0; i < model.num_constraints(); ++i)
    std::printf(" violation_%d %.6e", i + 1, ms.violation[static_cast<std::size_t>(i)].back());
  std::printf("\n%s\n", csv.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular constrained MDP solvers"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "Directory for output files")->capture_default_str();
  app.add_option("--format", g.format, "History format")->check(CLI::IsMember({"csv"}));

  RandomCmdpSpec spec;
  std::optional<double> threshold;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a random CMDP model file");
  gen->add_option("--states", spec.num_states)->check(CLI::PositiveNumber);
  gen->add_option("--actions", spec.num_actions)->check(CLI::PositiveNumber);
  gen->add_option("--gamma", spec.gamma)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--constraints", spec.num_constraints)->check(CLI::NonNegativeNumber);
  gen->add_option("--cost-low", spec.cost_low);
  gen->add_option("--cost-high", spec.cost_high);
  gen->add_option("--threshold", threshold,
                  "Reward form: rewards/utilities in [0,1] with V_g >= threshold");
  gen->add_option("--out,-o", gen_out, "Model path (default: <output-dir>/model.json)");

  std::string model_path;
  std::string gt_path;
  std::string gt_out;
  auto* gtc = app.add_subcommand("ground-truth", "Solve the occupancy LP");
  gtc->add_option("--model,-m", model_path)->required()->check(CLI::ExistingFile);
  gtc->add_option("--out,-o", gt_out, "Output path (default: <output-dir>/<model>.gt)");

  std::string algo = "pmd-pd";
  SolverOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Run one algorithm and write its history");
  solve->add_option("--model,-m", model_path)->required()->check(CLI::ExistingFile);
  solve->add_option("--gt", gt_path, "Ground-truth file (default: solve the LP)")->check(CLI::ExistingFile);
  solve->add_option("--algo", algo)->check(CLI::IsMember({"pmd-pd", "pmd-pd-zero", "npg-pd", "crpo"}));
  add_solver_options(solve, solve_opts);

  std::string algos = "pmd-pd,npg-pd,crpo";
  SolverOptions cmp_opts;
  auto* cmp = app.add_subcommand("compare", "Run several algorithms in parallel and summarise");
  cmp->add_option("--model,-m", model_path)->required()->check(CLI::ExistingFile);
  cmp->add_option("--gt", gt_path)->check(CLI::ExistingFile);
  cmp->add_option("--algos", algos, "Comma-separated algorithm list")->capture_default_str();
  add_solver_options(cmp, cmp_opts);

  SampleConfig sample;
  std::optional<int> sample_k;
  auto* srun = app.add_subcommand("sample-run", "Sample-based PMD-PD-A with query accounting");
  srun->add_option("--model,-m", model_path)->required()->check(CLI::ExistingFile);
  srun->add_option("--gt", gt_path)->check(CLI::ExistingFile);
  srun->add_option("--epsilon", sample.epsilon)->check(CLI::PositiveNumber);
  srun->add_option("--delta", sample.delta_conf)->check(CLI::Range(0.0, 1.0));
  srun->add_option("--macro-steps,-K", sample_k, "Override K = ceil(1/epsilon)");
  srun->add_option("--c-k", sample.constants.k);
  srun->add_option("--c-t", sample.constants.t);
  srun->add_option("--c-nv", sample.constants.n_v);
  srun->add_option("--c-mv", sample.constants.m_v);
  srun->add_option("--c-mq", sample.constants.m_q);
  srun->add_option("--c-nq", sample.constants.n_q);

  for (auto* sub : {gen, gtc, solve, cmp, srun}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return cmd_generate(g, spec, threshold, gen_out);
    if (*gtc) return cmd_ground_truth(g, model_path, gt_out);
    if (*solve) return cmd_solve(g, model_path, gt_path, algo, solve_opts);
    if (*cmp) return cmd_compare(g, model_path, gt_path, algos, cmp_opts);
    if (*srun) {
      if (sample_k) sample.macro_steps = *sample_k;
      return cmd_sample_run(g, model_path, gt_path, sample);
    }
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
