// Command-line harness: single optimizer runs, the five-way comparison on the
// 2-d quadratic, the property verifier, and continuous-time integrations.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "grams/config.hpp"
#include "grams/report.hpp"
#include "grams/runner.hpp"
#include "grams/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw grams::IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const grams::RunConfig cfg = grams::parse_config(read_file(config_path));
  const grams::RunResult res = grams::run_single(cfg);

  const auto dir = grams::ensure_out_dir(out_dir);
  const auto csv_path = dir / (cfg.optimizer + "_" + cfg.objective + ".csv");
  grams::write_text_file(csv_path, grams::trajectory_csv(res.trajectory, cfg.optimizer));

  const grams::RunSummary& s = res.summary;
  std::cout << "run " << cfg.optimizer << " on " << cfg.objective << " for " << cfg.steps
            << " steps\n";
  std::cout << "  final_loss   " << grams::fmt_double(s.final_loss) << "\n";
  if (!std::isnan(s.final_dist))
    std::cout << "  final_dist   " << grams::fmt_double(s.final_dist) << "\n";
  std::cout << "  min_loss     " << grams::fmt_double(s.min_loss) << " at step "
            << s.argmin_step << "\n";
  std::cout << "  trajectory   " << csv_path.string() << "\n";
  if (s.aborted) {
    std::cerr << "run aborted: the iterate left the finite range\n";
    return 1;
  }
  return 0;
}

int cmd_compare(const std::string& init_text, long steps, const std::string& out_dir) {
  const grams::Vec init = grams::detail::parse_vector(init_text, 0, "--init");
  const grams::CompareResult cmp = grams::compare_optimizers(init, steps);

  const auto dir = grams::ensure_out_dir(out_dir);
  bool aborted = false;
  for (const auto& [name, run] : cmp.runs) {
    grams::write_text_file(dir / (name + ".csv"), grams::trajectory_csv(run.trajectory, name));
    aborted = aborted || run.summary.aborted;
  }
  grams::write_text_file(dir / "compare.svg", grams::compare_svg(cmp));
  const std::string ranking = grams::ranking_text(cmp);
  grams::write_text_file(dir / "ranking.txt", ranking);

  std::cout << ranking;
  std::cout << "wrote " << cmp.runs.size() << " trajectories, compare.svg and ranking.txt to "
            << dir.string() << "\n";
  if (aborted) {
    std::cerr << "compare: at least one run aborted\n";
    return 1;
  }
  if (!cmp.ordering_ok) {
    std::cerr << "compare: ORDERING VIOLATION: a baseline beat the sign-magnitude step\n";
    return 1;
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, long trials, const std::string& sabotage) {
  grams::VerifyOptions opts;
  opts.seed = seed;
  opts.trials = trials;
  if (!sabotage.empty()) {
    if (sabotage != "grams-sign")
      throw grams::ConfigError("unknown sabotage '" + sabotage + "' (expected: grams-sign)");
    opts.sabotage_grams_sign = true;
  }
  const grams::VerifyReport rep = grams::run_verify(opts);
  grams::print_verify(rep, std::cout);
  return rep.all_pass ? 0 : 1;
}

int cmd_ham(const std::string& variant, double dt, long steps, double a, double b,
            const std::string& out_dir) {
  grams::HamConfig cfg;
  if (variant == "standard") cfg.variant = grams::HamVariant::standard;
  else if (variant == "grams") cfg.variant = grams::HamVariant::grams;
  else cfg.variant = grams::HamVariant::cautious;
  cfg.dt = dt;
  cfg.steps = steps;
  cfg.a = a;
  cfg.b = b;
  const grams::HamResult res = grams::run_ham(cfg);

  const auto dir = grams::ensure_out_dir(out_dir);
  const auto csv_path = dir / ("ham_" + variant + ".csv");
  grams::write_text_file(csv_path, grams::ham_csv(res, variant, dt));

  std::cout << "ham " << variant << " dt=" << grams::fmt_double(dt) << " steps=" << steps
            << " a=" << grams::fmt_double(a) << " b=" << grams::fmt_double(b) << "\n";
  std::cout << "  H initial          " << grams::fmt_double(res.initial_H) << "\n";
  std::cout << "  H final            " << grams::fmt_double(res.final_H) << "\n";
  std::cout << "  max |H - H0|       " << grams::fmt_double(res.max_abs_drift) << "\n";
  std::cout << "  max step increase  " << grams::fmt_double(res.max_step_increase) << "\n";
  std::cout << "  final loss         " << grams::fmt_double(res.final_loss) << "\n";
  std::cout << "  final grad norm    " << grams::fmt_double(res.final_grad_H_norm) << "\n";
  std::cout << "  trajectory         " << csv_path.string() << "\n";
  if (res.trajectory.aborted) {
    std::cerr << "ham: integration aborted before completing all steps\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for sign-magnitude optimizer updates"};
  app.require_subcommand(1);

  std::string config_path, run_out = "out";
  CLI::App* run = app.add_subcommand("run", "run one optimizer from a config file");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--out-dir", run_out, "output directory");

  std::string cmp_init = "1,1", cmp_out = "out";
  long cmp_steps = 1000;
  CLI::App* cmp = app.add_subcommand("compare", "five-optimizer comparison on the 2-d quadratic");
  cmp->add_option("--init", cmp_init, "comma-separated starting point");
  cmp->add_option("--steps", cmp_steps, "number of steps")->check(CLI::PositiveNumber);
  cmp->add_option("--out-dir", cmp_out, "output directory");

  std::uint64_t v_seed = 42;
  long v_trials = 10000;
  std::string v_sabotage;
  CLI::App* ver = app.add_subcommand("verify", "run the property checks");
  ver->add_option("--seed", v_seed, "base seed");
  ver->add_option("--trials", v_trials, "samples for the battery checks")
      ->check(CLI::PositiveNumber);
  ver->add_option("--sabotage", v_sabotage, "deliberately break a rule to prove sensitivity");

  std::string h_variant, h_out = "out";
  double h_dt = 1e-3, h_a = 0.0, h_b = 0.0;
  long h_steps = 10000;
  CLI::App* ham = app.add_subcommand("ham", "integrate the continuous-time dynamics");
  ham->add_option("--variant", h_variant, "coupling field")
      ->required()
      ->check(CLI::IsMember({"standard", "grams", "cautious"}));
  ham->add_option("--dt", h_dt, "integrator step size");
  ham->add_option("--steps", h_steps, "number of integrator steps");
  ham->add_option("--a", h_a, "loss-gradient damping");
  ham->add_option("--b", h_b, "momentum damping");
  ham->add_option("--out-dir", h_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, run_out);
    if (*cmp) return cmd_compare(cmp_init, cmp_steps, cmp_out);
    if (*ver) return cmd_verify(v_seed, v_trials, v_sabotage);
    if (*ham) return cmd_ham(h_variant, h_dt, h_steps, h_a, h_b, h_out);
  } catch (const grams::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const grams::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
