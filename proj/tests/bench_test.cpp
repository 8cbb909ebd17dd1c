#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "grams/config.hpp"
#include "grams/report.hpp"
#include "grams/runner.hpp"

namespace {

namespace fs = std::filesystem;
using grams::ConfigError;
using grams::OptKind;
using grams::RunConfig;
using grams::Vec;

RunConfig parse(const std::string& text) { return grams::parse_config(text); }

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("grams_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GRAMS_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(ParseConfig, FullConfigRoundTrips) {
  const RunConfig cfg = parse(
      "# toy run\n"
      "optimizer = grams\n"
      "objective = toy2d\n"
      "lr = 0.01\n"
      "beta1 = 0.8\n"
      "beta2 = 0.95\n"
      "eps = 1e-7\n"
      "weight_decay = 0.1\n"
      "schedule = cosine\n"
      "warmup_steps = 5\n"
      "steps = 100\n"
      "seed = 9\n"
      "init = 0.5,-0.5\n"
      "grad_clip = 2.5\n");
  EXPECT_EQ(cfg.kind, OptKind::grams);
  EXPECT_EQ(cfg.objective, "toy2d");
  EXPECT_DOUBLE_EQ(cfg.hp.eta_base, 0.01);
  EXPECT_DOUBLE_EQ(cfg.hp.beta1, 0.8);
  EXPECT_DOUBLE_EQ(cfg.hp.beta2, 0.95);
  EXPECT_DOUBLE_EQ(cfg.hp.epsilon, 1e-7);
  EXPECT_DOUBLE_EQ(cfg.hp.weight_decay, 0.1);
  EXPECT_EQ(cfg.hp.schedule, grams::Schedule::cosine);
  EXPECT_EQ(cfg.hp.warmup_steps, 5);
  EXPECT_EQ(cfg.hp.total_steps, 100);
  EXPECT_EQ(cfg.steps, 100);
  EXPECT_EQ(cfg.seed, 9u);
  ASSERT_TRUE(cfg.init_values.has_value());
  EXPECT_DOUBLE_EQ((*cfg.init_values)[1], -0.5);
  EXPECT_DOUBLE_EQ(cfg.grad_clip, 2.5);
}

TEST(ParseConfig, FamilyDependentBetaDefaults) {
  const std::string base = "objective = toy2d\nlr = 0.01\nsteps = 10\nseed = 1\n";
  EXPECT_DOUBLE_EQ(parse("optimizer = adam\n" + base).hp.beta2, 0.999);
  EXPECT_DOUBLE_EQ(parse("optimizer = grams\n" + base).hp.beta2, 0.999);
  EXPECT_DOUBLE_EQ(parse("optimizer = lion\n" + base).hp.beta2, 0.99);
  EXPECT_DOUBLE_EQ(parse("optimizer = clion\n" + base).hp.beta2, 0.99);
  EXPECT_DOUBLE_EQ(parse("optimizer = rmsprop\n" + base).hp.beta2, 0.99);
  const RunConfig cfg = parse("optimizer = adam\n" + base);
  EXPECT_DOUBLE_EQ(cfg.hp.beta1, 0.9);
  EXPECT_DOUBLE_EQ(cfg.hp.epsilon, 1e-6);
  EXPECT_DOUBLE_EQ(cfg.hp.weight_decay, 0.0);
  EXPECT_EQ(cfg.hp.schedule, grams::Schedule::constant);
  EXPECT_EQ(cfg.init_preset, "default");
}

TEST(ParseConfig, ErrorsNameTheKeyAndLine) {
  const std::string base = "optimizer = adam\nobjective = toy2d\nlr = 0.01\nsteps = 10\nseed = 1\n";
  try {
    parse(base + "wormup_steps = 5\n");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("wormup_steps"), std::string::npos);
  }
  try {
    parse("optimizer = adam\nobjective = toy2d\nlr = fast\nsteps = 10\nseed = 1\n");
    FAIL() << "malformed number accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("lr"), std::string::npos);
  }
}

TEST(ParseConfig, RangeAndStructureErrors) {
  const std::string base = "optimizer = adam\nobjective = toy2d\nlr = 0.01\nsteps = 10\nseed = 1\n";
  EXPECT_THROW(parse("optimizer = adam\nobjective = toy2d\nlr = -0.1\nsteps = 10\nseed = 1\n"),
               ConfigError);
  EXPECT_THROW(parse("optimizer = adam\nobjective = toy2d\nlr = 0.01\nsteps = 0\nseed = 1\n"),
               ConfigError);
  EXPECT_THROW(parse(base + "beta1 = 1.0\n"), ConfigError);
  EXPECT_THROW(parse(base + "beta2 = -0.1\n"), ConfigError);
  EXPECT_THROW(parse(base + "eps = 0\n"), ConfigError);
  EXPECT_THROW(parse(base + "weight_decay = -1\n"), ConfigError);
  EXPECT_THROW(parse(base + "schedule = sawtooth\n"), ConfigError);
  EXPECT_THROW(parse(base + "schedule = constant-with-warmup\n"), ConfigError);  // no warmup_steps
  EXPECT_THROW(parse(base + "grad_clip = -2\n"), ConfigError);
  EXPECT_THROW(parse(base + "init = sideways\n"), ConfigError);
  EXPECT_THROW(parse(base + "lr = 0.02\n"), ConfigError);  // duplicate
  EXPECT_THROW(parse(base + "steps\n"), ConfigError);      // no equals sign
  EXPECT_THROW(parse("objective = toy2d\nlr = 0.01\nsteps = 10\nseed = 1\n"), ConfigError);
  EXPECT_THROW(parse(base + "optimizer = warp\n"), ConfigError);
  EXPECT_THROW(parse("optimizer = adam\nobjective = maze\nlr = 0.01\nsteps = 10\nseed = 1\n"),
               ConfigError);
}

TEST(ParseConfig, CommentsAndBlanksAreSkipped) {
  const RunConfig cfg = parse(
      "\n# header comment\n\noptimizer = adam   \n  objective = toy2d\n\nlr = 0.01\n"
      "steps = 10\n# tail\nseed = 1\n\n");
  EXPECT_EQ(cfg.optimizer, "adam");
  EXPECT_EQ(cfg.objective, "toy2d");
}

TEST(ObjectiveFactory, PresetsHaveTheDocumentedShapes) {
  RunConfig cfg;
  cfg.objective = "diag_quadratic";
  cfg.seed = 3;
  const grams::Objective dq = grams::make_objective(cfg);
  EXPECT_EQ(dq.dim, 3u);
  EXPECT_DOUBLE_EQ(*dq.L, 2.0);
  EXPECT_DOUBLE_EQ(*dq.mu, 0.02);
  cfg.objective = "logreg";
  EXPECT_EQ(grams::make_objective(cfg).dim, 4u);
  cfg.objective = "mlp";
  EXPECT_EQ(grams::make_objective(cfg).dim, 17u);
  cfg.objective = "rosenbrock";
  EXPECT_EQ(grams::make_objective(cfg).dim, 2u);
}

TEST(ResolveInit, PresetsAndExplicitValues) {
  RunConfig cfg;
  cfg.objective = "toy2d";
  cfg.seed = 5;
  const grams::Objective obj = grams::make_objective(cfg);

  cfg.init_preset = "zeros";
  EXPECT_EQ(grams::resolve_init(cfg, obj), Vec({0.0, 0.0}));
  cfg.init_preset = "ones";
  EXPECT_EQ(grams::resolve_init(cfg, obj), Vec({1.0, 1.0}));
  cfg.init_preset = "default";
  EXPECT_EQ(grams::resolve_init(cfg, obj), obj.default_init);

  cfg.init_preset = "random";
  const Vec r1 = grams::resolve_init(cfg, obj);
  const Vec r2 = grams::resolve_init(cfg, obj);
  EXPECT_EQ(r1, r2);  // same seed, same draw
  cfg.seed = 6;
  EXPECT_NE(grams::resolve_init(cfg, obj), r1);

  cfg.init_values = Vec{0.25, -0.75};
  EXPECT_EQ(grams::resolve_init(cfg, obj), Vec({0.25, -0.75}));
  cfg.init_values = Vec{1.0, 2.0, 3.0};
  EXPECT_THROW(grams::resolve_init(cfg, obj), ConfigError);
}

TEST(RunSingle, RecordsObserveTheStateBeforeEachStep) {
  RunConfig cfg;
  cfg.kind = OptKind::grams;
  cfg.optimizer = "grams";
  cfg.objective = "toy2d";
  cfg.hp.eta_base = 0.01;
  cfg.hp.weight_decay = 0.0;
  cfg.steps = 5;
  cfg.seed = 1;
  cfg.init_values = Vec{1.0, 1.0};
  const grams::RunResult res = grams::run_single(cfg);

  ASSERT_EQ(res.trajectory.size(), 5u);
  const grams::TrajectoryRecord& first = res.trajectory.front();
  EXPECT_EQ(first.step, 1);
  EXPECT_DOUBLE_EQ(first.loss, 0.26);  // loss at the starting point
  EXPECT_NEAR(first.grad_norm, std::sqrt(0.2504), 1e-15);
  EXPECT_NEAR(first.dist_to_opt, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(first.effective_lr, 0.01);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i)
    EXPECT_LT(res.trajectory[i].loss, res.trajectory[i - 1].loss);
  // the summary sees the post-step point the records have not logged yet
  EXPECT_LT(res.summary.final_loss, res.trajectory.back().loss);
  EXPECT_DOUBLE_EQ(res.summary.min_loss, res.summary.final_loss);
  EXPECT_EQ(res.summary.argmin_step, 5);
  EXPECT_FALSE(res.summary.aborted);
}

TEST(RunSingle, SingleStepAndStartAtTheMinimum) {
  RunConfig cfg;
  cfg.kind = OptKind::adam;
  cfg.optimizer = "adam";
  cfg.objective = "toy2d";
  cfg.hp.eta_base = 0.01;
  cfg.steps = 1;
  cfg.seed = 1;
  cfg.init_values = Vec{1.0, 1.0};
  EXPECT_EQ(grams::run_single(cfg).trajectory.size(), 1u);

  cfg.init_values = Vec{0.0, 0.0};
  cfg.steps = 20;
  for (const char* name : {"adam", "adamw", "grams", "lion", "cadam", "clion", "rmsprop"}) {
    cfg.optimizer = name;
    cfg.kind = grams::optimizer_from_name(name);
    const grams::RunResult res = grams::run_single(cfg);
    EXPECT_DOUBLE_EQ(res.summary.final_loss, 0.0) << name;
    EXPECT_DOUBLE_EQ(res.final_weights[0], 0.0) << name;
  }
}

TEST(RunSingle, GradientClipAffectsTheStepNotTheRecord) {
  RunConfig cfg;
  cfg.kind = OptKind::adam;
  cfg.optimizer = "adam";
  cfg.objective = "toy2d";
  cfg.hp.eta_base = 0.05;
  cfg.steps = 3;
  cfg.seed = 1;
  cfg.init_values = Vec{10.0, 10.0};
  const grams::RunResult plain = grams::run_single(cfg);
  cfg.grad_clip = 0.1;
  const grams::RunResult clipped = grams::run_single(cfg);
  // the raw gradient norm is what lands in the log
  EXPECT_DOUBLE_EQ(plain.trajectory[0].grad_norm, clipped.trajectory[0].grad_norm);
  EXPECT_GT(plain.trajectory[0].grad_norm, 0.1);
  // but the clipped run moves differently from step 2 on
  EXPECT_NE(plain.trajectory[2].loss, clipped.trajectory[2].loss);
}

TEST(RunSingle, DivergentRunAbortsWithTruncatedTrajectory) {
  RunConfig cfg;
  cfg.kind = OptKind::grams;
  cfg.optimizer = "grams";
  cfg.objective = "rosenbrock";
  cfg.hp.eta_base = 0.01;
  cfg.steps = 50;
  cfg.seed = 1;
  cfg.init_values = Vec{1e80, 1e80};  // gradient overflow on the first moment update
  const grams::RunResult res = grams::run_single(cfg);
  EXPECT_TRUE(res.summary.aborted);
  EXPECT_LT(res.trajectory.size(), 50u);
}

TEST(Compare, FiveRunsInOrderWithTheExpectedWinner) {
  const grams::CompareResult cmp = grams::compare_optimizers({1.0, 1.0}, 60);
  ASSERT_EQ(cmp.runs.size(), 5u);
  EXPECT_EQ(cmp.runs[0].first, "grams");
  EXPECT_EQ(cmp.runs[1].first, "adam");
  EXPECT_EQ(cmp.runs[2].first, "cadam");
  EXPECT_EQ(cmp.runs[3].first, "lion");
  EXPECT_EQ(cmp.runs[4].first, "clion");
  for (const auto& [name, run] : cmp.runs) EXPECT_EQ(run.trajectory.size(), 60u) << name;
  EXPECT_THROW(grams::compare_optimizers({1.0, 2.0, 3.0}, 10), ConfigError);
  EXPECT_THROW(grams::compare_optimizers({1.0, 1.0}, 0), ConfigError);
}

TEST(Csv, HeaderRowsAndRoundTrip) {
  RunConfig cfg;
  cfg.kind = OptKind::grams;
  cfg.optimizer = "grams";
  cfg.objective = "toy2d";
  cfg.hp.eta_base = 0.01;
  cfg.steps = 40;
  cfg.seed = 1;
  cfg.init_values = Vec{1.0, 1.0};
  const grams::RunResult res = grams::run_single(cfg);
  const std::string csv = grams::trajectory_csv(res.trajectory, "grams");

  std::istringstream in(csv);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "step,optimizer,loss,grad_norm,dist_to_opt,effective_lr");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ASSERT_FALSE(line.empty());
    EXPECT_EQ(line.find('\r'), std::string::npos);
    // loss is the third field; parsing it back must recover the exact double
    std::size_t p1 = line.find(','), p2 = line.find(',', p1 + 1), p3 = line.find(',', p2 + 1);
    const double loss = std::strtod(line.substr(p2 + 1, p3 - p2 - 1).c_str(), nullptr);
    EXPECT_DOUBLE_EQ(loss, res.trajectory[rows].loss);
    ++rows;
  }
  EXPECT_EQ(rows, res.trajectory.size());
}

TEST(Csv, UnknownOptimumLeavesTheDistanceFieldEmpty) {
  RunConfig cfg;
  cfg.kind = OptKind::adam;
  cfg.optimizer = "adam";
  cfg.objective = "logreg";
  cfg.hp.eta_base = 0.05;
  cfg.steps = 3;
  cfg.seed = 2;
  const grams::RunResult res = grams::run_single(cfg);
  const std::string csv = grams::trajectory_csv(res.trajectory, "adam");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  // ...,dist,effective_lr with dist empty means ",," before the last field
  const std::size_t last = line.rfind(',');
  EXPECT_EQ(line[last - 1], ',');
}

TEST(Csv, ShortestRoundTripFormatting) {
  EXPECT_EQ(grams::fmt_double(0.1), "0.1");
  EXPECT_EQ(grams::fmt_double(1.0), "1");
  EXPECT_EQ(grams::fmt_double(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(grams::fmt_double(1.0 / 3.0), "0.3333333333333333");
  const double awkward = 0.1 + 0.2;
  EXPECT_DOUBLE_EQ(std::strtod(grams::fmt_double(awkward).c_str(), nullptr), awkward);
}

TEST(Determinism, IdenticalInputsProduceByteIdenticalArtifacts) {
  const grams::CompareResult a = grams::compare_optimizers({1.0, 1.0}, 50);
  const grams::CompareResult b = grams::compare_optimizers({1.0, 1.0}, 50);
  EXPECT_EQ(grams::ranking_text(a), grams::ranking_text(b));
  for (std::size_t i = 0; i < a.runs.size(); ++i)
    EXPECT_EQ(grams::trajectory_csv(a.runs[i].second.trajectory, a.runs[i].first),
              grams::trajectory_csv(b.runs[i].second.trajectory, b.runs[i].first));
  EXPECT_EQ(grams::compare_svg(a), grams::compare_svg(b));
}

TEST(Cli, RunWritesTrajectoryAndSummary) {
  const fs::path dir = fresh_dir("run");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "optimizer = grams\nobjective = toy2d\nlr = 0.01\nsteps = 20\nseed = 3\n";
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out-dir " + (dir / "out").string() +
                    " > /dev/null"),
            0);
  const std::string csv = read_file(dir / "out" / "grams_toy2d.csv");
  EXPECT_EQ(csv.rfind("step,optimizer,loss", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Cli, BadConfigExitsWithUsageError) {
  const fs::path dir = fresh_dir("bad");
  const fs::path cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "optimizer = warp\nobjective = toy2d\nlr = 0.01\nsteps = 5\nseed = 1\n";
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --out-dir " + dir.string() +
                    " 2>/dev/null"),
            2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string() + " 2>/dev/null"), 2);
  EXPECT_EQ(run_cli("verify --trials 0 2>/dev/null"), 2);
  EXPECT_EQ(run_cli("verify --sabotage everything --trials 5 2>/dev/null"), 2);
  EXPECT_EQ(run_cli("ham --variant sideways 2>/dev/null"), 2);
}

TEST(Cli, CompareEmitsTheFullManifest) {
  const fs::path dir = fresh_dir("cmp");
  ASSERT_EQ(run_cli("compare --steps 30 --out-dir " + dir.string() + " > /dev/null"), 0);
  for (const char* f : {"grams.csv", "adam.csv", "cadam.csv", "lion.csv", "clion.csv",
                        "compare.svg", "ranking.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const std::string ranking = read_file(dir / "ranking.txt");
  EXPECT_NE(ranking.find("ranking by final loss"), std::string::npos);
  EXPECT_NE(ranking.find("grams"), std::string::npos);
  const std::string svg = read_file(dir / "compare.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
}

TEST(Cli, VerifyPassesCleanAndFailsSabotaged) {
  EXPECT_EQ(run_cli("verify --trials 200 > /dev/null"), 0);
  EXPECT_EQ(run_cli("verify --trials 200 --sabotage grams-sign > /dev/null"), 1);
}

TEST(Cli, HamWritesTheEnergyTrace) {
  const fs::path dir = fresh_dir("ham");
  ASSERT_EQ(run_cli("ham --variant grams --a 0.1 --b 0.1 --steps 50 --out-dir " + dir.string() +
                    " > /dev/null"),
            0);
  const std::string csv = read_file(dir / "ham_grams.csv");
  EXPECT_EQ(csv.rfind("step,optimizer,loss,grad_norm,dist_to_opt,effective_lr,H,variant", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 52);  // header + steps+1 rows
}

}  // namespace
