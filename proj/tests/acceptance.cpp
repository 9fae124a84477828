// Acceptance suite. Prints one PASS/FAIL line per criterion; with a criterion
// id argument (A1..A9) runs only that one. Exit status is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "elect/abc.hpp"
#include "elect/bisection.hpp"
#include "elect/errors.hpp"
#include "elect/experiment.hpp"
#include "elect/features.hpp"
#include "elect/mlp.hpp"
#include "elect/observed.hpp"
#include "elect/parallel.hpp"
#include "elect/training.hpp"

#ifndef ELECTSIM_PATH
#define ELECTSIM_PATH "electsim"
#endif
#ifndef DELHI_DATA_DIR
#define DELHI_DATA_DIR "data/delhi"
#endif

using namespace elect;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "!") << what;
  }
};

std::string fmt(double x, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

constexpr int kDistricts = 100;
constexpr Count kFullElectors = 1000000;
constexpr Count kDeskElectors = 100000;
constexpr int kRuns = 30;

ReplicateStats runs_at(ModelTag model, std::vector<double> params, double theta1, Count electors,
                       std::uint64_t seed, int runs = kRuns) {
  const ElectionConfig config = make_config(kDistricts, electors, {theta1, 1.0 - theta1});
  return replicate(config, ParamVector{model, std::move(params)}, runs, seed);
}

// A1: conservation over random (model, config, params, seed).
void a1(Verdict& v) {
  Rng rng(101);
  int violations = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto model = static_cast<ModelTag>(std::uniform_int_distribution<int>(0, 2)(rng));
    const int K = std::uniform_int_distribution<int>(2, 5)(rng);
    const int S = std::uniform_int_distribution<int>(1, 40)(rng);
    const Count N = std::uniform_int_distribution<Count>(S, 4000)(rng);
    std::vector<double> theta(static_cast<std::size_t>(K));
    std::exponential_distribution<double> expo(1.0);
    double sum = 0.0;
    for (auto& x : theta) sum += (x = expo(rng));
    for (auto& x : theta) x /= sum;
    const ElectionConfig config = make_config(S, N, theta);
    const ParamVector params = PriorSpec::defaults(model, K).sample(rng);
    try {
      simulate(config, params, rng()).check_against(config);
    } catch (const ValidationError&) {
      ++violations;
    }
  }
  v.check(violations == 0, std::to_string(trials) + " triples, " + std::to_string(violations) + " violations");
}

// A2: DPM table spot checks.
void a2(Verdict& v) {
  const auto low = runs_at(ModelTag::Dpm, {0.25}, 0.6, kFullElectors, 21);
  v.check(low.sweeps(0) >= 28, "g=0.25 t=0.6 sweeps " + std::to_string(low.sweeps(0)) + "/30");
  const double seats[] = {60, 70, 80};
  const double spread[] = {0.30, 0.31, 0.29};
  for (int i = 0; i < 3; ++i) {
    const double t = 0.6 + 0.1 * i;
    const auto r = runs_at(ModelTag::Dpm, {0.99}, t, kFullElectors, 22 + static_cast<std::uint64_t>(i));
    const double m = r.seats_mean()[0];
    const double sd = r.std_frac_mean()[0];
    v.check(within(m, seats[i], 4.0), "g=0.99 t=" + fmt(t, 1) + " seats " + fmt(m, 1) + " (" + fmt(seats[i], 0) + "+-4)");
    v.check(within(sd, spread[i], 0.06), "std " + fmt(sd, 3) + " (" + fmt(spread[i]) + "+-0.06)");
  }
}

// A3: ECM table spot checks.
void a3(Verdict& v) {
  const auto r1 = runs_at(ModelTag::Ecm, {1.0, 0.25}, 0.8, kFullElectors, 31);
  v.check(within(r1.seats_mean()[0], 84, 5), "a=1 b=0.25 t=0.8 seats " + fmt(r1.seats_mean()[0], 1) + " (84+-5)");
  v.check(within(r1.mwm_mean(), 0.88, 0.05), "MWM " + fmt(r1.mwm_mean(), 3) + " (0.88+-0.05)");
  const auto r2 = runs_at(ModelTag::Ecm, {10.0, 0.25}, 0.7, kFullElectors, 32);
  v.check(within(r2.seats_mean()[0], 95, 4), "a=10 b=0.25 t=0.7 seats " + fmt(r2.seats_mean()[0], 1) + " (95+-4)");
  v.check(within(r2.mwm_mean(), 0.70, 0.05), "MWM " + fmt(r2.mwm_mean(), 3) + " (0.70+-0.05)");
}

// A4: PCM table spot checks.
void a4(Verdict& v) {
  const auto r1 = runs_at(ModelTag::Pcm, {0.5, 0.5}, 0.6, kFullElectors, 41);
  v.check(r1.sweeps(0) >= 28, "eta=0.5 t=0.6 sweeps " + std::to_string(r1.sweeps(0)) + "/30");
  v.check(within(r1.mwm_mean(), 0.60, 0.03), "MWM " + fmt(r1.mwm_mean(), 3) + " (0.60+-0.03)");
  const auto r2 = runs_at(ModelTag::Pcm, {0.99, 0.99}, 0.7, kFullElectors, 42);
  v.check(within(r2.seats_mean()[0], 81, 5), "eta=0.99 t=0.7 seats " + fmt(r2.seats_mean()[0], 1) + " (81+-5)");
  v.check(within(r2.mwm_mean(), 0.76, 0.05), "MWM " + fmt(r2.mwm_mean(), 3) + " (0.76+-0.05)");
}

// A5: explore-exploit recovery with 500 simulations per fit.
void a5(Verdict& v) {
  struct Case {
    ModelTag model;
    std::vector<double> truth;
  };
  const Case cases[] = {{ModelTag::Dpm, {0.9}}, {ModelTag::Ecm, {5.0, 0.75}}, {ModelTag::Pcm, {0.7, 0.99}}};
  const ElectionConfig config = make_config(kDistricts, kDeskElectors, {0.6, 0.4});
  ExploreExploitSettings settings;  // 200 explore, 5 seeds, 300 exploit
  const int trials = 20;
  for (const auto& c : cases) {
    const ParamVector truth{c.model, c.truth};
    const PriorSpec prior = PriorSpec::defaults(c.model, 2);
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = derive_seed(500 + static_cast<std::uint64_t>(c.model), static_cast<std::uint64_t>(t));
      const AbcProblem problem{summarize(simulate(config, truth, derive_seed(seed, 0)), config), config, prior};
      const AbcResult r = abc_explore_exploit(problem, settings, derive_seed(seed, 1));
      bool ok = true;
      for (std::size_t d = 0; d < c.truth.size(); ++d) {
        const double est = r.psi_opt.values[d];
        ok = ok && (prior.ranges[d].log_scale ? est >= c.truth[d] / 2.0 && est <= c.truth[d] * 2.0
                                              : within(est, c.truth[d], 0.05));
      }
      hits += ok;
    }
    v.check(hits >= 16, std::string(to_string(c.model)) + " " + std::to_string(hits) + "/20");
  }
}

// A6: hybrid ECM fits of the Delhi assembly elections and extrapolation.
void a6(Verdict& v) {
  const std::filesystem::path dir = DELHI_DATA_DIR;
  FitSettings settings;
  settings.method = FitMethod::Hybrid;
  settings.training_rows = 5000;
  settings.n_exploit = 1000;
  struct Target {
    const char* year;
    double seats[3];
    double mwm;
  };
  const Target targets[] = {{"2013", {28, 34, 8}, 0.39}, {"2015", {67, 3, 0}, 0.55}, {"2020", {62, 8, 0}, 0.55}};
  ParamVector latest;
  for (const auto& t : targets) {
    const ObservedElection obs = ingest_observed(dir / (std::string(t.year) + ".json"), ObservedFormat::Aggregate, 0.01);
    const FitOutcome fit = fit_observed(obs, ModelTag::Ecm, settings, 600);
    const ReplicateStats r = replicate(obs.config, fit.result.psi_opt, kRuns, 601);
    const auto m = r.seats_mean();
    bool seats_ok = true;
    for (int k = 0; k < 3; ++k) seats_ok = seats_ok && within(m[static_cast<std::size_t>(k)], t.seats[k], 3.0);
    v.check(seats_ok, std::string(t.year) + " psi_opt=(" + fmt(fit.result.psi_opt.values[0], 1) + "," +
                          fmt(fit.result.psi_opt.values[1]) + ") seats (" + fmt(m[0], 1) + "," + fmt(m[1], 1) + "," +
                          fmt(m[2], 1) + ")");
    v.check(within(r.mwm_mean(), t.mwm, 0.05), "MWM " + fmt(r.mwm_mean(), 3));
    latest = fit.result.psi_opt;
  }
  // National elections are extrapolated with the most recent assembly fit.
  const ObservedElection y2014 = ingest_observed(dir / "2014.json", ObservedFormat::Aggregate, 0.01);
  const auto e14 = replicate(y2014.config, latest, kRuns, 602).seats_mean();
  v.check(within(e14[0], 10, 5) && within(e14[1], 60, 5) && within(e14[2], 0, 5),
          "2014 (" + fmt(e14[0], 1) + "," + fmt(e14[1], 1) + "," + fmt(e14[2], 1) + ")");
  const ObservedElection y2019 = ingest_observed(dir / "2019.json", ObservedFormat::Aggregate, 0.01);
  const auto e19 = replicate(y2019.config, latest, kRuns, 603).seats_mean();
  v.check(e19[1] >= 52, "2019 B=" + fmt(e19[1], 1));
}

// A7: seat shares are stable between N=1e5 and N=1e6. The per-run seat sd
// is about 3, so 100 runs per arm keep the standard error of the gap near 0.4.
void a7(Verdict& v) {
  const double small = runs_at(ModelTag::Dpm, {0.9}, 0.7, kDeskElectors, 71, 100).seats_mean()[0];
  const double large = runs_at(ModelTag::Dpm, {0.9}, 0.7, kFullElectors, 72, 100).seats_mean()[0];
  v.check(std::abs(small - large) < 3.0, "N=1e5 " + fmt(small, 1) + " vs N=1e6 " + fmt(large, 1));
}

// A8: gradient check, MLP hold-out error, bisection recovery.
void a8(Verdict& v) {
  {
    MlpModel model;
    model.layers = init_layers(std::vector<int>{7, 33, 38, 2}, 81);
    Rng rng(82);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(7, 16), y(2, 16);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    std::vector<DenseLayer> grad;
    mlp_loss(model, x, y, &grad);
    const auto analytic = flatten_parameters(grad);
    auto params = flatten_parameters(model.layers);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const auto i = std::uniform_int_distribution<std::size_t>(0, params.size() - 1)(rng);
      const double h = 1e-5;
      const double saved = params[i];
      params[i] = saved + h;
      assign_parameters(model.layers, params);
      const double up = mlp_loss(model, x, y);
      params[i] = saved - h;
      assign_parameters(model.layers, params);
      const double down = mlp_loss(model, x, y);
      params[i] = saved;
      assign_parameters(model.layers, params);
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(numeric - analytic[i]) / std::max(1e-8, std::abs(numeric) + std::abs(analytic[i])));
    }
    v.check(worst < 1e-4, "grad rel err " + fmt(worst * 1e6, 3) + "e-6");
  }
  {
    ConfigRanges ranges;
    ranges.parties = 2;
    ranges.min_districts = 50;
    ranges.max_districts = 100;
    ranges.min_electors = 10000;
    ranges.max_electors = 100000;
    const PriorSpec prior = PriorSpec::defaults(ModelTag::Dpm, 2);
    const TrainingSet train = generate_training_set(ModelTag::Dpm, ranges, prior, 5000, 83);
    const TrainingSet test = generate_training_set(ModelTag::Dpm, ranges, prior, 500, 84);
    const MlpModel model = mlp_train(train, MlpSettings{}, 85);
    double mae = 0.0;
    for (int i = 0; i < test.rows(); ++i) {
      FeatureVector f;
      for (Eigen::Index c = 0; c < test.features.cols(); ++c) f.values.push_back(test.features(i, c));
      f.available.assign(f.values.size(), true);
      mae += std::abs(mlp_predict(model, f).values[0] - test.targets(i, 0));
    }
    mae /= test.rows();
    v.check(mae < 0.15, "MLP hold-out MAE " + fmt(mae, 3));
  }
  {
    ConfigRanges ranges;
    ranges.parties = 2;
    ranges.theta = std::vector<double>{0.6, 0.4};
    const PriorSpec prior = PriorSpec::defaults(ModelTag::Dpm, 2);
    const TrainingSet train = generate_training_set(ModelTag::Dpm, ranges, prior, 2000, 86);
    const ElectionConfig config = make_config(kDistricts, kDeskElectors, {0.6, 0.4});
    Rng rng(87);
    int hits = 0;
    for (int t = 0; t < 20; ++t) {
      const ParamVector truth = prior.sample(rng);
      const SummaryStats obs = summarize(simulate(config, truth, rng()), config);
      const auto est = bisection_estimate(train, make_features(obs, config), 1e-3, 30);
      hits += within(est.estimate.values[0], truth.values[0], 0.1);
    }
    v.check(hits >= 16, "bisection " + std::to_string(hits) + "/20");
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A9: byte-identical outputs on rerun, across worker counts.
void a9(Verdict& v) {
  const auto dir = std::filesystem::temp_directory_path() / "elect_acceptance_a9";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "sweep.json") << R"({"model":"pcm","districts":40,"electors":20000,)"
                                         R"("theta":[[0.6,0.4],[0.7,0.3]],"params":[[0.5,0.9],[0.99,0.99]],)"
                                         R"("replications":8})";
    std::ofstream(dir / "fit.json") << R"({"n_proposals":200,"accept_quantile":0.1})";
    std::ofstream(dir / "train.json") << R"({"rows":300,"epochs":5,"min_districts":20,"max_districts":40,)"
                                         R"("min_electors":5000,"max_electors":20000})";
  }
  const std::string exe = ELECTSIM_PATH;
  const std::string data = DELHI_DATA_DIR;
  const std::vector<std::string> commands = {
      "sweep --config " + (dir / "sweep.json").string() + " --seed 9 --out {out}",
      "fit --config " + (dir / "fit.json").string() + " --method rejection --model ecm --seed 9 --input " + data +
          "/2020.json --out {out}.json",
      "train-regressor --config " + (dir / "train.json").string() + " --model dpm --seed 9 --out {out}.json",
      "simulate --model ecm --theta 0.5,0.3 --params 5,0.5 --seed 9 --config " + (dir / "sweep.json").string() +
          " --out {out}.csv",
  };
  int mismatches = 0;
  int failures = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4", "4"}) {
      const auto stem = (dir / ("run" + std::to_string(c) + "_" + std::to_string(outputs.size()))).string();
      std::string cmd = commands[c];
      cmd.replace(cmd.find("{out}"), 5, stem);
      const std::string line = std::string("ELECT_THREADS=") + threads + " " + exe + " " + cmd + " > /dev/null";
      if (std::system(line.c_str()) != 0) ++failures;
      std::string bytes;
      for (const auto& ext : {".csv", ".json", ".csv.json"}) bytes += slurp(stem + ext);
      // Outputs name their own path in the embedded invocation; compare without it.
      for (std::size_t pos; (pos = bytes.find(stem)) != std::string::npos;) bytes.replace(pos, stem.size(), "OUT");
      outputs.push_back(bytes);
    }
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[1] != outputs[2]) ++mismatches;
  }
  v.check(failures == 0, std::to_string(failures) + " command failures");
  v.check(mismatches == 0, std::to_string(commands.size()) + " commands x {1,4,4} threads, " +
                               std::to_string(mismatches) + " mismatches");

  set_worker_count(1);
  const auto one = to_json(run_sweep(experiment_from_json(nlohmann::json::parse(slurp(dir / "sweep.json")))));
  set_worker_count(4);
  const auto four = to_json(run_sweep(experiment_from_json(nlohmann::json::parse(slurp(dir / "sweep.json")))));
  set_worker_count(0);
  v.check(one.dump() == four.dump(), "library sweep 1 vs 4 workers");
  std::filesystem::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}};
  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (argc > 1 && std::find(argv + 1, argv + argc, id) == argv + argc) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s [%.1fs] %s\n", id.c_str(), v.pass ? "PASS" : "FAIL", secs, v.detail.str().c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
