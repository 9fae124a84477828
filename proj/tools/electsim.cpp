// electsim: command-line front end for simulation, sweeps, fitting and
// regression. Every command reads an optional JSON config (--config), lets
// flags override its keys, and embeds the resolved settings under
// "invocation" in its JSON output. Passing that output back via --config
// re-runs the same command.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "elect/bisection.hpp"
#include "elect/errors.hpp"
#include "elect/experiment.hpp"
#include "elect/features.hpp"
#include "elect/mlp.hpp"
#include "elect/observed.hpp"
#include "elect/training.hpp"

using nlohmann::json;
using namespace elect;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class T>
T need(const json& inv, const char* key) {
  if (!inv.contains(key) || inv[key].is_null()) throw ValidationError(std::string("missing setting '") + key + "'");
  try {
    return inv[key].get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::uint64_t seed_of(const json& inv) { return inv.value("seed", std::uint64_t{0}); }

ObservedElection load_observed(const json& inv) {
  return ingest_observed(need<std::string>(inv, "input"), parse_format(inv.value("format", std::string("aggregate"))),
                         inv.value("scale", 0.01));
}

json with_invocation(json body, const json& inv) {
  body["invocation"] = inv;
  return body;
}

// --- commands ---------------------------------------------------------------

int cmd_simulate(const json& inv) {
  const ModelTag model = parse_model(need<std::string>(inv, "model"));
  const auto theta = with_residual_party(need<std::vector<double>>(inv, "theta"));
  const ElectionConfig config = make_config(need<int>(inv, "districts"), need<Count>(inv, "electors"), theta);
  const ParamVector params = param_vector_from_json(inv.at("params"), model);
  const VoteMatrix votes = simulate(config, params, seed_of(inv));
  std::ostringstream csv;
  write_vote_csv(csv, votes);
  const std::string out = inv.value("out", std::string());
  write_text(out, csv.str());
  if (!out.empty() && out != "-")
    write_json(out + ".json", with_invocation({{"summary", to_json(summarize(votes, config))}}, inv));
  return 0;
}

int cmd_sweep(const json& inv) {
  const ExperimentSpec spec = experiment_from_json(inv);
  const SweepReport report = run_sweep(spec);
  const std::string out = need<std::string>(inv, "out");
  std::ostringstream csv;
  write_sweep_csv(csv, report);
  write_text(out + ".csv", csv.str());
  write_json(out + ".json", with_invocation(to_json(report), inv));
  return 0;
}

int cmd_summarize(const json& inv) {
  const std::string input = need<std::string>(inv, "input");
  std::ifstream in(input);
  if (!in) throw IoError("cannot read " + input);
  const VoteMatrix votes = read_vote_csv(in);
  const ElectionConfig config = config_from_matrix(votes);
  const SummaryStats stats = summarize(votes, config);
  const ElectionOutcome outcome = tally(votes, config);
  write_json(inv.value("out", std::string()),
             with_invocation({{"summary", to_json(stats)}, {"winners", outcome.winners}}, inv));
  return 0;
}

int cmd_ingest(const json& inv) {
  write_json(inv.value("out", std::string()), with_invocation(to_json(load_observed(inv)), inv));
  return 0;
}

int cmd_fit(const json& inv) {
  const ObservedElection observed = load_observed(inv);
  const ModelTag model = parse_model(need<std::string>(inv, "model"));
  const FitSettings settings = fit_settings_from_json(inv);
  const FitOutcome fit = fit_observed(observed, model, settings, seed_of(inv));
  json body = to_json(fit.result, fit.prior);
  body["observed"] = to_json(observed);
  body["method"] = std::string(to_string(settings.method));
  if (fit.regressor_seed) body["regressor_seed"] = fit.regressor_seed->values;
  write_json(inv.value("out", std::string()), with_invocation(body, inv));
  return 0;
}

ConfigRanges ranges_from(const json& inv) {
  ConfigRanges r;
  r.parties = inv.value("parties", r.parties);
  r.min_districts = inv.value("min_districts", r.min_districts);
  r.max_districts = inv.value("max_districts", r.max_districts);
  r.min_electors = inv.value("min_electors", r.min_electors);
  r.max_electors = inv.value("max_electors", r.max_electors);
  if (inv.contains("theta") && !inv["theta"].is_null()) {
    r.theta = with_residual_party(inv["theta"].get<std::vector<double>>());
    r.parties = static_cast<int>(r.theta->size());
  }
  return r;
}

int cmd_train(const json& inv) {
  const ModelTag model = parse_model(need<std::string>(inv, "model"));
  const ConfigRanges ranges = ranges_from(inv);
  const PriorSpec prior = inv.contains("prior") && !inv["prior"].is_null() ? prior_from_json(inv["prior"])
                                                                            : PriorSpec::defaults(model, ranges.parties);
  const std::uint64_t seed = seed_of(inv);
  const TrainingSet train = generate_training_set(model, ranges, prior, inv.value("rows", 2000), derive_seed(seed, 0));
  if (inv.contains("training_out") && !inv["training_out"].is_null())
    write_training_set(train, inv["training_out"].get<std::string>());
  MlpSettings mlp;
  mlp.epochs = inv.value("epochs", mlp.epochs);
  mlp.batch = inv.value("batch", mlp.batch);
  mlp.learning_rate = inv.value("learning_rate", mlp.learning_rate);
  mlp.dropout = inv.value("dropout", mlp.dropout);
  std::vector<int> columns = inv.value("input_columns", std::vector<int>{});
  TrainReport report;
  const MlpModel regressor = mlp_train(train, mlp, derive_seed(seed, 1), columns, &report);
  json body = to_json(regressor);
  body["training"] = {{"rows", train.rows()},
                      {"initial_loss", report.initial_loss},
                      {"final_loss", report.final_loss},
                      {"best_epoch", report.best_epoch}};
  write_json(need<std::string>(inv, "out"), with_invocation(body, inv));
  return 0;
}

int cmd_predict(const json& inv) {
  const ObservedElection observed = load_observed(inv);
  const FeatureVector features = make_features(observed.stats, observed.config);
  json body;
  body["observed"] = to_json(observed);
  if (inv.contains("regressor") && !inv["regressor"].is_null()) {
    const MlpModel regressor = mlp_from_json(read_json_file(inv["regressor"].get<std::string>()));
    body["estimate"] = to_json(mlp_predict(regressor, features));
    body["method"] = "mlp";
  } else {
    const TrainingSet train = read_training_set(need<std::string>(inv, "training"));
    const BisectionResult r =
        bisection_estimate(train, features, inv.value("tol", 1e-3), inv.value("max_iter", 30));
    body["estimate"] = to_json(r.estimate);
    body["method"] = "bisection";
    body["iterations"] = r.iterations;
    body["warnings"] = r.warnings;
  }
  write_json(inv.value("out", std::string()), with_invocation(body, inv));
  return 0;
}

int cmd_extrapolate(const json& inv) {
  const ObservedElection target = load_observed(inv);
  const ModelTag model = parse_model(need<std::string>(inv, "model"));
  const ParamVector params = param_vector_from_json(inv.at("params"), model);
  const ReplicateStats stats = replicate(target.config, params, inv.value("replications", 30), seed_of(inv));
  json body = to_json(stats);
  body["observed"] = to_json(target);
  write_json(inv.value("out", std::string()), with_invocation(body, inv));
  return 0;
}

// Comma-separated numbers, e.g. "0.7,0.99".
std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ValidationError("not a number: '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic election models: simulation, sweeps, ABC fitting and regression"};
  app.require_subcommand(1);

  std::string config_path, model, out, input, format, method, params, theta, regressor, training;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  std::optional<int> replications;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Simulate one election and write its vote matrix CSV"},
      {"sweep", "Replicated simulations over a parameter grid (CSV + JSON)"},
      {"summarize", "Summary statistics of a vote matrix CSV"},
      {"ingest", "Parse an observed election into summary statistics"},
      {"fit", "Fit model parameters to an observed election by ABC"},
      {"train-regressor", "Generate a training set and train the MLP regressor"},
      {"predict", "Point estimate from a trained regressor or bisection"},
      {"extrapolate", "Simulate fitted parameters under a new election's vote shares"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON settings file (or a previous output to re-run)");
    sub->add_option("--model", model, "dpm | ecm | pcm");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--scale", scale, "Elector-count multiplier for aggregate records (default 0.01)");
    sub->add_option("--out", out, "Output path (prefix for sweep)");
    sub->add_option("--input", input, "Input file");
    sub->add_option("--format", format, "csv | aggregate");
    sub->add_option("--method", method, "rejection | explore-exploit | hybrid");
    sub->add_option("--params", params, "Comma-separated parameter values");
    sub->add_option("--theta", theta, "Comma-separated vote shares");
    sub->add_option("--replications", replications, "Runs per configuration");
    sub->add_option("--regressor", regressor, "Trained regressor JSON");
    sub->add_option("--training", training, "Training-set CSV for bisection");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json inv = json::object();
    if (!config_path.empty()) {
      inv = read_json_file(config_path);
      if (inv.contains("invocation")) inv = inv["invocation"];
      if (!inv.is_object()) throw ValidationError("config must be a JSON object");
    }
    inv["command"] = command;
    if (!model.empty()) inv["model"] = model;
    if (seed) inv["seed"] = *seed;
    if (scale) inv["scale"] = *scale;
    if (!out.empty()) inv["out"] = out;
    if (!input.empty()) inv["input"] = input;
    if (!format.empty()) inv["format"] = format;
    if (!method.empty()) inv["method"] = method;
    if (!params.empty()) inv["params"] = parse_list(params);
    if (!theta.empty()) inv["theta"] = parse_list(theta);
    if (replications) inv["replications"] = *replications;
    if (!regressor.empty()) inv["regressor"] = regressor;
    if (!training.empty()) inv["training"] = training;
    if (!inv.contains("scale") && (command == "ingest" || command == "fit" || command == "predict" ||
                                   command == "extrapolate"))
      inv["scale"] = 0.01;

    if (command == "simulate") return cmd_simulate(inv);
    if (command == "sweep") return cmd_sweep(inv);
    if (command == "summarize") return cmd_summarize(inv);
    if (command == "ingest") return cmd_ingest(inv);
    if (command == "fit") return cmd_fit(inv);
    if (command == "train-regressor") return cmd_train(inv);
    if (command == "predict") return cmd_predict(inv);
    return cmd_extrapolate(inv);
  } catch (const ValidationError& e) {
    std::cerr << "electsim " << command << ": " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "electsim " << command << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "electsim " << command << ": " << e.what() << '\n';
    return 1;
  }
}
