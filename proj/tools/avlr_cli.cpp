// Command-line front end: generate, train, predict, evaluate, benchmark.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "avlr/csv.hpp"
#include "avlr/errors.hpp"
#include "avlr/harness.hpp"

using namespace avlr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

bool header_has(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return false;
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream cells(line);
  std::string cell;
  while (std::getline(cells, cell, ',')) {
    const auto lo = cell.find_first_not_of(" \t"), hi = cell.find_last_not_of(" \t");
    if (lo != std::string::npos && cell.substr(lo, hi - lo + 1) == column) return true;
  }
  return false;
}

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int reps = 5;
  std::string out;
  std::string label = "y";
  bool mnar = false;
  std::string mechanism = "MCAR";
  double rate = 0.5;
  int epochs = 150;
  int batch_size = 256;
  double lr = 1e-3;
  int k = 5;
  int s = 100;
  int hidden = 128;
  int n = 2000;
  std::string data;
  std::string model;
  std::string complete_out;
  std::vector<std::string> methods;
};

// Config file first, then any flag the user actually passed.
harness::ExperimentConfig build_config(const Flags& f, const CLI::App& app) {
  harness::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = harness::config_from_json(slurp(f.config));
  auto given = [&](const char* name) {
    const CLI::Option* opt = app.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) cfg.base_seed = f.seed;
  if (given("--reps")) cfg.reps = f.reps;
  if (given("--out")) cfg.out = f.out;
  if (given("--label")) cfg.label = f.label;
  if (given("--mechanism")) cfg.mechanism = gen::parse_mechanism(f.mechanism);
  if (given("--rate")) cfg.rate = f.rate;
  if (given("--epochs")) cfg.train.epochs = f.epochs;
  if (given("--batch-size")) cfg.train.batch_size = f.batch_size;
  if (given("--lr")) cfg.train.learning_rate = f.lr;
  if (given("--k")) cfg.train.k = f.k;
  if (given("--s")) cfg.predict.s = f.s;
  if (given("--hidden")) cfg.train.hidden = f.hidden;
  if (given("--n")) cfg.n_train = f.n;
  if (given("--data")) cfg.data_path = f.data;
  if (given("--methods")) {
    cfg.methods.clear();
    for (const auto& m : f.methods) cfg.methods.push_back(harness::parse_method(m));
  }
  if (given("--mnar")) {
    for (auto& m : cfg.methods) {
      if (m == harness::Method::Avlr) m = harness::Method::AvlrMnar;
    }
  }
  cfg.train.mnar = f.mnar;
  cfg.predict.mnar = f.mnar;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--seed", f.seed, "Base seed");
  app->add_option("--out", f.out, "Output path");
  app->add_option("--label", f.label, "Label column name");
  app->add_flag("--mnar", f.mnar, "Use the MNAR selection model");
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--batch-size", f.batch_size, "Mini-batch size");
  app->add_option("--lr", f.lr, "Adam learning rate");
  app->add_option("--k", f.k, "Importance samples per row during training");
  app->add_option("--s", f.s, "Importance samples per class at prediction");
  app->add_option("--hidden", f.hidden, "Encoder hidden width");
}

void write_metrics(const std::vector<double>& probs, const Dataset& data, double threshold, const std::string& out) {
  std::vector<int> preds(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) preds[i] = pred::classify(probs[i], threshold);
  const metrics::Confusion c = metrics::confusion_metrics(preds, data.y);
  nlohmann::json j;
  j["rows"] = data.rows();
  j["auc"] = metrics::auc(probs, data.y);
  j["accuracy"] = c.accuracy;
  j["precision"] = c.precision;
  j["precision_undefined"] = c.precision_undefined;
  j["recall"] = c.recall;
  j["recall_undefined"] = c.recall_undefined;
  j["f1"] = c.f1;
  j["brier"] = metrics::brier(probs, data.y);
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    spit(out, j.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Amortized variational logistic regression with missing covariates"};
  app.require_subcommand(1);
  Flags f;

  auto* generate = app.add_subcommand("generate", "Generate a synthetic incomplete dataset as CSV");
  add_common(generate, f);
  generate->add_option("--mechanism", f.mechanism, "MCAR, MAR, MNAR, SelfMask, LogisticMech, SeqLogistic");
  generate->add_option("--rate", f.rate, "Target missing rate per feature");
  generate->add_option("--n", f.n, "Number of rows");
  generate->add_option("--complete-out", f.complete_out, "Also write the complete covariates here");

  auto* train_cmd = app.add_subcommand("train", "Fit AV-LR on a CSV dataset");
  add_common(train_cmd, f);
  train_cmd->add_option("--data", f.data, "Training CSV")->required();

  auto* predict = app.add_subcommand("predict", "Predict P(y = 1) for each row of a CSV");
  add_common(predict, f);
  predict->add_option("--data", f.data, "Input CSV")->required();
  predict->add_option("--model", f.model, "Model JSON from train")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labelled CSV");
  add_common(evaluate, f);
  evaluate->add_option("--data", f.data, "Labelled CSV")->required();
  evaluate->add_option("--model", f.model, "Model JSON from train")->required();

  auto* bench = app.add_subcommand("benchmark", "Run a repeated experiment and write a report");
  add_common(bench, f);
  bench->add_option("--reps", f.reps, "Repetitions");
  bench->add_option("--mechanism", f.mechanism, "Missingness mechanism");
  bench->add_option("--rate", f.rate, "Target missing rate per feature");
  bench->add_option("--n", f.n, "Training rows");
  bench->add_option("--data", f.data, "CSV to ingest instead of generating");
  bench->add_option("--methods", f.methods, "Subset of avlr, avlr_mnar, saem, mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*generate) {
      const harness::ExperimentConfig cfg = build_config(f, *generate);
      if (f.out.empty()) throw ConfigError("generate needs --out");
      const gen::GenSpec spec = cfg.gen_spec(cfg.n_train, harness::substream(cfg.base_seed, 1));
      const gen::CompleteData cd = gen::gen_complete(spec);
      gen::MechanismSpec mech =
          gen::make_mechanism(cfg.mechanism, spec.d, cfg.rate, harness::substream(cfg.base_seed, 3));
      if (cfg.calibrate) mech = gen::calibrate_intercepts(cd.x, cd.y, mech);
      const gen::MaskDraw draw = gen::apply_mechanism(cd.x, cd.y, mech);
      if (draw.forced_rows > 0) {
        log_line(std::to_string(draw.forced_rows) + " all-missing rows forced to one observed entry");
      }
      io::write_csv_dataset(f.out, make_incomplete(cd.x, draw.mask, cd.y), cfg.label);
      if (!f.complete_out.empty()) io::write_csv_dataset(f.complete_out, make_complete(cd.x, cd.y), cfg.label);
      std::ostringstream rates;
      for (double r : gen::missing_rates(draw.mask)) rates << ' ' << r;
      log_line("wrote " + std::to_string(spec.n) + " rows; missing rates:" + rates.str());
    } else if (*train_cmd) {
      const harness::ExperimentConfig cfg = build_config(f, *train_cmd);
      const Dataset data = io::read_csv_dataset(f.data, cfg.label);
      train::TrainConfig tc = cfg.train;
      tc.seed = cfg.base_seed;
      const train::FitResult fr = train::fit(data, tc, [&](const train::FittedModel&, train::EpochRecord& rec) {
        if ((rec.epoch + 1) % 10 == 0 || rec.epoch + 1 == tc.epochs) {
          log_line("epoch " + std::to_string(rec.epoch + 1) + " loss " + std::to_string(rec.mean_loss));
        }
      });
      const std::string out = f.out.empty() ? "model.json" : f.out;
      spit(out, harness::model_to_json(fr.model) + "\n");
      log_line("wrote " + out);
    } else if (*predict || *evaluate) {
      const CLI::App& sub = *predict ? *predict : *evaluate;
      const harness::ExperimentConfig cfg = build_config(f, sub);
      const train::FittedModel model = harness::model_from_json(slurp(f.model));
      // predict accepts unlabelled files; a column named like the label is skipped.
      std::string label = cfg.label;
      if (*predict && sub.get_option("--label")->count() == 0 && !header_has(f.data, cfg.label)) label.clear();
      const Dataset data = io::read_csv_dataset(f.data, label);
      if (data.dim() != model.params.theta.dim()) throw DataError("data width differs from the model");
      pred::PredictConfig pc = cfg.predict;
      pc.mnar = model.mnar;
      const std::vector<double> probs = pred::predict_dataset(model, data, pc, cfg.base_seed);
      if (*evaluate) {
        write_metrics(probs, data, pc.threshold, f.out);
      } else {
        std::ostringstream csv;
        csv << "p1,class\n";
        for (double p : probs) csv << p << ',' << pred::classify(p, pc.threshold) << '\n';
        if (f.out.empty()) {
          std::cout << csv.str();
        } else {
          spit(f.out, csv.str());
        }
      }
    } else if (*bench) {
      const harness::ExperimentConfig cfg = build_config(f, *bench);
      const harness::ResultsTable table = harness::run_benchmark(cfg, log_line);
      const std::string out = cfg.out.empty() ? "report.json" : cfg.out;
      spit(out, harness::report_json(table) + "\n");
      std::cout << harness::report_text(table);
      log_line("wrote " + out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
