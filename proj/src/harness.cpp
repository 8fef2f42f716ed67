#include "avlr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "avlr/csv.hpp"
#include "avlr/errors.hpp"

namespace avlr::harness {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "avlr 0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Avlr: return "avlr";
    case Method::AvlrMnar: return "avlr_mnar";
    case Method::Saem: return "saem";
    case Method::Mean: return "mean";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "avlr") return Method::Avlr;
  if (name == "avlr_mnar") return Method::AvlrMnar;
  if (name == "saem") return Method::Saem;
  if (name == "mean") return Method::Mean;
  throw ConfigError("unknown method: " + name);
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (methods.empty()) throw ConfigError("methods must be nonempty");
  if (data_path.empty()) {
    if (n_train < 2 || n_test < 2) throw ConfigError("n_train and n_test must be >= 2");
    gen_spec(n_train, 0).validate();
  } else if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (!(rate > 0.01 && rate < 0.99)) throw ConfigError("rate must lie in (0.01, 0.99)");
  if (impute_draws < 1) throw ConfigError("impute_draws must be >= 1");
  if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
  if (predict.s < 1) throw ConfigError("predict S must be >= 1");
  train.validate();
  saem.validate();
}

gen::GenSpec ExperimentConfig::gen_spec(int n, std::uint64_t seed) const {
  gen::GenSpec spec = gen::benchmark_spec(n, seed);
  if (!mu.empty()) {
    spec.d = static_cast<int>(mu.size());
    spec.mu = mu;
    if (sigma.size() != mu.size() || beta.size() != mu.size() + 1) {
      throw ConfigError("custom truth needs mu (d), sigma (d x d) and beta (d + 1)");
    }
    spec.sigma.resize(spec.d, spec.d);
    for (int i = 0; i < spec.d; ++i) {
      if (static_cast<int>(sigma[i].size()) != spec.d) throw ConfigError("sigma rows must have length d");
      for (int j = 0; j < spec.d; ++j) spec.sigma(i, j) = sigma[i][j];
    }
    spec.beta = beta;
  } else if (!sigma.empty() || !beta.empty()) {
    throw ConfigError("custom truth needs mu as well as sigma and beta");
  }
  return spec;
}

ExperimentConfig config_from_json(const std::string& text) {
  static const std::vector<std::string> allowed = {
      "data", "label", "test_fraction", "n_train", "n_test", "mu", "sigma", "beta", "mechanism", "rate",
      "calibrate", "methods", "train", "predict", "saem", "impute_draws", "eval_every", "reps", "seed", "out"};
  ExperimentConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("unknown config key: " + key);
      }
    }
    read_if(j, "data", cfg.data_path);
    read_if(j, "label", cfg.label);
    read_if(j, "test_fraction", cfg.test_fraction);
    read_if(j, "n_train", cfg.n_train);
    read_if(j, "n_test", cfg.n_test);
    read_if(j, "mu", cfg.mu);
    read_if(j, "sigma", cfg.sigma);
    read_if(j, "beta", cfg.beta);
    if (j.contains("mechanism")) cfg.mechanism = gen::parse_mechanism(j.at("mechanism").get<std::string>());
    read_if(j, "rate", cfg.rate);
    read_if(j, "calibrate", cfg.calibrate);
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      read_if(t, "epochs", cfg.train.epochs);
      read_if(t, "batch_size", cfg.train.batch_size);
      read_if(t, "lr", cfg.train.learning_rate);
      read_if(t, "k", cfg.train.k);
      read_if(t, "hidden", cfg.train.hidden);
    }
    if (j.contains("predict")) {
      const json& p = j.at("predict");
      read_if(p, "s", cfg.predict.s);
      read_if(p, "threshold", cfg.predict.threshold);
    }
    if (j.contains("saem")) {
      const json& s = j.at("saem");
      read_if(s, "max_iters", cfg.saem.max_iters);
      read_if(s, "tol", cfg.saem.tol);
      read_if(s, "burn_in", cfg.saem.burn_in);
      read_if(s, "step_exponent", cfg.saem.step_exponent);
      read_if(s, "mh_steps", cfg.saem.mh_steps);
    }
    read_if(j, "impute_draws", cfg.impute_draws);
    read_if(j, "eval_every", cfg.eval_every);
    read_if(j, "reps", cfg.reps);
    read_if(j, "seed", cfg.base_seed);
    read_if(j, "out", cfg.out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["data"] = cfg.data_path;
  j["label"] = cfg.label;
  j["test_fraction"] = cfg.test_fraction;
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  j["mu"] = cfg.mu;
  j["sigma"] = cfg.sigma;
  j["beta"] = cfg.beta;
  j["mechanism"] = gen::to_string(cfg.mechanism);
  j["rate"] = cfg.rate;
  j["calibrate"] = cfg.calibrate;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"lr", cfg.train.learning_rate},
                {"k", cfg.train.k},
                {"hidden", cfg.train.hidden}};
  j["predict"] = {{"s", cfg.predict.s}, {"threshold", cfg.predict.threshold}};
  j["saem"] = {{"max_iters", cfg.saem.max_iters},
               {"tol", cfg.saem.tol},
               {"burn_in", cfg.saem.burn_in},
               {"step_exponent", cfg.saem.step_exponent},
               {"mh_steps", cfg.saem.mh_steps}};
  j["impute_draws"] = cfg.impute_draws;
  j["eval_every"] = cfg.eval_every;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.base_seed;
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& metric_keys() {
  static const std::vector<std::string> keys = {"rmse_imp", "rmse_mu", "rmse_beta", "frobenius_cov",
                                                "auc", "accuracy", "precision", "recall", "f1", "brier",
                                                "train_seconds", "test_seconds"};
  return keys;
}

metrics::Summary ResultsTable::summary(std::size_t method_index, const std::string& key) const {
  std::vector<double> v;
  for (const RepResult& r : methods.at(method_index).reps) {
    if (r.failed) continue;
    const auto it = r.values.find(key);
    if (it != r.values.end() && std::isfinite(it->second)) v.push_back(it->second);
  }
  return metrics::summarize(v);
}

namespace {

struct RepData {
  Dataset train;
  Dataset test;
  std::optional<gen::GenSpec> truth;
  int forced_rows = 0;
};

RepData make_generated(const ExperimentConfig& cfg, std::uint64_t seed) {
  RepData rd;
  const gen::GenSpec train_spec = cfg.gen_spec(cfg.n_train, substream(seed, 1));
  const gen::GenSpec test_spec = cfg.gen_spec(cfg.n_test, substream(seed, 2));
  const gen::CompleteData tr = gen::gen_complete(train_spec);
  const gen::CompleteData te = gen::gen_complete(test_spec);
  gen::MechanismSpec mech = gen::make_mechanism(cfg.mechanism, train_spec.d, cfg.rate, substream(seed, 3));
  if (cfg.calibrate) mech = gen::calibrate_intercepts(tr.x, tr.y, mech);
  const gen::MaskDraw train_mask = gen::apply_mechanism(tr.x, tr.y, mech);
  mech.seed = substream(seed, 4);
  const gen::MaskDraw test_mask = gen::apply_mechanism(te.x, te.y, mech);
  rd.train = make_incomplete(tr.x, train_mask.mask, tr.y);
  rd.test = make_incomplete(te.x, test_mask.mask, te.y);
  rd.truth = train_spec;
  rd.forced_rows = train_mask.forced_rows + test_mask.forced_rows;
  return rd;
}

RepData make_ingested(const ExperimentConfig& cfg, const Dataset& source, std::uint64_t seed) {
  RepData rd;
  std::vector<int> order(source.rows());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(substream(seed, 1));
  std::shuffle(order.begin(), order.end(), rng);
  const int n_test = std::max(1, static_cast<int>(std::lround(cfg.test_fraction * source.rows())));
  if (n_test >= source.rows()) throw DataError("dataset too small to split");
  const std::vector<int> test_idx(order.begin(), order.begin() + n_test);
  const std::vector<int> train_idx(order.begin() + n_test, order.end());
  rd.train = source.subset(train_idx);
  rd.test = source.subset(test_idx);
  if (source.missing_count() == 0) {
    // Complete source: amputate with the configured mechanism and keep the truth.
    gen::MechanismSpec mech = gen::make_mechanism(cfg.mechanism, source.dim(), cfg.rate, substream(seed, 3));
    if (cfg.calibrate) mech = gen::calibrate_intercepts(rd.train.x, rd.train.y, mech);
    const gen::MaskDraw tm = gen::apply_mechanism(rd.train.x, rd.train.y, mech);
    mech.seed = substream(seed, 4);
    const gen::MaskDraw sm = gen::apply_mechanism(rd.test.x, rd.test.y, mech);
    auto names = source.feature_names;
    rd.train = make_incomplete(rd.train.x, tm.mask, rd.train.y);
    rd.test = make_incomplete(rd.test.x, sm.mask, rd.test.y);
    rd.train.feature_names = names;
    rd.test.feature_names = names;
    rd.forced_rows = tm.forced_rows + sm.forced_rows;
  }
  return rd;
}

struct Estimate {
  std::vector<double> beta;
  std::vector<double> mu;
  Eigen::MatrixXd sigma;
  std::optional<RowMatrix> imputed;
  std::vector<double> probs;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  std::vector<double> epoch_auc;
};

Estimate run_avlr(const ExperimentConfig& cfg, const RepData& rd, bool mnar, std::uint64_t seed) {
  Estimate e;
  train::TrainConfig tc = cfg.train;
  tc.mnar = mnar;
  tc.seed = substream(seed, 10);
  pred::PredictConfig pc = cfg.predict;
  pc.mnar = mnar;

  double hook_seconds = 0.0;
  train::EpochHook hook;
  if (cfg.eval_every > 0) {
    hook = [&](const train::FittedModel& m, train::EpochRecord& rec) {
      if ((rec.epoch + 1) % cfg.eval_every != 0) return;
      const auto start = std::chrono::steady_clock::now();
      const std::vector<double> p = pred::predict_dataset(m, rd.test, pc, substream(seed, 11));
      rec.eval_auc = metrics::auc(p, rd.test.y);
      e.epoch_auc.push_back(*rec.eval_auc);
      hook_seconds += seconds_since(start);
    };
  }
  auto start = std::chrono::steady_clock::now();
  const train::FitResult fr = train::fit(rd.train, tc, hook);
  e.train_seconds = seconds_since(start) - hook_seconds;

  start = std::chrono::steady_clock::now();
  e.probs = pred::predict_dataset(fr.model, rd.test, pc, substream(seed, 12));
  e.test_seconds = seconds_since(start);

  e.beta = fr.model.original_beta();
  e.mu = fr.model.original_mu();
  e.sigma = fr.model.original_covariance();
  if (rd.train.complete) e.imputed = pred::impute_dataset(fr.model, rd.train, cfg.impute_draws, substream(seed, 13));
  return e;
}

Estimate run_mean(const RepData& rd) {
  Estimate e;
  auto start = std::chrono::steady_clock::now();
  const base::MeanImputationModel m = base::fit_mean_imputation(rd.train);
  e.train_seconds = seconds_since(start);
  start = std::chrono::steady_clock::now();
  e.probs = base::predict_mean_imputation(m, rd.test);
  e.test_seconds = seconds_since(start);
  e.beta = m.beta;
  e.mu = m.means;
  e.sigma = m.covariance;
  e.imputed = base::mean_impute(rd.train, m.means);
  return e;
}

Estimate run_saem(const ExperimentConfig& cfg, const RepData& rd, std::uint64_t seed) {
  Estimate e;
  base::SaemConfig sc = cfg.saem;
  sc.seed = substream(seed, 20);
  auto start = std::chrono::steady_clock::now();
  const base::SaemResult fit = base::saem_fit(rd.train, sc);
  e.train_seconds = seconds_since(start);
  start = std::chrono::steady_clock::now();
  e.probs = base::saem_predict(fit, rd.test, cfg.predict.s, substream(seed, 21));
  e.test_seconds = seconds_since(start);
  e.beta = fit.beta;
  e.mu = fit.mu;
  e.sigma = fit.sigma;
  e.imputed = fit.imputed;
  return e;
}

std::map<std::string, double> score(const Estimate& e, const RepData& rd, const ExperimentConfig& cfg) {
  std::map<std::string, double> v;
  for (const auto& k : metric_keys()) v[k] = kNaN;
  if (rd.train.complete && e.imputed && rd.train.missing_count() > 0) {
    v["rmse_imp"] = metrics::rmse_masked(*e.imputed, *rd.train.complete, rd.train.mask);
  }
  if (rd.truth) {
    v["rmse_mu"] = metrics::rmse(e.mu, rd.truth->mu);
    v["rmse_beta"] = metrics::rmse(e.beta, rd.truth->beta);
    v["frobenius_cov"] = metrics::frobenius_diff(e.sigma, rd.truth->sigma);
  }
  v["auc"] = metrics::auc(e.probs, rd.test.y);
  std::vector<int> preds(e.probs.size());
  for (std::size_t i = 0; i < preds.size(); ++i) preds[i] = pred::classify(e.probs[i], cfg.predict.threshold);
  const metrics::Confusion c = metrics::confusion_metrics(preds, rd.test.y);
  v["accuracy"] = c.accuracy;
  v["precision"] = c.precision;
  v["recall"] = c.recall;
  v["f1"] = c.f1;
  v["brier"] = metrics::brier(e.probs, rd.test.y);
  v["train_seconds"] = e.train_seconds;
  v["test_seconds"] = e.test_seconds;
  return v;
}

}  // namespace

ResultsTable run_benchmark(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  ResultsTable table;
  table.provenance.config_json = config_to_json(cfg);
  table.provenance.config_hash = config_hash(cfg);
  table.provenance.version = std::string(kVersion) + " (" + __VERSION__ + ")";
  table.provenance.started = utc_now();
  for (Method m : cfg.methods) table.methods.push_back({m, {}});

  std::optional<Dataset> source;
  if (!cfg.data_path.empty()) {
    source = io::read_csv_dataset(cfg.data_path, cfg.label);
    if (log) {
      std::ostringstream msg;
      msg << "read " << source->rows() << " rows from " << cfg.data_path << "; missing rates:";
      for (int j = 0; j < source->dim(); ++j) {
        int miss = 0;
        for (int i = 0; i < source->rows(); ++i) miss += source->mask(i, j) == 0;
        msg << ' ' << source->feature_names[j] << '=' << static_cast<double>(miss) / source->rows();
      }
      log(msg.str());
    }
  }

  for (int r = 0; r < cfg.reps; ++r) {
    const std::uint64_t seed = rep_seed(cfg.base_seed, r);
    table.provenance.seeds.push_back(seed);
    const RepData rd = source ? make_ingested(cfg, *source, seed) : make_generated(cfg, seed);
    if (log && rd.forced_rows > 0) {
      log("rep " + std::to_string(r) + ": " + std::to_string(rd.forced_rows) +
          " all-missing rows forced to one observed entry");
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const Method m = cfg.methods[mi];
      RepResult res;
      res.rep = r;
      res.seed = seed;
      res.forced_rows = rd.forced_rows;
      for (const auto& k : metric_keys()) res.values[k] = kNaN;
      try {
        Estimate e;
        switch (m) {
          case Method::Avlr: e = run_avlr(cfg, rd, false, substream(seed, 100 + mi)); break;
          case Method::AvlrMnar: e = run_avlr(cfg, rd, true, substream(seed, 100 + mi)); break;
          case Method::Saem: e = run_saem(cfg, rd, substream(seed, 100 + mi)); break;
          case Method::Mean: e = run_mean(rd); break;
        }
        res.values = score(e, rd, cfg);
        res.epoch_auc = e.epoch_auc;
      } catch (const std::exception& ex) {
        res.failed = true;
        res.error = ex.what();
      }
      if (log) {
        std::ostringstream msg;
        msg << "rep " << r << " " << to_string(m) << ": ";
        if (res.failed) {
          msg << "FAILED (" << res.error << ")";
        } else {
          msg << "auc=" << res.values["auc"] << " rmse_beta=" << res.values["rmse_beta"]
              << " train=" << res.values["train_seconds"] << "s";
        }
        log(msg.str());
      }
      table.methods[mi].reps.push_back(std::move(res));
    }
  }
  table.provenance.finished = utc_now();
  return table;
}

namespace {

json value_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string cell_status(const ResultsTable& t, std::size_t mi, const std::string& key, const metrics::Summary& s) {
  const auto& reps = t.methods[mi].reps;
  const auto failed = std::count_if(reps.begin(), reps.end(), [](const RepResult& r) { return r.failed; });
  if (failed == static_cast<long>(reps.size())) return "failed";
  if (s.n == 0) return "unavailable";
  (void)key;
  return failed > 0 ? "partial" : "ok";
}

}  // namespace

std::string report_json(const ResultsTable& table) {
  json j;
  j["schema"] = "avlr-report/1";
  const Provenance& p = table.provenance;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.config_hash));
  j["provenance"] = {{"config_hash", hash},
                     {"config", json::parse(p.config_json)},
                     {"seeds", p.seeds},
                     {"version", p.version},
                     {"started", p.started},
                     {"finished", p.finished}};
  json methods = json::array();
  for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
    const MethodResult& mr = table.methods[mi];
    json row;
    row["method"] = to_string(mr.method);
    json cells = json::object();
    for (const auto& key : metric_keys()) {
      const metrics::Summary s = table.summary(mi, key);
      const std::string status = cell_status(table, mi, key, s);
      cells[key] = {{"mean", s.n ? json(s.mean) : json(nullptr)},
                    {"std", s.n ? json(s.std) : json(nullptr)},
                    {"n", s.n},
                    {"status", status}};
    }
    row["metrics"] = cells;
    json reps = json::array();
    for (const RepResult& r : mr.reps) {
      json rj;
      rj["rep"] = r.rep;
      rj["seed"] = r.seed;
      rj["status"] = r.failed ? "failed" : "ok";
      rj["error"] = r.error;
      rj["forced_rows"] = r.forced_rows;
      json vals = json::object();
      for (const auto& key : metric_keys()) vals[key] = value_or_null(r.values.at(key));
      rj["metrics"] = vals;
      rj["epoch_auc"] = r.epoch_auc;
      reps.push_back(rj);
    }
    row["reps"] = reps;
    methods.push_back(row);
  }
  j["methods"] = methods;
  return j.dump(2);
}

std::string report_text(const ResultsTable& table) {
  const auto& keys = metric_keys();
  std::vector<std::vector<std::string>> rows;
  bool any_partial = false;
  std::vector<std::string> header{"method"};
  header.insert(header.end(), keys.begin(), keys.end());
  rows.push_back(header);
  for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
    std::vector<std::string> row{to_string(table.methods[mi].method)};
    for (const auto& key : keys) {
      const metrics::Summary s = table.summary(mi, key);
      const std::string status = cell_status(table, mi, key, s);
      if (status == "failed") {
        row.push_back("failed");
      } else if (status == "unavailable") {
        row.push_back("n/a");
      } else {
        char buf[64];
        any_partial |= status == "partial";
        std::snprintf(buf, sizeof buf, "%.4f ± %.4f%s", s.mean, s.std, status == "partial" ? "*" : "");
        row.push_back(buf);
      }
    }
    rows.push_back(row);
  }
  // Column widths in code points so the ± sign does not skew alignment.
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  std::vector<std::size_t> w(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], width(row[c]));
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out << rows[r][c] << std::string(w[c] - width(rows[r][c]) + 2, ' ');
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c : w) total += c + 2;
      out << std::string(total, '-') << '\n';
    }
  }
  if (any_partial) out << "(* some repetitions failed; mean over the rest)\n";
  return out.str();
}

std::string model_to_json(const train::FittedModel& model) {
  json j;
  j["format"] = "avlr-model/1";
  j["d"] = model.params.theta.dim();
  j["hidden"] = model.params.phi.hidden;
  j["mnar"] = model.mnar;
  j["center"] = model.standardizer.center;
  j["scale"] = model.standardizer.scale;
  j["params"] = model.params.flatten();
  return j.dump();
}

train::FittedModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "avlr-model/1") throw ConfigError("unsupported model format");
    const int d = j.at("d").get<int>();
    const int hidden = j.at("hidden").get<int>();
    if (d < 1 || hidden < 1) throw ConfigError("model: bad dimensions");
    train::FittedModel m;
    m.mnar = j.at("mnar").get<bool>();
    m.standardizer.center = j.at("center").get<std::vector<double>>();
    m.standardizer.scale = j.at("scale").get<std::vector<double>>();
    if (static_cast<int>(m.standardizer.center.size()) != d || static_cast<int>(m.standardizer.scale.size()) != d) {
      throw ConfigError("model: standardizer size");
    }
    m.params.theta.beta.assign(d + 1, 0.0);
    m.params.theta.mu.assign(d, 0.0);
    m.params.theta.sigma_chol.assign(static_cast<std::size_t>(d) * (d + 1) / 2, 0.0);
    if (m.mnar) m.params.psi = model::MissParams::zeros(d);
    m.params.phi = enc::EncoderParams::zeros(d, hidden);
    const std::vector<double> flat = j.at("params").get<std::vector<double>>();
    if (flat.size() != m.params.size()) throw ConfigError("model: parameter count mismatch");
    m.params.assign(flat);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

}  // namespace avlr::harness
