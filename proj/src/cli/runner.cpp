#include "relprobe/cli/runner.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include "relprobe/autodiff/checkpoint.hpp"
#include "relprobe/cli/config.hpp"
#include "relprobe/encoders/rphs.hpp"
#include "relprobe/metrics/metrics.hpp"
#include "relprobe/trainer/trainer.hpp"
#include "relprobe/util/log.hpp"
#include "relprobe/verify/gradcheck_suite.hpp"

namespace relprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

template <class T>
struct Loaded {
  train::Dataset ds;
  train::ModelConfig model;
  std::shared_ptr<const train::StateMap<T>> states;
  std::optional<std::vector<synth::TruthEdge>> truth;
};

template <class T>
Loaded<T> load_data(const ExperimentConfig& cfg) {
  if (cfg.paths.prices.empty() || cfg.paths.articles.empty()) {
    throw ConfigError("paths.prices and paths.articles are required for this command");
  }
  for (const auto& p : {cfg.paths.prices, cfg.paths.articles}) {
    if (!fs::exists(p)) throw ConfigError("path does not exist: " + p.string());
  }
  Loaded<T> l;
  const auto prices = enc::read_prices_csv(cfg.paths.prices);
  auto articles = enc::read_news_jsonl(cfg.paths.articles, prices.tickers, cfg.model.encoder.vocab);
  l.model = cfg.model;
  if (l.model.tickers != prices.tickers.size()) {
    util::logger()->info("model universe set to the {} tickers in {}", prices.tickers.size(),
                         cfg.paths.prices.string());
    l.model.tickers = prices.tickers.size();
  }
  if (cfg.paths.hidden_states) {
    auto map = std::make_shared<train::StateMap<T>>();
    std::size_t dim = 0;
    for (const auto& e : enc::read_hidden_state_index(*cfg.paths.hidden_states)) {
      auto h = enc::load_hidden_states<T>(e.file);
      if (dim == 0) dim = h.dim();
      if (h.dim() != dim) {
        throw std::runtime_error("hidden states disagree on d: " + e.file.string() + " has " +
                                 std::to_string(h.dim()) + ", expected " + std::to_string(dim));
      }
      map->emplace(e.article_id, std::move(h));
    }
    if (dim == 0) throw std::runtime_error("hidden-state index lists no files");
    l.model.encoder.dim = dim;
    l.states = std::move(map);
  }
  l.ds = train::build_dataset(prices, std::move(articles), cfg.data);
  if (cfg.paths.truth_edges) l.truth = synth::read_truth_edges(*cfg.paths.truth_edges, l.ds.tickers);
  return l;
}

template <class T>
train::RelationalModel<T> make_model(const Loaded<T>& l, const train::ModelConfig& mc, std::uint64_t seed) {
  train::RelationalModel<T> m(mc, seed);
  if (l.states) m.use_imported_states(l.states);
  return m;
}

const std::vector<train::LabeledDay>& split_days(const train::Dataset& ds, const std::string& split,
                                                 std::vector<train::LabeledDay>& scratch) {
  if (split == "train") return ds.train;
  if (split == "val") return ds.val;
  if (split == "test") return ds.test;
  if (split == "all") {
    scratch = ds.train;
    scratch.insert(scratch.end(), ds.val.begin(), ds.val.end());
    scratch.insert(scratch.end(), ds.test.begin(), ds.test.end());
    return scratch;
  }
  throw UsageError("unknown split '" + split + "' (train, val, test, all)");
}

template <class T>
void write_predictions(const fs::path& path, const train::RelationalModel<T>& model,
                       const train::Dataset& ds, const std::vector<train::LabeledDay>& days) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(std::numeric_limits<T>::max_digits10);
  os << "date,ticker,p_neg,p_neu,p_pos\n";
  for (const auto& day : days) {
    const auto probs = model.forward(ds, day);
    const auto p = probs.value();
    for (std::size_t u = 0; u < ds.n_tickers(); ++u) {
      os << day.date << ',' << ds.tickers[u] << ',' << p[u * 3] << ',' << p[u * 3 + 1] << ','
         << p[u * 3 + 2] << '\n';
    }
  }
}

json edge_json(const synth::EdgeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

// Trains opts.runs models with seeds seed + i and writes one directory per run.
template <class T>
json train_runs(const ExperimentConfig& cfg, const Loaded<T>& l, const train::ModelConfig& mc,
                std::size_t runs, const fs::path& dir, std::ostream& out) {
  std::vector<metrics::EvalBundle> tests;
  std::vector<synth::EdgeScore> edges;
  json per_run = json::array();
  for (std::size_t i = 0; i < runs; ++i) {
    train::TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + i;
    const fs::path run_dir = dir / ("run" + std::to_string(i));
    fs::create_directories(run_dir);
    auto factory = [&] { return make_model<T>(l, mc, tc.seed); };
    auto result = train::train<T>(factory, l.ds, tc);
    auto model = factory();
    model.restore(result.best_params);
    double test_loss = 0;
    const auto test = train::evaluate_split(model, l.ds, l.ds.test, tc.class_weights, &test_loss);
    result.log.push_back({result.best_epoch, result.best_lr, "test", test, test_loss});
    train::write_log_csv(result.log, run_dir / "train_log.csv");
    ad::save_checkpoint(run_dir / "best.rpck", result.best_params);
    write_predictions(run_dir / "predictions.csv", model, l.ds, l.ds.test);
    json m = {{"seed", tc.seed},
              {"best_lr", result.best_lr},
              {"best_epoch", result.best_epoch},
              {"val", metrics::to_json(result.best_val)},
              {"test", metrics::to_json(test)}};
    if (l.truth) {
      const auto s = train::graph_recovery(model, l.ds, l.ds.test, *l.truth);
      m["edge_recovery"] = edge_json(s);
      edges.push_back(s);
    }
    write_json(run_dir / "metrics.json", m);
    out << "run " << i << " (seed " << tc.seed << "): test macro F1 " << test.macro_f1 << ", MCC "
        << test.mcc << ", best lr " << result.best_lr << " at epoch " << result.best_epoch << '\n';
    tests.push_back(test);
    per_run.push_back(m);
  }
  json agg = {{"runs", runs}, {"per_run", per_run}, {"mean_test", metrics::to_json(metrics::mean_bundle(tests))}};
  if (!edges.empty()) {
    synth::EdgeScore mean;
    for (const auto& e : edges) {
      mean.precision += e.precision / double(edges.size());
      mean.recall += e.recall / double(edges.size());
      mean.f1 += e.f1 / double(edges.size());
    }
    agg["mean_edge_recovery"] = edge_json(mean);
  }
  return agg;
}

std::vector<int> split_labels(const std::vector<train::LabeledDay>& days) {
  std::vector<int> labels;
  for (const auto& d : days)
    for (int y : d.labels)
      if (y >= 0) labels.push_back(y);
  return labels;
}

template <class T>
int run_typed(const RunOptions& opts, const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  if (opts.command == "train") {
    const auto l = load_data<T>(cfg);
    const auto agg = train_runs<T>(cfg, l, l.model, opts.runs, dir, out);
    write_json(dir / "aggregate.json", agg);
    out << "mean test macro F1 over " << opts.runs << " run(s): " << agg.at("mean_test").at("macro_f1").template get<double>()
        << "\nartifacts: " << dir.string() << '\n';
    return 0;
  }
  if (opts.command == "baseline") {
    const auto l = load_data<T>(cfg);
    json report;
    for (const auto& b : cfg.baselines) {
      if (b == "majority") {
        const auto m = metrics::majority_baseline(split_labels(l.ds.test));
        report["majority"] = metrics::to_json(m);
        out << "majority: accuracy " << m.accuracy << ", macro F1 " << m.macro_f1 << ", MCC " << m.mcc
            << ", AUC " << m.auc << '\n';
      } else {
        auto mc = l.model;
        mc.graph = train::GraphSource::Cooccurrence;
        report["cooccurrence"] = train_runs<T>(cfg, l, mc, opts.runs, dir / "cooccurrence", out);
      }
    }
    write_json(dir / "baseline.json", report);
    out << "artifacts: " << dir.string() << '\n';
    return 0;
  }
  if (opts.command == "evaluate") {
    const auto l = load_data<T>(cfg);
    std::vector<train::LabeledDay> scratch;
    const auto& days = split_days(l.ds, opts.split, scratch);
    metrics::EvalBundle b;
    if (opts.majority) {
      b = metrics::majority_baseline(split_labels(days));
    } else {
      if (!opts.checkpoint) throw UsageError("evaluate needs --checkpoint PATH or --majority");
      auto model = make_model<T>(l, l.model, cfg.train.seed);
      model.restore(ad::load_checkpoint(*opts.checkpoint));
      b = train::evaluate_split(model, l.ds, days, cfg.train.class_weights);
      write_predictions(dir / "predictions.csv", model, l.ds, days);
    }
    write_json(dir / "metrics.json", metrics::to_json(b));
    out << metrics::to_json(b).dump() << '\n';
    return 0;
  }
  if (opts.command == "build-graphs") {
    const auto l = load_data<T>(cfg);
    auto model = make_model<T>(l, l.model, cfg.train.seed);
    if (opts.checkpoint) model.restore(ad::load_checkpoint(*opts.checkpoint));
    std::vector<train::LabeledDay> scratch;
    const auto& days = split_days(l.ds, opts.split, scratch);
    fs::create_directories(dir / "graphs");
    json summary = {{"days", days.size()}};
    for (const auto& day : days) {
      graph::export_graph(model.day_graph(l.ds, day), l.ds.tickers, dir / "graphs" / (day.date + ".csv"));
    }
    if (l.truth) summary["edge_recovery"] = edge_json(train::graph_recovery(model, l.ds, days, *l.truth));
    write_json(dir / "graphs.json", summary);
    out << "wrote " << days.size() << " graphs to " << (dir / "graphs").string() << '\n';
    return 0;
  }
  throw UsageError("unknown subcommand '" + opts.command + "'");
}

}  // namespace

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.runs == 0) throw UsageError("--runs must be at least 1");
    static const std::set<std::string> known{"generate", "train", "evaluate", "build-graphs", "gradcheck", "baseline"};
    if (!known.count(opts.command)) throw UsageError("unknown subcommand '" + opts.command + "'");

    ExperimentConfig cfg;
    if (opts.config) cfg = load_config(*opts.config);
    else if (opts.command != "gradcheck" && opts.command != "generate") {
      throw UsageError(opts.command + " needs --config PATH");
    }
    const fs::path base = opts.out ? *opts.out : cfg.paths.output;
    json stamp = to_json(cfg);
    stamp["runs"] = opts.runs;
    stamp["split"] = opts.split;
    stamp["majority"] = opts.majority;
    stamp["checkpoint"] = opts.checkpoint ? opts.checkpoint->string() : "";
    const fs::path dir = base / (opts.command + "-" + fnv_hex(stamp.dump()));
    fs::create_directories(dir);
    write_json(dir / "config.json", to_json(cfg));

    if (opts.command == "gradcheck") {
      const auto entries = verify::run_gradcheck_suite();
      json report = json::array();
      for (const auto& e : entries) {
        json params = json::object();
        for (const auto& p : e.report.params) params[p.name] = p.max_rel_error;
        report.push_back({{"name", e.name}, {"pass", e.report.pass}, {"max_rel_error", params},
                          {"failing_ops", e.report.failing_ops}});
        double worst = 0;
        for (const auto& p : e.report.params) worst = std::max(worst, p.max_rel_error);
        out << (e.report.pass ? "PASS " : "FAIL ") << e.name << " max rel err " << worst << '\n';
        if (!e.report.pass) out << e.report.summary() << '\n';
      }
      write_json(dir / "gradcheck.json", report);
      return verify::all_pass(entries) ? 0 : 1;
    }
    if (opts.command == "generate") {
      synth::PlantedWorld world(cfg.world, cfg.world_seed);
      const auto corpus = world.generate(cfg.world_seed);
      synth::write_corpus(corpus, world.ticker_symbols(), dir / "data");
      out << "planted " << world.edges().size() << " directed edges (spectral radius "
          << world.spectral_radius() << "); wrote " << corpus.articles.size() << " articles to "
          << (dir / "data").string() << '\n';
      return 0;
    }
    return cfg.precision == Precision::Float32 ? run_typed<float>(opts, cfg, dir, out)
                                               : run_typed<double>(opts, cfg, dir, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Relational probing: relation head -> day graphs -> GAT trend classifier"};
  app.require_subcommand(1);
  RunOptions opts;
  std::string config, out, checkpoint;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)");
    sub->add_option("--runs", opts.runs, "Independent runs with seeds seed+i")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Base output directory (overrides paths.output)");
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"generate", "Write a planted-world corpus (prices, news, truth edges)"},
      {"train", "Train the configured model and report test metrics"},
      {"evaluate", "Evaluate a checkpoint (or the majority predictor) on a split"},
      {"build-graphs", "Export per-day edge CSVs"},
      {"gradcheck", "Finite-difference verification of every module"},
      {"baseline", "Majority and co-occurrence baselines"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    if (std::string(s.name) == "evaluate" || std::string(s.name) == "build-graphs") {
      sub->add_option("--checkpoint", checkpoint, "RPCK checkpoint to load");
      sub->add_option("--split", opts.split, "train, val, test or all");
    }
    if (std::string(s.name) == "evaluate") sub->add_flag("--majority", opts.majority, "Evaluate the majority predictor");
    sub->callback([&opts, name = std::string(s.name)] { opts.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (!config.empty()) opts.config = config;
  if (!out.empty()) opts.out = out;
  if (!checkpoint.empty()) opts.checkpoint = checkpoint;
  return run(opts, std::cout, std::cerr);
}

}  // namespace relprobe::cli
