#include "relprobe/cli/config.hpp"

#include <fstream>
#include <set>

namespace relprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(where + ": unknown key '" + k + "' (allowed: " + list + ")");
    }
  }
}

template <class V>
void read(const json& obj, const char* key, V& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<V>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  reject_unknown(j, "config", {"paths", "world", "model", "threshold", "data", "train", "baselines", "precision"});

  if (j.contains("paths")) {
    const auto& p = j["paths"];
    reject_unknown(p, "paths", {"prices", "articles", "hidden_states", "truth_edges", "output"});
    std::string s;
    if (p.contains("prices")) { read(p, "prices", s, "paths"); c.paths.prices = resolve(base_dir, s); }
    if (p.contains("articles")) { read(p, "articles", s, "paths"); c.paths.articles = resolve(base_dir, s); }
    if (p.contains("hidden_states") && !p["hidden_states"].is_null()) {
      read(p, "hidden_states", s, "paths");
      c.paths.hidden_states = resolve(base_dir, s);
    }
    if (p.contains("truth_edges") && !p["truth_edges"].is_null()) {
      read(p, "truth_edges", s, "paths");
      c.paths.truth_edges = resolve(base_dir, s);
    }
    if (p.contains("output")) { read(p, "output", s, "paths"); c.paths.output = resolve(base_dir, s); }
  }

  if (j.contains("world")) {
    const auto& w = j["world"];
    reject_unknown(w, "world", {"seed", "tickers", "days", "articles_per_day", "article_len", "vocab",
                                "relation_vocab", "relation_tokens", "p_signal", "planted_share", "p_single_mention", "rho",
                                "spillover", "dormant_scale", "planted_pairs", "max_degree", "noise_std",
                                "start_date"});
    auto& x = c.world;
    read(w, "seed", c.world_seed, "world");
    read(w, "tickers", x.tickers, "world");
    read(w, "days", x.days, "world");
    read(w, "articles_per_day", x.articles_per_day, "world");
    read(w, "article_len", x.article_len, "world");
    read(w, "vocab", x.vocab, "world");
    read(w, "relation_vocab", x.relation_vocab, "world");
    read(w, "relation_tokens", x.relation_tokens, "world");
    read(w, "p_signal", x.p_signal, "world");
    read(w, "planted_share", x.planted_share, "world");
    read(w, "p_single_mention", x.p_single_mention, "world");
    read(w, "rho", x.rho, "world");
    read(w, "spillover", x.spillover, "world");
    read(w, "dormant_scale", x.dormant_scale, "world");
    read(w, "planted_pairs", x.planted_pairs, "world");
    read(w, "max_degree", x.max_degree, "world");
    read(w, "noise_std", x.noise_std, "world");
    read(w, "start_date", x.start_date, "world");
    x.validate();
  }
  // The model universe follows the world unless the model says otherwise.
  c.model.tickers = c.world.tickers;
  c.model.encoder.vocab = c.world.vocab;

  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, "model", {"variant", "graph", "context", "tickers", "vocab", "max_len", "dim",
                                "proj_dim", "node_dim", "gat_layers", "mode", "train_head"});
    auto& x = c.model;
    std::string s;
    try {
      if (m.contains("variant")) { read(m, "variant", s, "model"); x.variant = head::variant_from_string(s); }
      if (m.contains("graph")) { read(m, "graph", s, "model"); x.graph = train::graph_source_from_string(s); }
      if (m.contains("context")) { read(m, "context", s, "model"); x.context = enc::context_from_string(s); }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    read(m, "tickers", x.tickers, "model");
    read(m, "vocab", x.encoder.vocab, "model");
    read(m, "max_len", x.encoder.max_len, "model");
    read(m, "dim", x.encoder.dim, "model");
    read(m, "proj_dim", x.proj_dim, "model");
    read(m, "node_dim", x.node_dim, "model");
    read(m, "gat_layers", x.gat_layers, "model");
    if (m.contains("mode")) {
      read(m, "mode", s, "model");
      if (s == "joint") x.train_encoder = true;
      else if (s == "frozen") x.train_encoder = false;
      else throw ConfigError("model.mode: expected joint or frozen, got '" + s + "'");
    }
    read(m, "train_head", x.train_head, "model");
    if (x.tickers < 2 || x.encoder.dim == 0 || x.proj_dim == 0 || x.node_dim == 0 || x.gat_layers == 0) {
      throw ConfigError("model: tickers >= 2 and positive dims/layers required");
    }
  }

  if (j.contains("threshold")) {
    const auto& t = j["threshold"];
    reject_unknown(t, "threshold", {"tau", "zero_diagonal"});
    read(t, "tau", c.model.threshold.tau, "threshold");
    read(t, "zero_diagonal", c.model.threshold.zero_diagonal, "threshold");
  }

  if (j.contains("data")) {
    const auto& d = j["data"];
    reject_unknown(d, "data", {"window", "split", "train_only_std"});
    read(d, "window", c.data.window, "data");
    read(d, "split", c.data.split, "data");
    read(d, "train_only_std", c.data.train_only_std, "data");
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown(t, "train", {"lrs", "epochs", "patience", "class_weights", "seed", "shuffle_days"});
    read(t, "lrs", c.train.lrs, "train");
    read(t, "epochs", c.train.max_epochs, "train");
    read(t, "patience", c.train.patience, "train");
    read(t, "class_weights", c.train.class_weights, "train");
    read(t, "seed", c.train.seed, "train");
    read(t, "shuffle_days", c.train.shuffle_days, "train");
    if (c.train.lrs.empty()) throw ConfigError("train.lrs: at least one learning rate required");
    for (double lr : c.train.lrs)
      if (!(lr > 0)) throw ConfigError("train.lrs: learning rates must be positive");
    if (c.train.max_epochs == 0) throw ConfigError("train.epochs: must be positive");
  }

  if (j.contains("baselines")) {
    read(j, "baselines", c.baselines, "config");
    for (const auto& b : c.baselines) {
      if (b != "majority" && b != "cooccurrence") {
        throw ConfigError("baselines: unknown baseline '" + b + "' (majority, cooccurrence)");
      }
    }
  }

  if (j.contains("precision")) {
    std::string s;
    read(j, "precision", s, "config");
    if (s == "float32") c.precision = Precision::Float32;
    else if (s == "float64") c.precision = Precision::Float64;
    else throw ConfigError("precision: expected float32 or float64, got '" + s + "'");
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["paths"] = {{"prices", c.paths.prices.string()},
                {"articles", c.paths.articles.string()},
                {"hidden_states", c.paths.hidden_states ? json(c.paths.hidden_states->string()) : json(nullptr)},
                {"truth_edges", c.paths.truth_edges ? json(c.paths.truth_edges->string()) : json(nullptr)},
                {"output", c.paths.output.string()}};
  const auto& w = c.world;
  j["world"] = {{"seed", c.world_seed}, {"tickers", w.tickers}, {"days", w.days},
                {"articles_per_day", w.articles_per_day}, {"article_len", w.article_len},
                {"vocab", w.vocab}, {"relation_vocab", w.relation_vocab},
                {"relation_tokens", w.relation_tokens}, {"p_signal", w.p_signal},
                {"planted_share", w.planted_share},
                {"p_single_mention", w.p_single_mention}, {"rho", w.rho}, {"spillover", w.spillover},
                {"dormant_scale", w.dormant_scale}, {"planted_pairs", w.planted_pairs},
                {"max_degree", w.max_degree}, {"noise_std", w.noise_std}, {"start_date", w.start_date}};
  const auto& m = c.model;
  j["model"] = {{"variant", head::to_string(m.variant)}, {"graph", train::to_string(m.graph)},
                {"context", enc::to_string(m.context)}, {"tickers", m.tickers},
                {"vocab", m.encoder.vocab}, {"max_len", m.encoder.max_len}, {"dim", m.encoder.dim},
                {"proj_dim", m.proj_dim}, {"node_dim", m.node_dim}, {"gat_layers", m.gat_layers},
                {"mode", m.train_encoder ? "joint" : "frozen"}, {"train_head", m.train_head}};
  j["threshold"] = {{"tau", m.threshold.tau}, {"zero_diagonal", m.threshold.zero_diagonal}};
  j["data"] = {{"window", c.data.window}, {"split", c.data.split}, {"train_only_std", c.data.train_only_std}};
  j["train"] = {{"lrs", c.train.lrs}, {"epochs", c.train.max_epochs}, {"patience", c.train.patience},
                {"class_weights", c.train.class_weights}, {"seed", c.train.seed},
                {"shuffle_days", c.train.shuffle_days}};
  j["baselines"] = c.baselines;
  j["precision"] = c.precision == Precision::Float32 ? "float32" : "float64";
  return j;
}

}  // namespace relprobe::cli
