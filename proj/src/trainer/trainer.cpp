#include "relprobe/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "relprobe/autodiff/checkpoint.hpp"
#include "relprobe/trainer/adam.hpp"
#include "relprobe/util/log.hpp"

namespace relprobe::train {

namespace fs = std::filesystem;
using nlohmann::json;

template <class T>
SplitPredictions predict_split(const RelationalModel<T>& model, const Dataset& ds,
                               const std::vector<LabeledDay>& days, const ClassWeights& weights) {
  SplitPredictions out;
  double loss = 0;
  std::size_t counted = 0;
  for (const auto& day : days) {
    auto probs = model.forward(ds, day);
    const auto p = probs.value();
    bool any = false;
    for (std::size_t u = 0; u < day.labels.size(); ++u) {
      if (day.labels[u] < 0) continue;
      out.probs.push_back({double(p[u * 3]), double(p[u * 3 + 1]), double(p[u * 3 + 2])});
      out.labels.push_back(day.labels[u]);
      any = true;
    }
    if (any) {
      loss += double(weighted_ce(probs, day.labels, weights).item());
      ++counted;
    }
  }
  out.loss = counted ? loss / double(counted) : 0.0;
  return out;
}

template <class T>
metrics::EvalBundle evaluate_split(const RelationalModel<T>& model, const Dataset& ds,
                                   const std::vector<LabeledDay>& days, const ClassWeights& weights,
                                   double* loss) {
  const auto pred = predict_split(model, ds, days, weights);
  if (loss) *loss = pred.loss;
  return metrics::evaluate(pred.probs, pred.labels);
}

template <class T>
synth::EdgeScore graph_recovery(const RelationalModel<T>& model, const Dataset& ds,
                                const std::vector<LabeledDay>& days,
                                const std::vector<synth::TruthEdge>& truth) {
  synth::EdgeScore mean;
  for (const auto& day : days) {
    const auto s = synth::edge_recovery_score(model.day_graph(ds, day), truth);
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f1 += s.f1;
  }
  const double k = days.empty() ? 1.0 : double(days.size());
  mean.precision /= k;
  mean.recall /= k;
  mean.f1 /= k;
  return mean;
}

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t lr_index, std::size_t epoch) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (lr_index + 1)) ^ (0xc2b2ae3d27d4eb4fULL * (epoch + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json record_to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"lr", r.lr}, {"split", r.split},
          {"metrics", metrics::to_json(r.metrics)}, {"loss", r.loss}};
}

EpochRecord record_from_json(const json& j) {
  return {j.at("epoch").get<std::size_t>(), j.at("lr").get<double>(),
          j.at("split").get<std::string>(), metrics::bundle_from_json(j.at("metrics")),
          j.at("loss").get<double>()};
}

// Progress that survives a restart: where the sweep is and the best so far.
struct SweepState {
  std::size_t lr_index = 0;
  std::size_t epochs_done = 0;  // within the current learning rate
  double lr_best_f1 = -std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;
  bool have_best = false;
  double best_f1 = -std::numeric_limits<double>::infinity();
  double best_lr = 0;
  std::size_t best_epoch = 0;
  metrics::EvalBundle best_val;
  std::vector<EpochRecord> log;
};

void save_state(const fs::path& dir, const SweepState& s, const std::vector<ad::NamedArray>& last,
                const std::vector<ad::NamedArray>& best) {
  fs::create_directories(dir);
  ad::save_checkpoint(dir / "last.rpck", last);
  if (s.have_best) ad::save_checkpoint(dir / "best.rpck", best);
  json j;
  j["lr_index"] = s.lr_index;
  j["epochs_done"] = s.epochs_done;
  j["lr_best_f1"] = std::isfinite(s.lr_best_f1) ? json(s.lr_best_f1) : json(nullptr);
  j["bad_epochs"] = s.bad_epochs;
  j["have_best"] = s.have_best;
  j["best_f1"] = s.have_best ? json(s.best_f1) : json(nullptr);
  j["best_lr"] = s.best_lr;
  j["best_epoch"] = s.best_epoch;
  j["best_val"] = metrics::to_json(s.best_val);
  j["log"] = json::array();
  for (const auto& r : s.log) j["log"].push_back(record_to_json(r));
  const fs::path tmp = dir / "state.json.tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    os << j.dump(1) << '\n';
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, dir / "state.json");
}

SweepState load_state(const fs::path& dir) {
  std::ifstream is(dir / "state.json");
  const json j = json::parse(is);
  SweepState s;
  s.lr_index = j.at("lr_index").get<std::size_t>();
  s.epochs_done = j.at("epochs_done").get<std::size_t>();
  if (!j.at("lr_best_f1").is_null()) s.lr_best_f1 = j.at("lr_best_f1").get<double>();
  s.bad_epochs = j.at("bad_epochs").get<std::size_t>();
  s.have_best = j.at("have_best").get<bool>();
  if (s.have_best) s.best_f1 = j.at("best_f1").get<double>();
  s.best_lr = j.at("best_lr").get<double>();
  s.best_epoch = j.at("best_epoch").get<std::size_t>();
  s.best_val = metrics::bundle_from_json(j.at("best_val"));
  for (const auto& r : j.at("log")) s.log.push_back(record_from_json(r));
  return s;
}

}  // namespace

template <class T>
TrainResult train(const ModelFactory<T>& make_model, const Dataset& ds, const TrainConfig& cfg,
                  const std::optional<fs::path>& state_dir) {
  if (ds.train.empty() || ds.val.empty()) throw std::invalid_argument("train: empty train or validation split");
  if (cfg.lrs.empty()) throw std::invalid_argument("train: no learning rates");
  if (cfg.max_epochs == 0) throw std::invalid_argument("train: max_epochs must be positive");
  auto log = util::logger();

  SweepState s;
  std::vector<ad::NamedArray> best_params;
  bool resuming = false;
  if (state_dir && fs::exists(*state_dir / "state.json")) {
    s = load_state(*state_dir);
    if (s.have_best) best_params = ad::load_checkpoint(*state_dir / "best.rpck");
    resuming = s.epochs_done > 0;
    log->info("resuming at lr index {} after {} epochs", s.lr_index, s.epochs_done);
  }

  for (; s.lr_index < cfg.lrs.size(); ++s.lr_index) {
    const double lr = cfg.lrs[s.lr_index];
    auto model = make_model();
    Adam<T> adam(model.trainable());
    if (resuming) {
      const auto last = ad::load_checkpoint(*state_dir / "last.rpck");
      model.restore(last);
      adam.load_state(last);
      resuming = false;
    } else {
      s.epochs_done = 0;
      s.lr_best_f1 = -std::numeric_limits<double>::infinity();
      s.bad_epochs = 0;
    }
    bool stop = s.epochs_done >= cfg.max_epochs;
    while (!stop) {
      const std::size_t epoch = s.epochs_done + 1;
      std::vector<std::size_t> order(ds.train.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (cfg.shuffle_days) {
        std::mt19937_64 rng(epoch_seed(cfg.seed, s.lr_index, epoch));
        std::shuffle(order.begin(), order.end(), rng);
      }
      SplitPredictions seen;
      double loss_sum = 0;
      std::size_t steps = 0;
      for (std::size_t k : order) {
        const auto& day = ds.train[k];
        adam.zero_grad();
        auto probs = model.forward(ds, day);
        auto loss = weighted_ce(probs, day.labels, cfg.class_weights);
        if (!loss.requires_grad()) continue;
        const auto p = probs.value();
        for (std::size_t u = 0; u < day.labels.size(); ++u) {
          if (day.labels[u] < 0) continue;
          seen.probs.push_back({double(p[u * 3]), double(p[u * 3 + 1]), double(p[u * 3 + 2])});
          seen.labels.push_back(day.labels[u]);
        }
        ad::backward(loss);
        adam.step(lr);
        loss_sum += double(loss.item());
        ++steps;
      }
      if (steps == 0) throw std::invalid_argument("train: no labeled tickers in the train split");
      const auto train_m = metrics::evaluate(seen.probs, seen.labels);
      double val_loss = 0;
      const auto val_m = evaluate_split(model, ds, ds.val, cfg.class_weights, &val_loss);
      s.log.push_back({epoch, lr, "train", train_m, loss_sum / double(steps)});
      s.log.push_back({epoch, lr, "val", val_m, val_loss});
      log->info("lr {} epoch {}: train loss {:.4f} f1 {:.4f} | val loss {:.4f} f1 {:.4f}", lr, epoch,
                loss_sum / double(steps), train_m.macro_f1, val_loss, val_m.macro_f1);

      s.epochs_done = epoch;
      if (val_m.macro_f1 > s.lr_best_f1) {
        s.lr_best_f1 = val_m.macro_f1;
        s.bad_epochs = 0;
        if (!s.have_best || val_m.macro_f1 > s.best_f1) {
          s.have_best = true;
          s.best_f1 = val_m.macro_f1;
          s.best_lr = lr;
          s.best_epoch = epoch;
          s.best_val = val_m;
          best_params = model.snapshot();
        }
      } else {
        ++s.bad_epochs;
        if (s.bad_epochs >= cfg.patience) stop = true;
      }
      if (epoch >= cfg.max_epochs) stop = true;
      if (state_dir) {
        auto last = model.snapshot();
        auto st = adam.state();
        last.insert(last.end(), st.begin(), st.end());
        SweepState saved = s;
        if (stop) {
          // A finished learning rate resumes at the next one.
          ++saved.lr_index;
          saved.epochs_done = 0;
        }
        save_state(*state_dir, saved, last, best_params);
      }
    }
  }

  TrainResult r;
  r.best_lr = s.best_lr;
  r.best_epoch = s.best_epoch;
  r.best_val = s.best_val;
  r.log = std::move(s.log);
  r.best_params = std::move(best_params);
  return r;
}

void write_log_csv(const std::vector<EpochRecord>& log, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "epoch,lr,split,accuracy,macro_f1,mcc,auc,loss\n";
  for (const auto& r : log) {
    os << r.epoch << ',' << r.lr << ',' << r.split << ',' << r.metrics.accuracy << ','
       << r.metrics.macro_f1 << ',' << r.metrics.mcc << ',' << r.metrics.auc << ',' << r.loss << '\n';
  }
}

#define RELPROBE_INSTANTIATE_TRAINER(T)                                                              \
  template SplitPredictions predict_split(const RelationalModel<T>&, const Dataset&,                 \
                                          const std::vector<LabeledDay>&, const ClassWeights&);      \
  template metrics::EvalBundle evaluate_split(const RelationalModel<T>&, const Dataset&,             \
                                              const std::vector<LabeledDay>&, const ClassWeights&,   \
                                              double*);                                              \
  template synth::EdgeScore graph_recovery(const RelationalModel<T>&, const Dataset&,                \
                                           const std::vector<LabeledDay>&,                           \
                                           const std::vector<synth::TruthEdge>&);                    \
  template TrainResult train(const ModelFactory<T>&, const Dataset&, const TrainConfig&,             \
                             const std::optional<fs::path>&);

RELPROBE_INSTANTIATE_TRAINER(float)
RELPROBE_INSTANTIATE_TRAINER(double)

}  // namespace relprobe::train
