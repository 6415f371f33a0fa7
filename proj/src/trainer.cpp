#include "tipo/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tipo/error.hpp"
#include "tipo/rng.hpp"

namespace tipo {
namespace {

constexpr std::uint64_t kSftStream = 0x5f7;
constexpr std::uint64_t kPrefStream = 0x9e5;

class Sgd {
 public:
  Sgd(std::size_t n, double lr, double momentum) : lr_(lr), momentum_(momentum), velocity_(n, 0.0) {}

  void step(PolicyParams& params, const Gradient& grad) {
    auto w = params.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      velocity_[i] = momentum_ * velocity_[i] + grad[i];
      w[i] -= lr_ * velocity_[i];
    }
  }

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

void check_finite(double loss, int epoch, const char* stage) {
  if (!std::isfinite(loss)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s training diverged at epoch %d (loss=%g)", stage, epoch, loss);
    throw DivergenceError(buf);
  }
}

// Runs `epochs` passes of minibatch SGD; `loss_fn(params, batch)` returns
// LossGrad and `on_epoch(epoch, params)` may request an early stop.
template <typename T, typename LossFn, typename EpochFn>
void run_sgd(PolicyParams& params, std::vector<T> data, int epochs, double lr, const TrainConfig& cfg,
             std::uint64_t stream, LossFn&& loss_fn, EpochFn&& on_epoch) {
  Rng rng(hash_seed(cfg.seed, stream));
  Sgd opt(params.size(), lr, cfg.momentum);
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(data);
    for (std::size_t start = 0; start < data.size(); start += bs) {
      const std::size_t n = std::min(bs, data.size() - start);
      auto lg = loss_fn(params, std::span<const T>(data.data() + start, n));
      check_finite(lg.loss, epoch, "minibatch");
      opt.step(params, lg.grad);
      if (!params.all_finite()) check_finite(INFINITY, epoch, "parameter");
    }
    if (!on_epoch(epoch, params)) break;
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr_sft >= 0.0) || !std::isfinite(lr_sft) || !(lr_pref >= 0.0) || !std::isfinite(lr_pref))
    throw ConfigError("learning rates must be finite and non-negative");
  if (epochs_sft < 1 || epochs_pref < 1) throw ConfigError("epoch counts must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (eval_every < 1 || patience < 1) throw ConfigError("eval_every and patience must be positive");
  if (max_len < 1) throw ConfigError("max_len must be positive");
  objective.validate();
}

TrainResult train_sft(std::span<const SftExample> data, const TrainConfig& cfg,
                      const FeatureTemplate& tmpl) {
  cfg.validate();
  if (data.empty()) throw PreconditionError("train_sft: no training trajectories");
  TrainResult result{PolicyParams(tmpl), {}, 0, 0};
  auto full_loss = [&](const PolicyParams& p) { return sft_loss(p, data).loss; };

  const double initial = full_loss(result.params);
  result.log.push_back({0, "train", initial, 0.0, std::nullopt});
  run_sgd(result.params, std::vector<SftExample>(data.begin(), data.end()), cfg.epochs_sft,
          cfg.lr_sft, cfg, kSftStream,
          [](const PolicyParams& p, std::span<const SftExample> b) { return sft_loss(p, b); },
          [&](int epoch, const PolicyParams& p) {
            const double loss = full_loss(p);
            check_finite(loss, epoch, "sft");
            result.log.push_back({epoch, "train", loss, 0.0, std::nullopt});
            return true;
          });
  result.best_epoch = cfg.epochs_sft;
  return result;
}

TrainResult train_pref(const PolicyParams& sft_params, std::span<const PreparedPair> pairs,
                       const TrainConfig& cfg, std::span<const TaskRecord> val) {
  cfg.validate();
  if (cfg.objective.method == Method::sft)
    throw ConfigError("train_pref: objective 'sft' is not a preference objective");
  if (pairs.empty()) throw PreconditionError("train_pref: no preference pairs");
  if (!sft_params.all_finite()) throw PreconditionError("train_pref: non-finite starting params");

  const ReferencePolicy ref = clone_frozen(sft_params);
  TrainResult result{sft_params, {}, 0, checksum(ref.params())};
  auto full = [&](const PolicyParams& p) { return preference_loss(p, ref, pairs, cfg.objective); };

  const auto start = full(result.params);
  result.log.push_back({0, "train", start.loss, start.mean_z, std::nullopt});

  std::optional<PolicyParams> best;
  double best_compliance = -1.0;
  int stale = 0;
  run_sgd(result.params, std::vector<PreparedPair>(pairs.begin(), pairs.end()), cfg.epochs_pref,
          cfg.lr_pref, cfg, kPrefStream,
          [&](const PolicyParams& p, std::span<const PreparedPair> b) {
            return preference_loss(p, ref, b, cfg.objective);
          },
          [&](int epoch, const PolicyParams& p) {
            if (checksum(ref.params()) != result.reference_checksum)
              throw Error("reference policy changed during preference training");
            const auto lg = full(p);
            check_finite(lg.loss, epoch, "preference");
            result.log.push_back({epoch, "train", lg.loss, lg.mean_z, std::nullopt});
            if (val.empty() || epoch % cfg.eval_every != 0) return true;
            const auto ev = evaluate(p, val, cfg.max_len);
            result.log.push_back({epoch, "val", lg.loss, lg.mean_z, ev.overall.compliance});
            if (ev.overall.compliance > best_compliance) {
              best_compliance = ev.overall.compliance;
              best = p;
              result.best_epoch = epoch;
              stale = 0;
            } else if (++stale >= cfg.patience) {
              return false;
            }
            return true;
          });
  if (best) {
    result.params = std::move(*best);
  } else {
    result.best_epoch = result.log.back().epoch;
  }
  return result;
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  os << "epoch,split,loss,mean_z,compliance\n";
  char buf[64];
  for (const auto& e : log) {
    os << e.epoch << ',' << e.split << ',';
    std::snprintf(buf, sizeof buf, "%.9f", e.loss);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.9f", e.mean_z);
    os << buf << ',';
    if (e.compliance) {
      std::snprintf(buf, sizeof buf, "%.4f", *e.compliance);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace tipo
