#include "fieldctr/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"
#include "fieldctr/metrics.hpp"
#include "fieldctr/rng.hpp"

namespace fieldctr {

AdamState AdamState::init(const ParamStore& params) {
  AdamState state;
  state.m = params.zeros_like();
  state.v = params.zeros_like();
  state.t = 0;
  return state;
}

namespace {

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double instance_bce(double logit, std::uint8_t label) {
  return softplus(logit) - (label ? logit : 0.0);
}

void check_enhancement_inputs(const ModelBundle& bundle,
                              const EnhancementInputs& enh) {
  if (enh.fre.active()) {
    if (enh.field_embeddings == nullptr || !bundle.has_fre_adaptor) {
      throw Error("training: FRE active but adaptor or field embeddings missing");
    }
  }
  if (enh.fie.active()) {
    if (enh.raw_interactions == nullptr || !bundle.has_fie_rescale) {
      throw Error("training: FIE active but rescale or interaction matrix missing");
    }
  }
}

}  // namespace

double bce_with_logits(std::span<const std::uint8_t> labels,
                       std::span<const double> logits,
                       std::span<double> grad_out) {
  if (labels.empty()) throw Error("bce: empty batch");
  if (labels.size() != logits.size()) {
    throw Error("bce: labels and logits differ in length");
  }
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += instance_bce(logits[i], labels[i]);
    if (!grad_out.empty()) {
      grad_out[i] = (predict(logits[i]) - static_cast<double>(labels[i])) * inv_n;
    }
  }
  return sum * inv_n;
}

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state,
               const TrainConfig& cfg) {
  state.t += 1;
  kernels::AdamScalars s;
  s.lr = cfg.learning_rate;
  s.beta1 = AdamState::kBeta1;
  s.beta2 = AdamState::kBeta2;
  s.eps = AdamState::kEps;
  s.inv_bias1 =
      1.0 / (1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.t)));
  s.inv_bias2 =
      1.0 / (1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.t)));
  s.weight_decay = cfg.weight_decay;
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& p = params.at(i);
    kernels::adam_update(p.data.data(), grads.at(i).data.data(),
                         state.m.at(i).data.data(), state.v.at(i).data.data(),
                         p.numel(), s);
  }
}

double forward_logit(const ModelBundle& bundle, const Instance& instance,
                     ForwardCache& cache, const EnhancementInputs& enh) {
  double logit = backbone_forward(bundle, instance, cache);
  cache.fie_plugin = 0.0;
  if (enh.fie.active()) {
    const double scale = bundle.params.get("fie/scale").data[0];
    const double shift = bundle.params.get("fie/shift").data[0];
    cache.fie_plugin = fie_pair_sum_rescaled(
        instance, cache.emb, *enh.raw_interactions, scale, shift, bundle.D);
    logit += enh.fie.lambda_fm * cache.fie_plugin;
  }
  cache.logit_total = logit;
  return logit;
}

std::vector<double> predict_dataset(const ModelBundle& bundle,
                                    const Dataset& dataset,
                                    const EnhancementInputs& enh) {
  check_enhancement_inputs(bundle, enh);
  std::vector<double> probs(dataset.size());
  ForwardCache cache;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    probs[i] = predict(forward_logit(bundle, dataset.instances[i], cache, enh));
  }
  return probs;
}

double batch_loss(const ModelBundle& bundle, const Dataset& dataset,
                  std::span<const std::size_t> batch,
                  const EnhancementInputs& enh, double* bce_out,
                  double* kl_out) {
  if (batch.empty()) throw Error("batch_loss: empty batch");
  check_enhancement_inputs(bundle, enh);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  FreWorkspace ws;
  const bool fre = enh.fre.active();
  if (fre) ws.prepare(bundle, *enh.field_embeddings);

  double bce = 0.0, kl = 0.0;
  for (std::size_t idx : batch) {
    const Instance& inst = dataset.instances[idx];
    const double logit = forward_logit(bundle, inst, cache, enh);
    bce += instance_bce(logit, inst.label);
    if (fre) kl += fre_instance(cache.emb, ws, enh.fre, 0.0, {});
  }
  bce *= inv_b;
  kl *= inv_b;
  if (bce_out) *bce_out = bce;
  if (kl_out) *kl_out = kl;
  return total_loss(bce, kl, enh.fre);
}

double compute_gradients(const ModelBundle& bundle, const Dataset& dataset,
                         std::span<const std::size_t> batch,
                         const EnhancementInputs& enh, ParamStore& grads,
                         double* bce_out, double* kl_out) {
  if (batch.empty()) throw Error("compute_gradients: empty batch");
  check_enhancement_inputs(bundle, enh);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const bool fre = enh.fre.active();
  const bool fie = enh.fie.active();

  ForwardCache cache;
  FreWorkspace ws;
  if (fre) ws.prepare(bundle, *enh.field_embeddings);

  std::vector<double> demb(bundle.K * bundle.D);
  double bce = 0.0, kl = 0.0;
  double dscale = 0.0, dshift = 0.0;
  const double fie_scale =
      fie ? bundle.params.get("fie/scale").data[0] : 0.0;
  const double fie_shift =
      fie ? bundle.params.get("fie/shift").data[0] : 0.0;

  for (std::size_t idx : batch) {
    const Instance& inst = dataset.instances[idx];
    const double logit = forward_logit(bundle, inst, cache, enh);
    bce += instance_bce(logit, inst.label);
    const double g = (predict(logit) - static_cast<double>(inst.label)) * inv_b;

    std::fill(demb.begin(), demb.end(), 0.0);
    backbone_backward(bundle, inst, cache, g, grads, demb);
    if (fie) {
      fie_backward(inst, cache.emb, *enh.raw_interactions, fie_scale,
                   fie_shift, g * enh.fie.lambda_fm, demb, dscale, dshift,
                   bundle.D);
    }
    if (fre) {
      kl += fre_instance(cache.emb, ws, enh.fre, enh.fre.lambda_kl * inv_b,
                         demb);
    }
    scatter_embedding_grads(bundle, inst, demb, grads);
  }

  if (fie) {
    grads.get("fie/scale").data[0] += dscale;
    grads.get("fie/shift").data[0] += dshift;
  }
  if (fre) fre_finish(*enh.field_embeddings, ws, grads);

  bce *= inv_b;
  kl *= inv_b;
  if (bce_out) *bce_out = bce;
  if (kl_out) *kl_out = kl;
  return total_loss(bce, kl, enh.fre);
}

void write_run_log(const RunRecord& record,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("run log: cannot write " + path.string());
  for (std::size_t e = 0; e < record.epochs.size(); ++e) {
    nlohmann::ordered_json j;
    j["epoch"] = e + 1;
    j["train_loss"] = record.epochs[e].train_loss;
    j["val_auc"] = record.epochs[e].val_auc;
    j["val_logloss"] = record.epochs[e].val_logloss;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["best_epoch"] = record.best_epoch + 1;
  summary["best_val_auc"] = record.epochs.empty()
                                ? 0.0
                                : record.epochs[record.best_epoch].val_auc;
  summary["best_val_logloss"] =
      record.epochs.empty() ? 0.0
                            : record.epochs[record.best_epoch].val_logloss;
  out << summary.dump() << '\n';
}

FitResult fit(ModelBundle& bundle, const Dataset& train, const Dataset& val,
              const TrainConfig& cfg, const EnhancementInputs& enh) {
  if (!train.indexed || !val.indexed) {
    throw Error("fit: datasets must be indexed through the vocab first");
  }
  check_enhancement_inputs(bundle, enh);
  const auto t0 = std::chrono::steady_clock::now();

  AdamState state = AdamState::init(bundle.params);
  ParamStore grads = bundle.params.zeros_like();

  std::vector<std::uint8_t> val_labels(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    val_labels[i] = val.instances[i].label;
  }

  FitResult result;
  ParamStore best_params = bundle.params;
  double best_auc = -1.0;
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed =
        Rng::derive(cfg.seed, "epoch_shuffle", epoch).next_u64();
    const auto batches =
        batch_order(train.size(), cfg.batch_size, true, epoch_seed);

    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      grads.fill(0.0);
      const double loss = compute_gradients(bundle, train, batch, enh, grads);
      if (!std::isfinite(loss)) {
        throw Error("fit: diverged (non-finite loss) at epoch " +
                    std::to_string(epoch + 1));
      }
      loss_sum += loss * static_cast<double>(batch.size());
      adam_step(bundle.params, grads, state, cfg);
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    const std::vector<double> probs = predict_dataset(bundle, val, enh);
    rec.val_auc = auc(val_labels, probs);
    rec.val_logloss = logloss(val_labels, probs);
    result.record.epochs.push_back(rec);

    if (rec.val_auc > best_auc) {
      best_auc = rec.val_auc;
      result.record.best_epoch = epoch;
      best_params = bundle.params;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  bundle.params = std::move(best_params);
  result.record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

GradCheckReport grad_check(const ModelBundle& bundle, const Dataset& dataset,
                           std::span<const std::size_t> batch,
                           const EnhancementInputs& enh, double h,
                           double tol) {
  ParamStore analytic = bundle.params.zeros_like();
  compute_gradients(bundle, dataset, batch, enh, analytic);

  // The loss is re-evaluated under perturbed parameters; const_cast keeps
  // the public signature honest about not changing the model on exit.
  ModelBundle& mutable_bundle = const_cast<ModelBundle&>(bundle);

  GradCheckReport report;
  report.worst = 0.0;
  for (std::size_t t = 0; t < mutable_bundle.params.count(); ++t) {
    Tensor& tensor = mutable_bundle.params.at(t);
    GradCheckEntry entry;
    entry.tensor = tensor.name;
    for (std::size_t i = 0; i < tensor.numel(); ++i) {
      const double saved = tensor.data[i];
      tensor.data[i] = saved + h;
      const double up = batch_loss(mutable_bundle, dataset, batch, enh);
      tensor.data[i] = saved - h;
      const double down = batch_loss(mutable_bundle, dataset, batch, enh);
      tensor.data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic.at(t).data[i];
      const double denom = std::max(std::abs(numeric), std::abs(exact));
      const double rel =
          denom < 1e-12 ? 0.0 : std::abs(numeric - exact) / denom;
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    report.worst = std::max(report.worst, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.pass = report.worst < tol;
  return report;
}

}  // namespace fieldctr
