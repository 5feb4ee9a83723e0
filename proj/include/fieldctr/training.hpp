#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldctr/backbones.hpp"
#include "fieldctr/dataset.hpp"
#include "fieldctr/enhancement.hpp"

namespace fieldctr {

struct TrainConfig {
  double learning_rate = 0.001;
  double weight_decay = 0.0;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  std::size_t patience = 3;
  std::uint64_t seed = 42;
};

// Adam moments mirroring the parameter layout; beta/eps are fixed.
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  ParamStore m;
  ParamStore v;
  std::uint64_t t = 0;

  static AdamState init(const ParamStore& params);
};

// Everything the training loop needs to evaluate the active enhancements.
// field_embeddings is required when fre is active; raw_interactions when
// fie is active.
struct EnhancementInputs {
  FreConfig fre;
  FieConfig fie;
  const FieldEmbeddingMatrix* field_embeddings = nullptr;
  const InteractionMatrix* raw_interactions = nullptr;
};

// Mean BCE computed stably from logits. When grad_out is non-empty it
// receives d(loss)/d(logit) = (sigmoid(z) - y) / N per element.
double bce_with_logits(std::span<const std::uint8_t> labels,
                       std::span<const double> logits,
                       std::span<double> grad_out = {});

// One bias-corrected Adam step with decoupled weight decay; a pure
// function of (params, grads, state, cfg).
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state,
               const TrainConfig& cfg);

// Backbone logit plus the FIE term when active.
double forward_logit(const ModelBundle& bundle, const Instance& instance,
                     ForwardCache& cache, const EnhancementInputs& enh);

std::vector<double> predict_dataset(const ModelBundle& bundle,
                                    const Dataset& dataset,
                                    const EnhancementInputs& enh);

// Total loss (BCE + lambda_kl * alignment) over one batch, no gradients.
double batch_loss(const ModelBundle& bundle, const Dataset& dataset,
                  std::span<const std::size_t> batch,
                  const EnhancementInputs& enh, double* bce_out = nullptr,
                  double* kl_out = nullptr);

// Same loss with gradients accumulated into `grads` (expected zeroed).
double compute_gradients(const ModelBundle& bundle, const Dataset& dataset,
                         std::span<const std::size_t> batch,
                         const EnhancementInputs& enh, ParamStore& grads,
                         double* bce_out = nullptr, double* kl_out = nullptr);

struct EpochRecord {
  double train_loss = 0.0;
  double val_auc = 0.0;
  double val_logloss = 0.0;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0-based index into epochs
  double wall_seconds = 0.0;
};

// Deterministic fields only (no wall clock), so reruns are byte-identical.
void write_run_log(const RunRecord& record,
                   const std::filesystem::path& path);

struct FitResult {
  RunRecord record;
};

// Epoch loop with per-epoch shuffling, validation AUC early stopping and
// best-epoch restore. The bundle is left holding the best-epoch parameters.
FitResult fit(ModelBundle& bundle, const Dataset& train, const Dataset& val,
              const TrainConfig& cfg, const EnhancementInputs& enh);

struct GradCheckEntry {
  std::string tensor;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  bool pass = false;
};

// Central finite differences against the analytic gradients of the full
// batch loss, parameter scalar by parameter scalar.
GradCheckReport grad_check(const ModelBundle& bundle, const Dataset& dataset,
                           std::span<const std::size_t> batch,
                           const EnhancementInputs& enh, double h, double tol);

}  // namespace fieldctr
