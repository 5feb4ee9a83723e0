#pragma once

#include <span>
#include <vector>

#include "fieldctr/backbones.hpp"
#include "fieldctr/dataset.hpp"
#include "fieldctr/field_embeddings.hpp"
#include "fieldctr/interaction.hpp"

namespace fieldctr {

enum class FreVariant { kl, mse, cl };

struct FreConfig {
  double lambda_kl = 0.0;
  FreVariant variant = FreVariant::kl;
  double cl_temperature = 0.02;

  bool active() const { return lambda_kl > 0.0; }
};

enum class FieMode { off, explicit_term, implicit_plugin };

struct FieConfig {
  double lambda_fm = 0.0;
  FieMode mode = FieMode::off;

  bool active() const { return mode != FieMode::off && lambda_fm > 0.0; }
};

FreVariant fre_variant_from_name(std::string_view name);
FieMode fie_mode_from_name(std::string_view name);

// Max-subtracted softmax.
void softmax_into(std::span<const double> v, std::span<double> out);
std::vector<double> softmax_normalize(std::span<const double> v);

// Pairwise field-score-modulated interaction sum:
//   sum_{k<l} x_k * x_l * <e_k, e_l> * m[k][l]
double fie_pair_sum(const Instance& instance, std::span<const double> emb,
                    const InteractionMatrix& m, std::size_t dim);

// Additive logit term for explicit-interaction backbones: lambda * pair sum.
double fie_term_explicit(const Instance& instance, std::span<const double> emb,
                         const InteractionMatrix& mprime, const FieConfig& cfg,
                         std::size_t dim);

// Plugin logit for implicit backbones; the host fuses
// sigma(phi_host + lambda * plugin).
double fie_plugin_implicit(const Instance& instance,
                           std::span<const double> emb,
                           const InteractionMatrix& mprime,
                           const FieConfig& cfg, std::size_t dim);

// Same sum evaluated from the raw matrix and the learnable affine
// (scale, shift); this is the training path.
double fie_pair_sum_rescaled(const Instance& instance,
                             std::span<const double> emb,
                             const InteractionMatrix& raw, double scale,
                             double shift, std::size_t dim);

// dterm is d(loss)/d(pair sum). Embedding gradients accumulate into demb,
// affine gradients into dscale/dshift.
void fie_backward(const Instance& instance, std::span<const double> emb,
                  const InteractionMatrix& raw, double scale, double shift,
                  double dterm, std::span<double> demb, double& dscale,
                  double& dshift, std::size_t dim);

// Per-batch FRE state: the adapted field rows h', their softmax q, and the
// d(loss)/dh' accumulator that later becomes adaptor gradients.
struct FreWorkspace {
  std::size_t K = 0;
  std::size_t D = 0;
  std::vector<double> h_adapted;  // K x D
  std::vector<double> q;          // K x D, softmax rows
  std::vector<double> dh;         // K x D accumulated gradient
  std::vector<double> p;          // D scratch
  std::vector<double> dp;         // D scratch

  void prepare(const ModelBundle& bundle, const FieldEmbeddingMatrix& h);
};

// Alignment loss of one instance: sum over fields of the configured
// divergence between softmax(e_k) and q_k. When grad_weight is nonzero,
// adds grad_weight * d/d(e) into demb and grad_weight * d/d(h') into ws.dh.
double fre_instance(std::span<const double> emb, FreWorkspace& ws,
                    const FreConfig& cfg, double grad_weight,
                    std::span<double> demb);

// Turns the accumulated ws.dh into adaptor gradients.
void fre_finish(const FieldEmbeddingMatrix& h, const FreWorkspace& ws,
                ParamStore& grads);

// L = L_BCE + lambda_kl * L_KL.
double total_loss(double bce, double kl, const FreConfig& cfg);

}  // namespace fieldctr
