#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fieldctr/dataset.hpp"
#include "fieldctr/schema.hpp"

namespace fieldctr {

enum class BackboneKind { fm, fwfm, fmfm, deepfm, mlp };

BackboneKind backbone_kind_from_name(std::string_view name);
std::string_view backbone_kind_name(BackboneKind kind);

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t numel() const { return data.size(); }
  std::span<double> span() { return data; }
  std::span<const double> span() const { return data; }
};

// Named learnable tensors in a fixed creation order; gradients and Adam
// moments mirror the same layout.
class ParamStore {
 public:
  Tensor& add(std::string name, std::vector<std::size_t> shape);
  std::size_t count() const { return tensors_.size(); }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }
  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  const Tensor* find(std::string_view name) const;
  ParamStore zeros_like() const;
  void fill(double value);
  std::size_t total_numel() const;

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct BundleConfig {
  BackboneKind kind = BackboneKind::fm;
  std::size_t embedding_dim = 32;
  std::vector<std::size_t> dnn_hidden = {300, 300, 128};
  bool with_fre_adaptor = false;
  std::size_t semantic_dim = 0;  // required when with_fre_adaptor
  bool with_fie_rescale = false;
};

// A backbone plus whatever enhancement parameters are active. Tensor
// naming: "w0", "w/<k>", "emb/<k>", "fwfm/r", "fmfm/<k>_<l>", "dnn/w<l>",
// "dnn/b<l>", "fre/adaptor_w", "fre/adaptor_b", "fie/scale", "fie/shift".
struct ModelBundle {
  BackboneKind kind = BackboneKind::fm;
  std::size_t K = 0;
  std::size_t D = 0;
  std::size_t semantic_dim = 0;
  std::vector<std::size_t> vocab_sizes;
  std::vector<std::size_t> dnn_hidden;
  bool has_fre_adaptor = false;
  bool has_fie_rescale = false;
  std::uint64_t seed = 0;
  ParamStore params;

  // Positional tensor layout, shared with gradient/moment stores created
  // via zeros_like(): w0 and K linear tensors (absent for mlp, which has no
  // linear part), K embedding tensors, then the backbone-specific block,
  // then enhancement tensors.
  bool uses_linear() const { return kind != BackboneKind::mlp; }
  std::size_t linear_index(std::size_t k) const { return 1 + k; }
  std::size_t emb_index(std::size_t k) const {
    return (uses_linear() ? 1 + K : 0) + k;
  }
  std::size_t backbone_block_index() const { return emb_index(K); }
  std::size_t fmfm_pair_index(std::size_t k, std::size_t l) const {
    return backbone_block_index() + k * (2 * K - k - 1) / 2 + (l - k - 1);
  }
  std::size_t dnn_w_index(std::size_t layer) const {
    return backbone_block_index() + 2 * layer;
  }
  std::size_t dnn_b_index(std::size_t layer) const {
    return backbone_block_index() + 2 * layer + 1;
  }

  Tensor& emb(std::size_t k) { return params.at(emb_index(k)); }
  const Tensor& emb(std::size_t k) const { return params.at(emb_index(k)); }
  Tensor& linear_w(std::size_t k) { return params.at(linear_index(k)); }
  const Tensor& linear_w(std::size_t k) const {
    return params.at(linear_index(k));
  }
  double& w0() { return params.at(0).data[0]; }
  double w0() const { return params.at(0).data[0]; }
};

// Initialization: embeddings N(0, 0.01^2); linear weights zero; FwFM pair
// weights 1; FmFM projections identity; DNN uniform fan-in, zero bias;
// adaptor uniform +-1/sqrt(D_sem), zero bias; rescale (1, 0). Each group
// draws from its own seed stream, so enabling one does not shift another.
ModelBundle make_bundle(const FieldSchema& schema,
                        const std::vector<std::size_t>& vocab_sizes,
                        const BundleConfig& config, std::uint64_t seed);

struct ForwardCache {
  std::vector<double> emb;                // K x D gathered rows
  std::vector<std::vector<double>> acts;  // DNN activations, acts[0] = input
  std::vector<double> scratch;            // D-sized temp
  double logit_backbone = 0.0;
  double fie_plugin = 0.0;  // pairwise modulated sum, before lambda scaling
  double logit_total = 0.0;
};

// Copies each field's embedding row into out (K x D row-major).
void lookup_embeddings(const ModelBundle& bundle, const Instance& instance,
                       std::span<double> out);

double fm_forward(const ModelBundle& bundle, const Instance& instance,
                  std::span<const double> emb);
double fwfm_forward(const ModelBundle& bundle, const Instance& instance,
                    std::span<const double> emb);
double fmfm_forward(const ModelBundle& bundle, const Instance& instance,
                    std::span<const double> emb, std::span<double> scratch);
double deepfm_forward(const ModelBundle& bundle, const Instance& instance,
                      std::span<const double> emb, ForwardCache& cache);
double mlp_forward(const ModelBundle& bundle, std::span<const double> emb,
                   ForwardCache& cache);

// Gathers embeddings into the cache and evaluates the configured backbone.
double backbone_forward(const ModelBundle& bundle, const Instance& instance,
                        ForwardCache& cache);

// d(logit)/d(params) accumulation for the backbone's own parameters.
// Embedding-row gradients go to demb (K x D, caller-provided, not scattered
// here); the caller adds any enhancement terms and then scatters demb into
// the gradient store.
void backbone_backward(const ModelBundle& bundle, const Instance& instance,
                       const ForwardCache& cache, double dlogit,
                       ParamStore& grads, std::span<double> demb);

// Adds each field's demb row into the gradient tensor row selected by the
// instance.
void scatter_embedding_grads(const ModelBundle& bundle,
                             const Instance& instance,
                             std::span<const double> demb, ParamStore& grads);

// Stable sigmoid.
double predict(double logit);

}  // namespace fieldctr
