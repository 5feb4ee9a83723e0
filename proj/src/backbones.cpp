#include "fieldctr/backbones.hpp"

#include <algorithm>
#include <cmath>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"
#include "fieldctr/rng.hpp"

namespace fieldctr {

BackboneKind backbone_kind_from_name(std::string_view name) {
  if (name == "fm") return BackboneKind::fm;
  if (name == "fwfm") return BackboneKind::fwfm;
  if (name == "fmfm") return BackboneKind::fmfm;
  if (name == "deepfm") return BackboneKind::deepfm;
  if (name == "mlp") return BackboneKind::mlp;
  throw Error("unknown backbone '" + std::string(name) + "'");
}

std::string_view backbone_kind_name(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::fm: return "fm";
    case BackboneKind::fwfm: return "fwfm";
    case BackboneKind::fmfm: return "fmfm";
    case BackboneKind::deepfm: return "deepfm";
    case BackboneKind::mlp: return "mlp";
  }
  return "fm";
}

Tensor& ParamStore::add(std::string name, std::vector<std::size_t> shape) {
  std::size_t numel = 1;
  for (std::size_t d : shape) numel *= d;
  if (!index_.emplace(name, tensors_.size()).second) {
    throw Error("param store: duplicate tensor '" + name + "'");
  }
  tensors_.push_back(Tensor{std::move(name), std::move(shape),
                            std::vector<double>(numel, 0.0)});
  return tensors_.back();
}

Tensor& ParamStore::get(std::string_view name) {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("param store: no tensor '" + std::string(name) + "'");
  return tensors_[it->second];
}

const Tensor& ParamStore::get(std::string_view name) const {
  return const_cast<ParamStore*>(this)->get(name);
}

const Tensor* ParamStore::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &tensors_[it->second];
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const Tensor& t : tensors_) out.add(t.name, t.shape);
  return out;
}

void ParamStore::fill(double value) {
  for (Tensor& t : tensors_) {
    std::fill(t.data.begin(), t.data.end(), value);
  }
}

std::size_t ParamStore::total_numel() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.numel();
  return n;
}

namespace {

bool uses_dnn(BackboneKind kind) {
  return kind == BackboneKind::deepfm || kind == BackboneKind::mlp;
}

std::vector<std::size_t> dnn_layer_dims(std::size_t input,
                                        const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

}  // namespace

ModelBundle make_bundle(const FieldSchema& schema,
                        const std::vector<std::size_t>& vocab_sizes,
                        const BundleConfig& config, std::uint64_t seed) {
  const std::size_t K = schema.field_count();
  if (vocab_sizes.size() != K) {
    throw Error("bundle: vocab size list does not match schema");
  }
  if (config.with_fre_adaptor && config.semantic_dim == 0) {
    throw Error("bundle: FRE adaptor needs a semantic dimension");
  }

  ModelBundle b;
  b.kind = config.kind;
  b.K = K;
  b.D = config.embedding_dim;
  b.semantic_dim = config.with_fre_adaptor ? config.semantic_dim : 0;
  b.vocab_sizes = vocab_sizes;
  b.dnn_hidden = config.dnn_hidden;
  b.has_fre_adaptor = config.with_fre_adaptor;
  b.has_fie_rescale = config.with_fie_rescale;
  b.seed = seed;

  if (b.uses_linear()) {
    b.params.add("w0", {1});
    for (std::size_t k = 0; k < K; ++k) {
      b.params.add("w/" + std::to_string(k), {vocab_sizes[k]});
    }
  }
  Rng emb_rng = Rng::derive(seed, "embed");
  for (std::size_t k = 0; k < K; ++k) {
    Tensor& e = b.params.add("emb/" + std::to_string(k), {vocab_sizes[k], b.D});
    for (double& x : e.data) x = emb_rng.normal(0.0, 0.01);
  }

  if (b.kind == BackboneKind::fwfm) {
    Tensor& r = b.params.add("fwfm/r", {K, K});
    std::fill(r.data.begin(), r.data.end(), 1.0);
  } else if (b.kind == BackboneKind::fmfm) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = k + 1; l < K; ++l) {
        Tensor& m = b.params.add(
            "fmfm/" + std::to_string(k) + "_" + std::to_string(l), {b.D, b.D});
        for (std::size_t d = 0; d < b.D; ++d) m.data[d * b.D + d] = 1.0;
      }
    }
  }

  if (uses_dnn(b.kind)) {
    Rng dnn_rng = Rng::derive(seed, "dnn");
    const auto dims = dnn_layer_dims(K * b.D, b.dnn_hidden);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Tensor& w = b.params.add("dnn/w" + std::to_string(l),
                               {dims[l], dims[l + 1]});
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
      for (double& x : w.data) x = dnn_rng.uniform(-bound, bound);
      b.params.add("dnn/b" + std::to_string(l), {dims[l + 1]});
    }
  }

  if (b.has_fre_adaptor) {
    Rng ad_rng = Rng::derive(seed, "adaptor");
    Tensor& w = b.params.add("fre/adaptor_w", {b.semantic_dim, b.D});
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.semantic_dim));
    for (double& x : w.data) x = ad_rng.uniform(-bound, bound);
    b.params.add("fre/adaptor_b", {b.D});
  }
  if (b.has_fie_rescale) {
    b.params.add("fie/scale", {1}).data[0] = 1.0;
    b.params.add("fie/shift", {1});
  }
  return b;
}

void lookup_embeddings(const ModelBundle& bundle, const Instance& instance,
                       std::span<double> out) {
  const std::size_t D = bundle.D;
  for (std::size_t k = 0; k < bundle.K; ++k) {
    const std::uint32_t j = instance.features[k].feature_index;
    if (j >= bundle.vocab_sizes[k]) {
      throw Error("lookup: feature index out of bounds for field " +
                  std::to_string(k));
    }
    const double* row = bundle.emb(k).data.data() + std::size_t{j} * D;
    std::copy(row, row + D, out.data() + k * D);
  }
}

namespace {

double linear_part(const ModelBundle& bundle, const Instance& instance) {
  double acc = bundle.w0();
  for (std::size_t k = 0; k < bundle.K; ++k) {
    const auto& f = instance.features[k];
    acc += bundle.linear_w(k).data[f.feature_index] * f.value;
  }
  return acc;
}

// Shared DNN evaluation; acts[0] is the flattened input, ReLU on hidden
// layers, linear scalar output.
double dnn_forward(const ModelBundle& bundle, std::span<const double> input,
                   ForwardCache& cache) {
  const auto dims = dnn_layer_dims(bundle.K * bundle.D, bundle.dnn_hidden);
  const std::size_t layers = dims.size() - 1;
  cache.acts.resize(layers + 1);
  cache.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = bundle.params.at(bundle.dnn_w_index(l));
    const Tensor& bias = bundle.params.at(bundle.dnn_b_index(l));
    auto& out = cache.acts[l + 1];
    out.assign(bias.data.begin(), bias.data.end());
    const auto& in = cache.acts[l];
    for (std::size_t i = 0; i < dims[l]; ++i) {
      kernels::axpy(in[i], w.data.data() + i * dims[l + 1], out.data(),
                    dims[l + 1]);
    }
    if (l + 1 < layers) {
      for (double& x : out) x = x > 0.0 ? x : 0.0;
    }
  }
  return cache.acts[layers][0];
}

void dnn_backward(const ModelBundle& bundle, const ForwardCache& cache,
                  double dlogit, ParamStore& grads, std::span<double> dinput) {
  const auto dims = dnn_layer_dims(bundle.K * bundle.D, bundle.dnn_hidden);
  const std::size_t layers = dims.size() - 1;
  std::vector<double> dout{dlogit};
  for (std::size_t l = layers; l-- > 0;) {
    const Tensor& w = bundle.params.at(bundle.dnn_w_index(l));
    Tensor& gw = grads.at(bundle.dnn_w_index(l));
    Tensor& gb = grads.at(bundle.dnn_b_index(l));
    const auto& in = cache.acts[l];
    kernels::axpy(1.0, dout.data(), gb.data.data(), dims[l + 1]);
    std::vector<double> din(dims[l]);
    for (std::size_t i = 0; i < dims[l]; ++i) {
      kernels::axpy(in[i], dout.data(), gw.data.data() + i * dims[l + 1],
                    dims[l + 1]);
      din[i] = kernels::dot(w.data.data() + i * dims[l + 1], dout.data(),
                            dims[l + 1]);
    }
    if (l > 0) {
      for (std::size_t i = 0; i < dims[l]; ++i) {
        if (cache.acts[l][i] <= 0.0) din[i] = 0.0;
      }
    }
    dout = std::move(din);
  }
  for (std::size_t i = 0; i < dout.size(); ++i) dinput[i] += dout[i];
}

}  // namespace

double fm_forward(const ModelBundle& bundle, const Instance& instance,
                  std::span<const double> emb) {
  const std::size_t K = bundle.K, D = bundle.D;
  double acc = linear_part(bundle, instance);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double xx = instance.features[k].value * instance.features[l].value;
      acc += xx * kernels::dot(emb.data() + k * D, emb.data() + l * D, D);
    }
  }
  return acc;
}

double fwfm_forward(const ModelBundle& bundle, const Instance& instance,
                    std::span<const double> emb) {
  const std::size_t K = bundle.K, D = bundle.D;
  const Tensor& r = bundle.params.at(bundle.backbone_block_index());
  double acc = linear_part(bundle, instance);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double xx = instance.features[k].value * instance.features[l].value;
      acc += r.data[k * K + l] * xx *
             kernels::dot(emb.data() + k * D, emb.data() + l * D, D);
    }
  }
  return acc;
}

double fmfm_forward(const ModelBundle& bundle, const Instance& instance,
                    std::span<const double> emb, std::span<double> scratch) {
  const std::size_t K = bundle.K, D = bundle.D;
  double acc = linear_part(bundle, instance);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const Tensor& m = bundle.params.at(bundle.fmfm_pair_index(k, l));
      std::fill(scratch.begin(), scratch.begin() + D, 0.0);
      const double* ek = emb.data() + k * D;
      for (std::size_t j = 0; j < D; ++j) {
        kernels::axpy(ek[j], m.data.data() + j * D, scratch.data(), D);
      }
      const double xx = instance.features[k].value * instance.features[l].value;
      acc += xx * kernels::dot(scratch.data(), emb.data() + l * D, D);
    }
  }
  return acc;
}

double deepfm_forward(const ModelBundle& bundle, const Instance& instance,
                      std::span<const double> emb, ForwardCache& cache) {
  return fm_forward(bundle, instance, emb) + dnn_forward(bundle, emb, cache);
}

double mlp_forward(const ModelBundle& bundle, std::span<const double> emb,
                   ForwardCache& cache) {
  return dnn_forward(bundle, emb, cache);
}

double backbone_forward(const ModelBundle& bundle, const Instance& instance,
                        ForwardCache& cache) {
  cache.emb.resize(bundle.K * bundle.D);
  cache.scratch.resize(bundle.D);
  lookup_embeddings(bundle, instance, cache.emb);
  double logit = 0.0;
  switch (bundle.kind) {
    case BackboneKind::fm:
      logit = fm_forward(bundle, instance, cache.emb);
      break;
    case BackboneKind::fwfm:
      logit = fwfm_forward(bundle, instance, cache.emb);
      break;
    case BackboneKind::fmfm:
      logit = fmfm_forward(bundle, instance, cache.emb, cache.scratch);
      break;
    case BackboneKind::deepfm:
      logit = deepfm_forward(bundle, instance, cache.emb, cache);
      break;
    case BackboneKind::mlp:
      logit = mlp_forward(bundle, cache.emb, cache);
      break;
  }
  cache.logit_backbone = logit;
  return logit;
}

void backbone_backward(const ModelBundle& bundle, const Instance& instance,
                       const ForwardCache& cache, double dlogit,
                       ParamStore& grads, std::span<double> demb) {
  const std::size_t K = bundle.K, D = bundle.D;
  const std::span<const double> emb{cache.emb};

  if (bundle.uses_linear()) {
    grads.at(0).data[0] += dlogit;  // w0
    for (std::size_t k = 0; k < K; ++k) {
      const auto& f = instance.features[k];
      grads.at(bundle.linear_index(k)).data[f.feature_index] +=
          dlogit * f.value;
    }
  }

  const bool fm_pairs = bundle.kind == BackboneKind::fm ||
                        bundle.kind == BackboneKind::fwfm ||
                        bundle.kind == BackboneKind::fmfm ||
                        bundle.kind == BackboneKind::deepfm;
  if (fm_pairs) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = k + 1; l < K; ++l) {
        const double xx =
            instance.features[k].value * instance.features[l].value;
        const double* ek = emb.data() + k * D;
        const double* el = emb.data() + l * D;
        double* gk = demb.data() + k * D;
        double* gl = demb.data() + l * D;
        if (bundle.kind == BackboneKind::fwfm) {
          const Tensor& r = bundle.params.at(bundle.backbone_block_index());
          const double c = dlogit * xx * r.data[k * K + l];
          kernels::axpy(c, el, gk, D);
          kernels::axpy(c, ek, gl, D);
          grads.at(bundle.backbone_block_index()).data[k * K + l] +=
              dlogit * xx * kernels::dot(ek, el, D);
        } else if (bundle.kind == BackboneKind::fmfm) {
          const std::size_t pair = bundle.fmfm_pair_index(k, l);
          const Tensor& m = bundle.params.at(pair);
          Tensor& gm = grads.at(pair);
          const double c = dlogit * xx;
          std::vector<double> proj(D, 0.0);
          for (std::size_t j = 0; j < D; ++j) {
            kernels::axpy(ek[j], m.data.data() + j * D, proj.data(), D);
          }
          kernels::axpy(c, proj.data(), gl, D);
          for (std::size_t j = 0; j < D; ++j) {
            gk[j] += c * kernels::dot(m.data.data() + j * D, el, D);
            kernels::axpy(c * ek[j], el, gm.data.data() + j * D, D);
          }
        } else {
          const double c = dlogit * xx;
          kernels::axpy(c, el, gk, D);
          kernels::axpy(c, ek, gl, D);
        }
      }
    }
  }

  if (uses_dnn(bundle.kind)) {
    dnn_backward(bundle, cache, dlogit, grads, demb);
  }
}

void scatter_embedding_grads(const ModelBundle& bundle,
                             const Instance& instance,
                             std::span<const double> demb, ParamStore& grads) {
  const std::size_t D = bundle.D;
  for (std::size_t k = 0; k < bundle.K; ++k) {
    const std::uint32_t j = instance.features[k].feature_index;
    double* row =
        grads.at(bundle.emb_index(k)).data.data() + std::size_t{j} * D;
    kernels::axpy(1.0, demb.data() + k * D, row, D);
  }
}

double predict(double logit) {
  if (logit >= 0.0) {
    return 1.0 / (1.0 + std::exp(-logit));
  }
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

}  // namespace fieldctr
