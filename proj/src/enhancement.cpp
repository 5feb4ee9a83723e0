#include "fieldctr/enhancement.hpp"

#include <algorithm>
#include <cmath>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"

namespace fieldctr {

FreVariant fre_variant_from_name(std::string_view name) {
  if (name == "kl") return FreVariant::kl;
  if (name == "mse") return FreVariant::mse;
  if (name == "cl") return FreVariant::cl;
  throw Error("unknown FRE variant '" + std::string(name) + "'");
}

FieMode fie_mode_from_name(std::string_view name) {
  if (name == "off") return FieMode::off;
  if (name == "explicit") return FieMode::explicit_term;
  if (name == "implicit") return FieMode::implicit_plugin;
  throw Error("unknown FIE mode '" + std::string(name) + "'");
}

void softmax_into(std::span<const double> v, std::span<double> out) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] *= inv;
}

std::vector<double> softmax_normalize(std::span<const double> v) {
  std::vector<double> out(v.size());
  softmax_into(v, out);
  return out;
}

double fie_pair_sum(const Instance& instance, std::span<const double> emb,
                    const InteractionMatrix& m, std::size_t dim) {
  const std::size_t K = m.field_count;
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double xx = instance.features[k].value * instance.features[l].value;
      acc += xx * m.at(k, l) *
             kernels::dot(emb.data() + k * dim, emb.data() + l * dim, dim);
    }
  }
  return acc;
}

double fie_term_explicit(const Instance& instance, std::span<const double> emb,
                         const InteractionMatrix& mprime, const FieConfig& cfg,
                         std::size_t dim) {
  if (cfg.lambda_fm == 0.0) return 0.0;
  return cfg.lambda_fm * fie_pair_sum(instance, emb, mprime, dim);
}

double fie_plugin_implicit(const Instance& instance,
                           std::span<const double> emb,
                           const InteractionMatrix& mprime,
                           const FieConfig& cfg, std::size_t dim) {
  if (cfg.lambda_fm == 0.0 && cfg.mode == FieMode::off) return 0.0;
  return fie_pair_sum(instance, emb, mprime, dim);
}

double fie_pair_sum_rescaled(const Instance& instance,
                             std::span<const double> emb,
                             const InteractionMatrix& raw, double scale,
                             double shift, std::size_t dim) {
  const std::size_t K = raw.field_count;
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double xx = instance.features[k].value * instance.features[l].value;
      const double mprime = scale * raw.at(k, l) + shift;
      acc += xx * mprime *
             kernels::dot(emb.data() + k * dim, emb.data() + l * dim, dim);
    }
  }
  return acc;
}

void fie_backward(const Instance& instance, std::span<const double> emb,
                  const InteractionMatrix& raw, double scale, double shift,
                  double dterm, std::span<double> demb, double& dscale,
                  double& dshift, std::size_t dim) {
  const std::size_t K = raw.field_count;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      const double xx = instance.features[k].value * instance.features[l].value;
      const double mprime = scale * raw.at(k, l) + shift;
      const double* ek = emb.data() + k * dim;
      const double* el = emb.data() + l * dim;
      const double c = dterm * xx;
      kernels::axpy(c * mprime, el, demb.data() + k * dim, dim);
      kernels::axpy(c * mprime, ek, demb.data() + l * dim, dim);
      const double dmprime = c * kernels::dot(ek, el, dim);
      dscale += dmprime * raw.at(k, l);
      dshift += dmprime;
    }
  }
}

void FreWorkspace::prepare(const ModelBundle& bundle,
                           const FieldEmbeddingMatrix& h) {
  K = bundle.K;
  D = bundle.D;
  const Tensor& w = bundle.params.get("fre/adaptor_w");
  const Tensor& b = bundle.params.get("fre/adaptor_b");
  h_adapted = adapt_field_embeddings(h, w.span(), b.span(), D);
  q.resize(K * D);
  for (std::size_t k = 0; k < K; ++k) {
    softmax_into({h_adapted.data() + k * D, D}, {q.data() + k * D, D});
  }
  dh.assign(K * D, 0.0);
  p.resize(D);
  dp.resize(D);
}

namespace {

// Pullback through softmax: given dL/dp at p = softmax(z),
// dL/dz = p .* (dL/dp - <p, dL/dp>).
void softmax_backward_add(std::span<const double> p, std::span<const double> dp,
                          double weight, std::span<double> dz) {
  double inner = 0.0;
  for (std::size_t d = 0; d < p.size(); ++d) inner += p[d] * dp[d];
  for (std::size_t d = 0; d < p.size(); ++d) {
    dz[d] += weight * p[d] * (dp[d] - inner);
  }
}

double cosine(std::span<const double> a, std::span<const double> b,
              double& norm_a, double& norm_b) {
  norm_a = std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
  norm_b = std::sqrt(kernels::dot(b.data(), b.data(), b.size()));
  return kernels::dot(a.data(), b.data(), a.size()) / (norm_a * norm_b);
}

}  // namespace

double fre_instance(std::span<const double> emb, FreWorkspace& ws,
                    const FreConfig& cfg, double grad_weight,
                    std::span<double> demb) {
  const std::size_t K = ws.K, D = ws.D;
  double loss = 0.0;

  for (std::size_t k = 0; k < K; ++k) {
    const std::span<const double> ek{emb.data() + k * D, D};
    softmax_into(ek, ws.p);
    const std::span<const double> qk{ws.q.data() + k * D, D};

    switch (cfg.variant) {
      case FreVariant::kl: {
        double kl = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          kl += ws.p[d] * std::log(ws.p[d] / qk[d]);
        }
        loss += kl;
        if (grad_weight != 0.0) {
          // d(KL)/dz for p = softmax(z): p .* (ln p - ln q - KL).
          for (std::size_t d = 0; d < D; ++d) {
            demb[k * D + d] +=
                grad_weight * ws.p[d] * (std::log(ws.p[d] / qk[d]) - kl);
          }
          // d(KL)/dh' = q - p.
          for (std::size_t d = 0; d < D; ++d) {
            ws.dh[k * D + d] += grad_weight * (qk[d] - ws.p[d]);
          }
        }
        break;
      }
      case FreVariant::mse: {
        double mse = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          const double diff = ws.p[d] - qk[d];
          mse += diff * diff;
        }
        const double inv_d = 1.0 / static_cast<double>(D);
        loss += mse * inv_d;
        if (grad_weight != 0.0) {
          for (std::size_t d = 0; d < D; ++d) {
            ws.dp[d] = 2.0 * (ws.p[d] - qk[d]) * inv_d;
          }
          softmax_backward_add(ws.p, ws.dp, grad_weight,
                               {demb.data() + k * D, D});
          for (double& x : ws.dp) x = -x;
          softmax_backward_add(qk, ws.dp, grad_weight,
                               {ws.dh.data() + k * D, D});
        }
        break;
      }
      case FreVariant::cl: {
        // In-batch contrastive alignment over the K field prototypes,
        // computed on the softmax-normalized vectors for comparability
        // with the kl/mse variants.
        const double inv_tau = 1.0 / cfg.cl_temperature;
        std::vector<double> sims(K), na(K), nb(K);
        double np = 0.0;
        for (std::size_t l = 0; l < K; ++l) {
          sims[l] = cosine(ws.p, {ws.q.data() + l * D, D}, np, nb[l]) * inv_tau;
          na[l] = np;
        }
        std::vector<double> a = softmax_normalize(sims);
        double lsum = 0.0;
        {
          const double m = *std::max_element(sims.begin(), sims.end());
          for (double s : sims) lsum += std::exp(s - m);
          loss += -(sims[k] - m - std::log(lsum));
        }
        if (grad_weight != 0.0) {
          std::fill(ws.dp.begin(), ws.dp.end(), 0.0);
          for (std::size_t l = 0; l < K; ++l) {
            const double ds = a[l] - (l == k ? 1.0 : 0.0);
            const std::span<const double> ql{ws.q.data() + l * D, D};
            const double cos_pl = sims[l] * cfg.cl_temperature;
            const double inv_pq = 1.0 / (na[l] * nb[l]);
            const double inv_pp = cos_pl / (na[l] * na[l]);
            const double inv_qq = cos_pl / (nb[l] * nb[l]);
            // d cos / dp and d cos / dq_l.
            for (std::size_t d = 0; d < D; ++d) {
              ws.dp[d] += ds * inv_tau * (ql[d] * inv_pq - ws.p[d] * inv_pp);
            }
            std::vector<double> dql(D);
            for (std::size_t d = 0; d < D; ++d) {
              dql[d] = ds * inv_tau * (ws.p[d] * inv_pq - ql[d] * inv_qq);
            }
            softmax_backward_add(ql, dql, grad_weight,
                                 {ws.dh.data() + l * D, D});
          }
          softmax_backward_add(ws.p, ws.dp, grad_weight,
                               {demb.data() + k * D, D});
        }
        break;
      }
    }
  }
  return loss;
}

void fre_finish(const FieldEmbeddingMatrix& h, const FreWorkspace& ws,
                ParamStore& grads) {
  Tensor& gw = grads.get("fre/adaptor_w");
  Tensor& gb = grads.get("fre/adaptor_b");
  const std::size_t D = ws.D;
  for (std::size_t k = 0; k < ws.K; ++k) {
    const std::span<const double> dhk{ws.dh.data() + k * D, D};
    kernels::axpy(1.0, dhk.data(), gb.data.data(), D);
    const auto hk = h.row(k);
    for (std::size_t s = 0; s < h.dim(); ++s) {
      kernels::axpy(hk[s], dhk.data(), gw.data.data() + s * D, D);
    }
  }
}

double total_loss(double bce, double kl, const FreConfig& cfg) {
  return bce + cfg.lambda_kl * kl;
}

}  // namespace fieldctr
