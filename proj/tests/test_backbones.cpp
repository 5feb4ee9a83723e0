#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fieldctr/backbones.hpp"
#include "fieldctr/rng.hpp"
#include "support/synthetic_data.hpp"

using namespace fieldctr;

namespace {

ModelBundle make_test_bundle(BackboneKind kind, std::size_t K, std::size_t D,
                             std::size_t vocab, std::uint64_t seed,
                             std::vector<std::size_t> hidden = {}) {
  BundleConfig bc;
  bc.kind = kind;
  bc.embedding_dim = D;
  bc.dnn_hidden = std::move(hidden);
  const auto schema = testsupport::make_categorical_schema(K);
  return make_bundle(*schema, std::vector<std::size_t>(K, vocab), bc, seed);
}

Instance ones_instance(std::size_t K, std::uint32_t index = 1) {
  Instance inst;
  inst.features.assign(K, FeatureRef{index, 1.0});
  inst.label = 1;
  return inst;
}

void set_row(ModelBundle& b, std::size_t field, std::uint32_t index,
             const std::vector<double>& row) {
  std::copy(row.begin(), row.end(),
            b.emb(field).data.begin() + index * b.D);
}

void zero_params(ModelBundle& b) { b.params.fill(0.0); }

}  // namespace

TEST_CASE("lookup_embeddings gathers the selected rows") {
  ModelBundle b = make_test_bundle(BackboneKind::fm, 2, 3, 4, 1);
  set_row(b, 0, 2, {1.0, 2.0, 3.0});
  set_row(b, 1, 1, {4.0, 5.0, 6.0});
  Instance inst;
  inst.features = {{2, 1.0}, {1, 1.0}};
  std::vector<double> out(6);
  lookup_embeddings(b, inst, out);
  CHECK(out == std::vector<double>{1, 2, 3, 4, 5, 6});

  SUBCASE("OOV row zero convention") {
    zero_params(b);
    Instance oov;
    oov.features = {{0, 1.0}, {0, 1.0}};
    lookup_embeddings(b, oov, out);
    for (double x : out) CHECK(x == 0.0);
  }
  SUBCASE("out-of-bounds index throws") {
    Instance bad;
    bad.features = {{9, 1.0}, {0, 1.0}};
    std::vector<double> buf(6);
    CHECK_THROWS(lookup_embeddings(b, bad, buf));
  }
}

TEST_CASE("fm_forward hand values") {
  ModelBundle b = make_test_bundle(BackboneKind::fm, 2, 2, 2, 1);
  zero_params(b);
  Instance inst = ones_instance(2);
  std::vector<double> emb(4);

  SUBCASE("orthogonal embeddings leave only the bias") {
    set_row(b, 0, 1, {1.0, 0.0});
    set_row(b, 1, 1, {0.0, 1.0});
    b.w0() = 0.5;
    lookup_embeddings(b, inst, emb);
    CHECK(fm_forward(b, inst, emb) == doctest::Approx(0.5));
  }
  SUBCASE("inner product 11") {
    set_row(b, 0, 1, {1.0, 2.0});
    set_row(b, 1, 1, {3.0, 4.0});
    lookup_embeddings(b, inst, emb);
    CHECK(fm_forward(b, inst, emb) == doctest::Approx(11.0));
  }
  SUBCASE("three equal embeddings give three pair terms") {
    ModelBundle b3 = make_test_bundle(BackboneKind::fm, 3, 2, 2, 1);
    zero_params(b3);
    const std::vector<double> u{0.6, 0.8};  // |u|^2 = 1
    for (std::size_t k = 0; k < 3; ++k) set_row(b3, k, 1, u);
    Instance i3 = ones_instance(3);
    std::vector<double> e3(6);
    lookup_embeddings(b3, i3, e3);
    CHECK(fm_forward(b3, i3, e3) == doctest::Approx(3.0));
  }
  SUBCASE("linear weights and values participate") {
    set_row(b, 0, 1, {1.0, 2.0});
    set_row(b, 1, 1, {3.0, 4.0});
    b.w0() = 0.25;
    b.linear_w(0).data[1] = 2.0;
    b.linear_w(1).data[1] = -1.0;
    Instance scaled;
    scaled.features = {{1, 2.0}, {1, 0.5}};  // x values scale everything
    lookup_embeddings(b, scaled, emb);
    // 0.25 + 2*2 + (-1)*0.5 + 2*0.5*11 = 0.25 + 4 - 0.5 + 11 = 14.75
    CHECK(fm_forward(b, scaled, emb) == doctest::Approx(14.75));
  }
}

TEST_CASE("fwfm_forward hand values and reduction") {
  ModelBundle b = make_test_bundle(BackboneKind::fwfm, 2, 2, 2, 1);
  zero_params(b);
  set_row(b, 0, 1, {1.0, 2.0});
  set_row(b, 1, 1, {3.0, 4.0});
  Tensor& r = b.params.get("fwfm/r");
  Instance inst = ones_instance(2);
  std::vector<double> emb(4);
  lookup_embeddings(b, inst, emb);

  SUBCASE("r = 1 reduces to fm") {
    std::fill(r.data.begin(), r.data.end(), 1.0);
    CHECK(fwfm_forward(b, inst, emb) == fm_forward(b, inst, emb));
  }
  SUBCASE("r = 0 leaves the linear part") {
    b.w0() = 0.125;
    CHECK(fwfm_forward(b, inst, emb) == doctest::Approx(0.125));
  }
  SUBCASE("pair weight scales the pair term") {
    r.data[0 * 2 + 1] = 2.0;
    CHECK(fwfm_forward(b, inst, emb) == doctest::Approx(22.0));
  }
}

TEST_CASE("fmfm_forward hand values and reduction") {
  ModelBundle b = make_test_bundle(BackboneKind::fmfm, 2, 2, 2, 1);
  zero_params(b);
  set_row(b, 0, 1, {1.0, 2.0});
  set_row(b, 1, 1, {3.0, 4.0});
  Tensor& m = b.params.get("fmfm/0_1");
  Instance inst = ones_instance(2);
  std::vector<double> emb(4), scratch(2);
  lookup_embeddings(b, inst, emb);

  SUBCASE("identity projection reduces to fm") {
    m.data = {1.0, 0.0, 0.0, 1.0};
    CHECK(fmfm_forward(b, inst, emb, scratch) == fm_forward(b, inst, emb));
  }
  SUBCASE("zero projection leaves the linear part") {
    CHECK(fmfm_forward(b, inst, emb, scratch) == doctest::Approx(0.0));
  }
  SUBCASE("swap matrix gives the hand-computed projection") {
    m.data = {0.0, 1.0, 1.0, 0.0};  // e1^T M = (2, 1); <(2,1),(3,4)> = 10
    CHECK(fmfm_forward(b, inst, emb, scratch) == doctest::Approx(10.0));
  }
}

TEST_CASE("deepfm and mlp forwards") {
  SUBCASE("dead DNN reduces deepfm to fm exactly") {
    ModelBundle b = make_test_bundle(BackboneKind::deepfm, 2, 2, 3, 1, {4, 4});
    // Zero only the DNN tensors; keep the random embeddings.
    for (std::size_t l = 0; l < 3; ++l) {
      std::fill(b.params.get("dnn/w" + std::to_string(l)).data.begin(),
                b.params.get("dnn/w" + std::to_string(l)).data.end(), 0.0);
    }
    Instance inst = ones_instance(2);
    ForwardCache cache;
    const double phi = backbone_forward(b, inst, cache);
    CHECK(phi == fm_forward(b, inst, cache.emb));
  }
  SUBCASE("mlp with zero weights returns the output bias") {
    ModelBundle b = make_test_bundle(BackboneKind::mlp, 2, 2, 3, 1, {4});
    zero_params(b);
    b.params.get("dnn/b1").data[0] = 0.75;
    Instance inst = ones_instance(2);
    ForwardCache cache;
    CHECK(backbone_forward(b, inst, cache) == doctest::Approx(0.75));
  }
  SUBCASE("hand-set single-hidden-unit relu chain") {
    ModelBundle b = make_test_bundle(BackboneKind::mlp, 2, 1, 2, 1, {1});
    zero_params(b);
    set_row(b, 0, 1, {2.0});
    set_row(b, 1, 1, {-3.0});
    // Layer 0: weight (0.5, 1.0), bias 0.25 -> z = 0.5*2 + 1*(-3) + 0.25 =
    // -1.75 -> relu 0. Output: w=2, b=0.1 -> 0.1.
    b.params.get("dnn/w0").data = {0.5, 1.0};
    b.params.get("dnn/b0").data = {0.25};
    b.params.get("dnn/w1").data = {2.0};
    b.params.get("dnn/b1").data = {0.1};
    Instance inst = ones_instance(2);
    ForwardCache cache;
    CHECK(backbone_forward(b, inst, cache) == doctest::Approx(0.1));
    // Flip the sign so the hidden unit is active.
    set_row(b, 1, 1, {3.0});
    // z = 1 + 3 + 0.25 = 4.25 wait: 0.5*2 + 1*3 + 0.25 = 4.25 -> out 8.6.
    CHECK(backbone_forward(b, inst, cache) == doctest::Approx(2.0 * 4.25 + 0.1));
  }
  SUBCASE("mlp equals deepfm with the FM part silenced") {
    ModelBundle mlp = make_test_bundle(BackboneKind::mlp, 2, 2, 3, 5, {4});
    ModelBundle deep = make_test_bundle(BackboneKind::deepfm, 2, 2, 3, 5, {4});
    // Same seed -> identical embeddings and DNN draws; zero the FM side.
    std::fill(deep.emb(0).data.begin(), deep.emb(0).data.end(), 0.0);
    std::fill(deep.emb(1).data.begin(), deep.emb(1).data.end(), 0.0);
    std::fill(mlp.emb(0).data.begin(), mlp.emb(0).data.end(), 0.0);
    std::fill(mlp.emb(1).data.begin(), mlp.emb(1).data.end(), 0.0);
    Instance inst = ones_instance(2);
    ForwardCache c1, c2;
    CHECK(backbone_forward(mlp, inst, c1) ==
          doctest::Approx(backbone_forward(deep, inst, c2)));
  }
}

TEST_CASE("reduction identities on random instances") {
  const std::size_t K = 4, D = 8, V = 6;
  const auto schema = testsupport::make_categorical_schema(K);
  const std::vector<std::size_t> vocab(K, V);
  const Dataset data = testsupport::random_dataset(schema, vocab, 200, 99);

  ModelBundle fm = make_test_bundle(BackboneKind::fm, K, D, V, 7);
  ModelBundle fwfm = make_test_bundle(BackboneKind::fwfm, K, D, V, 7);
  ModelBundle fmfm = make_test_bundle(BackboneKind::fmfm, K, D, V, 7);
  ModelBundle deepfm = make_test_bundle(BackboneKind::deepfm, K, D, V, 7, {8, 8});
  for (std::size_t l = 0; l < 3; ++l) {
    auto* t = deepfm.params.find("dnn/w" + std::to_string(l));
    if (t != nullptr) {
      auto& tensor = deepfm.params.get("dnn/w" + std::to_string(l));
      std::fill(tensor.data.begin(), tensor.data.end(), 0.0);
    }
  }

  ForwardCache cache;
  for (const Instance& inst : data.instances) {
    const double base = backbone_forward(fm, inst, cache);
    CHECK(std::abs(backbone_forward(fwfm, inst, cache) - base) <= 1e-12);
    CHECK(std::abs(backbone_forward(fmfm, inst, cache) - base) <= 1e-12);
    CHECK(std::abs(backbone_forward(deepfm, inst, cache) - base) <= 1e-12);
  }
}

TEST_CASE("field permutation invariance") {
  const std::size_t K = 4, D = 3, V = 5;
  Rng rng(42);
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);  // new_field[perm[k]] = old_field[k]

  const auto kinds = {BackboneKind::fm, BackboneKind::fwfm, BackboneKind::fmfm,
                      BackboneKind::deepfm, BackboneKind::mlp};
  for (BackboneKind kind : kinds) {
    CAPTURE(backbone_kind_name(kind));
    const std::vector<std::size_t> hidden =
        (kind == BackboneKind::deepfm || kind == BackboneKind::mlp)
            ? std::vector<std::size_t>{6}
            : std::vector<std::size_t>{};
    ModelBundle a = make_test_bundle(kind, K, D, V, 13, hidden);
    ModelBundle b = make_test_bundle(kind, K, D, V, 13, hidden);

    // Permute b's parameters consistently with the field permutation.
    for (std::size_t k = 0; k < K; ++k) {
      b.emb(perm[k]).data = a.emb(k).data;
      if (a.uses_linear()) b.linear_w(perm[k]).data = a.linear_w(k).data;
    }
    if (kind == BackboneKind::fwfm) {
      Tensor& ra = a.params.get("fwfm/r");
      Tensor& rb = b.params.get("fwfm/r");
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = k + 1; l < K; ++l) {
          const std::size_t i = std::min(perm[k], perm[l]);
          const std::size_t j = std::max(perm[k], perm[l]);
          rb.data[i * K + j] = ra.data[k * K + l];
        }
      }
    } else if (kind == BackboneKind::fmfm) {
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = k + 1; l < K; ++l) {
          const Tensor& ma = a.params.at(a.fmfm_pair_index(k, l));
          const std::size_t i = std::min(perm[k], perm[l]);
          const std::size_t j = std::max(perm[k], perm[l]);
          Tensor& mb = b.params.at(b.fmfm_pair_index(i, j));
          if (perm[k] < perm[l]) {
            mb.data = ma.data;
          } else {
            for (std::size_t r = 0; r < D; ++r) {  // transpose
              for (std::size_t c = 0; c < D; ++c) {
                mb.data[c * D + r] = ma.data[r * D + c];
              }
            }
          }
        }
      }
    }
    if (kind == BackboneKind::deepfm || kind == BackboneKind::mlp) {
      // Permute the first layer's input row blocks.
      const Tensor& wa = a.params.get("dnn/w0");
      Tensor& wb = b.params.get("dnn/w0");
      const std::size_t out = wa.shape[1];
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t d = 0; d < D; ++d) {
          std::copy(wa.data.begin() + (k * D + d) * out,
                    wa.data.begin() + (k * D + d + 1) * out,
                    wb.data.begin() + (perm[k] * D + d) * out);
        }
      }
      for (std::size_t l = 1;; ++l) {
        const Tensor* t = a.params.find("dnn/w" + std::to_string(l));
        if (t == nullptr) break;
        b.params.get("dnn/w" + std::to_string(l)).data = t->data;
        b.params.get("dnn/b" + std::to_string(l)).data =
            a.params.get("dnn/b" + std::to_string(l)).data;
      }
      b.params.get("dnn/b0").data = a.params.get("dnn/b0").data;
    }

    Rng irng(8);
    for (int trial = 0; trial < 20; ++trial) {
      Instance ia;
      ia.features.resize(K);
      for (std::size_t k = 0; k < K; ++k) {
        ia.features[k] = {static_cast<std::uint32_t>(1 + irng.below(V - 1)),
                          irng.uniform(0.5, 1.5)};
      }
      Instance ib;
      ib.features.resize(K);
      for (std::size_t k = 0; k < K; ++k) ib.features[perm[k]] = ia.features[k];

      ForwardCache ca, cb;
      CHECK(backbone_forward(a, ia, ca) ==
            doctest::Approx(backbone_forward(b, ib, cb)).epsilon(1e-12));
    }
  }
}

TEST_CASE("predict is a stable strictly monotone sigmoid") {
  CHECK(predict(0.0) == doctest::Approx(0.5));
  CHECK(predict(std::log(3.0)) == doctest::Approx(0.75));
  CHECK(predict(1000.0) == doctest::Approx(1.0));
  CHECK(predict(-1000.0) == doctest::Approx(0.0));
  CHECK(predict(1000.0) <= 1.0);
  CHECK(predict(-1000.0) >= 0.0);
  double prev = predict(-20.0);
  for (double z = -19.5; z <= 20.0; z += 0.5) {
    const double cur = predict(z);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("fm backward matches the hand-differentiated example") {
  ModelBundle b = make_test_bundle(BackboneKind::fm, 2, 2, 2, 1);
  zero_params(b);
  set_row(b, 0, 1, {1.0, 2.0});
  set_row(b, 1, 1, {3.0, 4.0});
  Instance inst = ones_instance(2);
  ForwardCache cache;
  backbone_forward(b, inst, cache);

  ParamStore grads = b.params.zeros_like();
  std::vector<double> demb(4, 0.0);
  backbone_backward(b, inst, cache, 1.0, grads, demb);
  // dPhi/de_0 = e_1 and vice versa.
  CHECK(demb[0] == doctest::Approx(3.0));
  CHECK(demb[1] == doctest::Approx(4.0));
  CHECK(demb[2] == doctest::Approx(1.0));
  CHECK(demb[3] == doctest::Approx(2.0));
  CHECK(grads.at(0).data[0] == doctest::Approx(1.0));  // w0
  CHECK(grads.get("w/0").data[1] == doctest::Approx(1.0));

  scatter_embedding_grads(b, inst, demb, grads);
  const Tensor& gemb0 = grads.at(b.emb_index(0));
  CHECK(gemb0.data[2] == doctest::Approx(3.0));
  // Untouched rows stay zero.
  CHECK(gemb0.data[0] == 0.0);
  CHECK(gemb0.data[1] == 0.0);
}
