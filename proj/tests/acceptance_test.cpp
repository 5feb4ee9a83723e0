// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldctr/checkpoint.hpp"
#include "fieldctr/cli.hpp"
#include "fieldctr/corpus.hpp"
#include "fieldctr/interaction.hpp"
#include "fieldctr/metrics.hpp"
#include "fieldctr/rng.hpp"
#include "fieldctr/training.hpp"
#include "support/synthetic_data.hpp"

using namespace fieldctr;
using namespace fieldctr::testsupport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- helpers

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

Dataset slice(const Dataset& ds, std::size_t begin, std::size_t end,
              SplitTag tag) {
  Dataset out;
  out.schema = ds.schema;
  out.indexed = ds.indexed;
  out.split = tag;
  out.instances.assign(ds.instances.begin() + begin, ds.instances.begin() + end);
  out.raw_values.assign(ds.raw_values.begin() + begin, ds.raw_values.begin() + end);
  return out;
}

std::vector<std::uint8_t> labels_of(const Dataset& ds) {
  std::vector<std::uint8_t> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.instances[i].label;
  return out;
}

double test_auc(const ModelBundle& bundle, const Dataset& test,
                const EnhancementInputs& enh) {
  const auto probs = predict_dataset(bundle, test, enh);
  const auto labels = labels_of(test);
  return auc(labels, probs);
}

// ------------------------------------------------------------- criterion 1

Outcome criterion_relaimpr() {
  const double a = relaimpr(0.6673, 0.6621);
  const double b = relaimpr(0.6797, 0.6713);
  std::ostringstream detail;
  detail << "relaimpr(0.6673|0.6621) = " << a
         << "%, relaimpr(0.6797|0.6713) = " << b << "%";
  return {std::abs(a - 3.21) <= 0.005 && std::abs(b - 4.90) <= 0.005,
          detail.str()};
}

// ------------------------------------------------------------- criterion 2

Outcome criterion_grad_fidelity() {
  const std::size_t K = 3, D = 4, V = 5, dsem = 5;
  const auto schema = make_categorical_schema(K);
  const std::vector<std::size_t> vocab(K, V);
  const Dataset data = random_dataset(schema, vocab, 8, 20250401);
  std::vector<std::size_t> batch(data.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;

  Rng hr(5151);
  std::vector<double> hdata(K * dsem);
  for (double& x : hdata) x = hr.normal(0.4, 1.0);
  const FieldEmbeddingMatrix h(K, dsem, hdata, EmbeddingProvenance::loaded);
  const InteractionMatrix raw = field_interaction_matrix(h);

  enum class Mode { off, fre, fie_explicit, fie_implicit, both };
  const BackboneKind kinds[] = {BackboneKind::fm, BackboneKind::fwfm,
                                BackboneKind::fmfm, BackboneKind::deepfm,
                                BackboneKind::mlp};
  const Mode modes[] = {Mode::off, Mode::fre, Mode::fie_explicit,
                        Mode::fie_implicit, Mode::both};
  const char* mode_names[] = {"off", "fre", "fie-explicit", "fie-implicit",
                              "both"};

  double worst = 0.0;
  std::string worst_at = "-";
  for (BackboneKind kind : kinds) {
    const bool has_dnn =
        kind == BackboneKind::deepfm || kind == BackboneKind::mlp;
    for (std::size_t m = 0; m < 5; ++m) {
      const Mode mode = modes[m];
      const bool fre = mode == Mode::fre || mode == Mode::both;
      const bool fie = mode == Mode::fie_explicit ||
                       mode == Mode::fie_implicit || mode == Mode::both;
      BundleConfig bc;
      bc.kind = kind;
      bc.embedding_dim = D;
      bc.dnn_hidden = has_dnn ? std::vector<std::size_t>{4, 4}
                              : std::vector<std::size_t>{};
      bc.with_fre_adaptor = fre;
      bc.semantic_dim = dsem;
      bc.with_fie_rescale = fie;

      // Pick a seed whose ReLU pre-activations clear the probe window.
      ModelBundle bundle = make_bundle(*schema, vocab, bc, 100);
      for (std::uint64_t seed = 100;; ++seed) {
        bundle = make_bundle(*schema, vocab, bc, seed);
        Rng rng(seed * 3 + 1);
        for (std::size_t k = 0; k < K; ++k) {
          for (double& x : bundle.emb(k).data) x = rng.normal(0.0, 0.6);
        }
        if (relu_kink_margin(bundle, data, batch) > 1e-3) break;
      }

      EnhancementInputs enh;
      if (fre) {
        enh.fre.lambda_kl = 0.5;
        enh.fre.variant = FreVariant::kl;
        enh.field_embeddings = &h;
      }
      if (fie) {
        enh.fie.lambda_fm = 0.4;
        enh.fie.mode = mode == Mode::fie_implicit
                           ? FieMode::implicit_plugin
                           : (kind == BackboneKind::mlp
                                  ? FieMode::implicit_plugin
                                  : FieMode::explicit_term);
        enh.raw_interactions = &raw;
      }
      const GradCheckReport report =
          grad_check(bundle, data, batch, enh, 1e-5, 1e-4);
      if (report.worst > worst) {
        worst = report.worst;
        worst_at = std::string(backbone_kind_name(kind)) + "/" + mode_names[m];
      }
      if (!report.pass) {
        return {false, "max rel error " + std::to_string(report.worst) +
                           " at " + worst_at};
      }
    }
  }
  std::ostringstream detail;
  detail << "25 backbone x mode combos, worst rel error " << worst << " ("
         << worst_at << ")";
  return {true, detail.str()};
}

// ------------------------------------------------------------- criterion 3

Outcome criterion_ablation_exactness() {
  PlantedPairsSpec spec;
  spec.values_per_field = 40;
  spec.strength = 1.2;
  spec.bias = -0.4;
  const PlantedPairs gen(spec, 99);
  const Dataset all = gen.sample(10000, 77);
  const Dataset train = slice(all, 0, 8000, SplitTag::train);
  const Dataset val = slice(all, 8000, 9000, SplitTag::val);

  const FieldEmbeddingMatrix h = synthetic_encode(
      *gen.schema(), SyntheticMode::structured, 7, 32,
      {{"field0", "field1"}, {"field2", "field3"}});
  const InteractionMatrix raw = field_interaction_matrix(h);

  const fs::path dir = fs::temp_directory_path() / "fieldctr_acceptance_c3";
  fs::create_directories(dir);

  TrainConfig cfg;
  cfg.learning_rate = 0.001;
  cfg.batch_size = 256;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.seed = 4242;

  const BackboneKind kinds[] = {BackboneKind::fm, BackboneKind::fwfm,
                                BackboneKind::fmfm, BackboneKind::deepfm,
                                BackboneKind::mlp};
  for (BackboneKind kind : kinds) {
    const bool has_dnn =
        kind == BackboneKind::deepfm || kind == BackboneKind::mlp;
    BundleConfig bc;
    bc.kind = kind;
    bc.embedding_dim = 8;
    bc.dnn_hidden = has_dnn ? std::vector<std::size_t>{32, 32}
                            : std::vector<std::size_t>{};

    ModelBundle bare = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, cfg.seed);
    EnhancementInputs none;
    fit(bare, train, val, cfg, none);
    save_checkpoint(bare, gen.schema()->hash(), dir / "bare.bin");

    ModelBundle zeroed = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, cfg.seed);
    EnhancementInputs inactive;
    inactive.fre.lambda_kl = 0.0;
    inactive.fie.lambda_fm = 0.0;
    inactive.fie.mode = FieMode::off;
    inactive.field_embeddings = &h;
    inactive.raw_interactions = &raw;
    fit(zeroed, train, val, cfg, inactive);
    save_checkpoint(zeroed, gen.schema()->hash(), dir / "zeroed.bin");

    if (slurp(dir / "bare.bin") != slurp(dir / "zeroed.bin")) {
      fs::remove_all(dir);
      return {false, std::string("checkpoint mismatch for ") +
                         std::string(backbone_kind_name(kind))};
    }
  }
  fs::remove_all(dir);
  return {true, "5 backbones x 5 epochs on 10k instances, byte-identical "
                "checkpoints"};
}

// ------------------------------------------------------------- criterion 4

double auc_pair_count(const std::vector<std::uint8_t>& labels,
                      const std::vector<double>& scores) {
  double credit = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) credit += 1.0;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

Outcome criterion_auc_oracle() {
  Rng rng(20250810);
  std::size_t tied_scores = 0, total_scores = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(999);
    std::vector<std::uint8_t> labels(n);
    std::vector<double> scores(n);
    const bool quantize = rng.uniform01() < 0.7;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
      scores[i] = quantize ? static_cast<double>(rng.below(7)) / 7.0
                           : rng.uniform01();
    }
    labels[0] = 1;
    if (n > 1) labels[1] = 0;

    std::map<double, std::size_t> counts;
    for (double s : scores) ++counts[s];
    for (double s : scores) tied_scores += counts[s] > 1;
    total_scores += n;

    const double fast = auc(labels, scores);
    const double oracle = auc_pair_count(labels, scores);
    if (fast != oracle) {
      std::ostringstream detail;
      detail.precision(17);
      detail << "trial " << trial << ": fast " << fast << " != oracle "
             << oracle;
      return {false, detail.str()};
    }
  }
  const double tie_frac =
      static_cast<double>(tied_scores) / static_cast<double>(total_scores);
  std::ostringstream detail;
  detail << "200 sets exact, tie fraction " << tie_frac;
  return {tie_frac >= 0.3, detail.str()};
}

// ------------------------------------------------------------- criterion 5

Outcome criterion_reduction_identities() {
  const std::size_t K = 5, D = 8, V = 7;
  const auto schema = make_categorical_schema(K);
  const std::vector<std::size_t> vocab(K, V);

  BundleConfig bc;
  bc.kind = BackboneKind::fm;
  bc.embedding_dim = D;
  ModelBundle fm = make_bundle(*schema, vocab, bc, 31);
  bc.kind = BackboneKind::fwfm;
  ModelBundle fwfm = make_bundle(*schema, vocab, bc, 31);  // r = 1 init
  bc.kind = BackboneKind::fmfm;
  ModelBundle fmfm = make_bundle(*schema, vocab, bc, 31);  // M = I init
  bc.kind = BackboneKind::deepfm;
  bc.dnn_hidden = {16, 16};
  ModelBundle deepfm = make_bundle(*schema, vocab, bc, 31);
  for (std::size_t l = 0; l < 3; ++l) {
    Tensor& w = deepfm.params.at(deepfm.dnn_w_index(l));
    std::fill(w.data.begin(), w.data.end(), 0.0);
  }

  Rng rng(8);
  ForwardCache cache;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Instance inst;
    inst.features.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      inst.features[k] = {static_cast<std::uint32_t>(1 + rng.below(V - 1)),
                          rng.uniform(0.5, 1.5)};
    }
    const double base = backbone_forward(fm, inst, cache);
    worst = std::max(worst, std::abs(backbone_forward(fwfm, inst, cache) - base));
    worst = std::max(worst, std::abs(backbone_forward(fmfm, inst, cache) - base));
    worst = std::max(worst, std::abs(backbone_forward(deepfm, inst, cache) - base));
  }
  std::ostringstream detail;
  detail << "1000 instances, max |difference| " << worst;
  return {worst <= 1e-12, detail.str()};
}

// ------------------------------------------------------------- criterion 6

Outcome criterion_planted_recovery() {
  PlantedPairsSpec spec;
  spec.values_per_field = 40;
  spec.strength = 1.2;
  spec.bias = -0.4;
  const PlantedPairs gen(spec, 99);
  const double bayes = gen.bayes_auc();

  const FieldEmbeddingMatrix h = synthetic_encode(
      *gen.schema(), SyntheticMode::structured, 7, 32,
      {{"field0", "field1"}, {"field2", "field3"}});
  const InteractionMatrix raw = field_interaction_matrix(h);
  // The planted pairs must sit at cosine >= 0.9.
  if (raw.at(0, 1) < 0.9 || raw.at(2, 3) < 0.9) {
    return {false, "synthetic embeddings failed to plant the pairs"};
  }

  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 256;
  cfg.max_epochs = 12;
  cfg.patience = 3;

  double mean_bare = 0.0, mean_fie = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset train = gen.sample(8000, seed * 1000 + 1);
    const Dataset val = gen.sample(2000, seed * 1000 + 2);
    const Dataset test = gen.sample(6000, seed * 1000 + 3);
    cfg.seed = seed;

    BundleConfig bc;
    bc.kind = BackboneKind::fm;
    bc.embedding_dim = 8;
    ModelBundle bare = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, seed);
    EnhancementInputs none;
    fit(bare, train, val, cfg, none);
    mean_bare += test_auc(bare, test, none) / 5.0;

    bc.with_fie_rescale = true;
    ModelBundle fie = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, seed);
    EnhancementInputs enh;
    enh.fie.lambda_fm = 1.0;
    enh.fie.mode = FieMode::explicit_term;
    enh.raw_interactions = &raw;
    fit(fie, train, val, cfg, enh);
    mean_fie += test_auc(fie, test, enh) / 5.0;
  }

  std::ostringstream detail;
  detail << "mean test AUC: bare " << mean_bare << ", FM+FIE " << mean_fie
         << ", Bayes " << bayes;
  const bool pass = (mean_fie - mean_bare >= 0.01) && mean_fie < bayes &&
                    mean_bare < bayes;
  return {pass, detail.str()};
}

// ------------------------------------------------------------- criterion 7

Outcome criterion_fre_effect() {
  PlantedPairsSpec spec;
  spec.values_per_field = 40;
  spec.strength = 1.2;
  spec.bias = -0.4;
  const PlantedPairs gen(spec, 99);
  const std::size_t D = 8;
  const FieldEmbeddingMatrix proto = gen.prototype_embeddings(D, 2.0);

  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 256;
  cfg.max_epochs = 12;
  cfg.patience = 3;

  const std::vector<double> grid{0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 1.0};
  double bare_mean = 0.0;
  std::vector<double> cell_mean(grid.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset train = gen.sample(8000, seed * 1000 + 1);
    const Dataset val = gen.sample(2000, seed * 1000 + 2);
    cfg.seed = seed;

    BundleConfig bc;
    bc.kind = BackboneKind::fm;
    bc.embedding_dim = D;
    ModelBundle bare = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, seed);
    EnhancementInputs none;
    const FitResult rb = fit(bare, train, val, cfg, none);
    bare_mean += rb.record.epochs[rb.record.best_epoch].val_auc / 5.0;

    bc.with_fre_adaptor = true;
    bc.semantic_dim = D;
    for (std::size_t c = 0; c < grid.size(); ++c) {
      ModelBundle fre = make_bundle(*gen.schema(), gen.vocab_sizes(), bc, seed);
      EnhancementInputs enh;
      enh.fre.lambda_kl = grid[c];
      enh.fre.variant = FreVariant::kl;
      enh.field_embeddings = &proto;
      const FitResult r = fit(fre, train, val, cfg, enh);
      cell_mean[c] += r.record.epochs[r.record.best_epoch].val_auc / 5.0;
    }
  }
  double best = -1.0;
  double best_lambda = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (cell_mean[c] > best) {
      best = cell_mean[c];
      best_lambda = grid[c];
    }
  }
  std::ostringstream detail;
  detail << "bare mean val AUC " << bare_mean << ", best FRE cell (lambda_kl="
         << best_lambda << ") " << best;
  return {best >= bare_mean, detail.str()};
}

// ------------------------------------------------------------- criterion 8

Outcome criterion_overfit() {
  const OverfitBatch batch = make_overfit_batch(17);
  std::vector<std::size_t> idx(batch.data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  EnhancementInputs enh;
  TrainConfig cfg;  // lr 0.001

  std::ostringstream detail;
  const BackboneKind kinds[] = {BackboneKind::fm, BackboneKind::fwfm,
                                BackboneKind::fmfm, BackboneKind::deepfm,
                                BackboneKind::mlp};
  bool pass = true;
  for (BackboneKind kind : kinds) {
    const bool has_dnn =
        kind == BackboneKind::deepfm || kind == BackboneKind::mlp;
    BundleConfig bc;
    bc.kind = kind;
    bc.embedding_dim = 16;
    bc.dnn_hidden = has_dnn ? std::vector<std::size_t>{64, 64}
                            : std::vector<std::size_t>{};
    ModelBundle bundle = make_bundle(*batch.schema, batch.vocab_sizes, bc, 3);
    AdamState state = AdamState::init(bundle.params);
    ParamStore grads = bundle.params.zeros_like();
    double loss = 1.0;
    for (int step = 0; step < 500 && loss >= 0.01; ++step) {
      grads.fill(0.0);
      loss = compute_gradients(bundle, batch.data, idx, enh, grads);
      adam_step(bundle.params, grads, state, cfg);
    }
    detail << backbone_kind_name(kind) << " " << loss << "  ";
    pass = pass && loss < 0.01;
  }
  return {pass, "final BCE: " + detail.str()};
}

// ------------------------------------------------------------- criterion 9

Outcome criterion_corpus_contract() {
  // 13-field schema with mixed vocabulary sizes.
  std::vector<FieldSpec> specs;
  for (int k = 0; k < 13; ++k) {
    specs.push_back({"field" + std::to_string(k), FieldKind::categorical,
                     "description of synthetic field " + std::to_string(k)});
  }
  const FieldSchema schema(specs);

  Dataset ds;
  ds.schema = std::make_shared<const FieldSchema>(schema);
  const std::size_t counts[13] = {700, 600, 500, 499, 300, 120, 64,
                                  32,  16,  8,   4,   2,   1};
  for (std::size_t i = 0; i < 700; ++i) {
    Instance inst;
    inst.features.resize(13);
    std::vector<std::string> raw(13);
    for (std::size_t k = 0; k < 13; ++k) {
      raw[k] = i < counts[k] ? "v" + std::to_string(i) : std::string();
    }
    ds.instances.push_back(inst);
    ds.raw_values.push_back(std::move(raw));
  }
  const FeatureVocab vocab = FeatureVocab::build(ds, schema);

  CorpusConfig cfg;
  cfg.samples_per_field = 500;
  cfg.seed = 12;
  const auto corpus = build_corpus(vocab, schema, cfg);

  const fs::path dir = fs::temp_directory_path() / "fieldctr_acceptance_c9";
  fs::create_directories(dir);
  emit_corpus(corpus, schema, dir / "a.jsonl");
  emit_corpus(build_corpus(vocab, schema, cfg), schema, dir / "b.jsonl");
  const std::string bytes_a = slurp(dir / "a.jsonl");
  const bool identical = bytes_a == slurp(dir / "b.jsonl");
  fs::remove_all(dir);

  std::size_t lines = 0;
  for (char c : bytes_a) lines += c == '\n';
  bool responses_ok = true;
  for (const auto& ex : corpus) {
    responses_ok &= ex.response == schema.field(ex.field_index).description;
  }

  EncodingSet enc;
  enc.dim = 4;
  enc.temperature = 0.02;
  enc.field_encodings.assign(13, {0.5, 0.5, 0.5, 0.5});
  enc.prompt_encodings = {{1.0, 1.0, 1.0, 1.0}};
  enc.prompt_ids = {"p"};
  const std::vector<std::size_t> assign{3};
  const double uniform_loss = contrastive_loss(enc, assign);
  const bool lnk_ok = std::abs(uniform_loss - std::log(13.0)) <= 1e-9;

  std::ostringstream detail;
  detail << lines << " lines (<= 6500), byte-identical rerun: "
         << (identical ? "yes" : "NO") << ", uniform contrastive loss "
         << uniform_loss << " vs ln 13 " << std::log(13.0);
  return {lines <= 6500 && identical && responses_ok && lnk_ok, detail.str()};
}

// ------------------------------------------------------------ criterion 10

Outcome criterion_desk_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "fieldctr_acceptance_c10";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto schema = ratings_schema();
  {
    std::ofstream out(dir / "schema.tsv");
    for (const FieldSpec& f : schema->fields()) {
      out << f.name << '\t' << field_kind_name(f.kind) << '\t'
          << f.description << '\n';
    }
  }
  RatingsTableSpec spec;  // 943 users, 1682 items, 100k interactions
  write_ratings_csv(dir / "ratings.csv", spec, 7);
  std::ofstream(dir / "run.ini")
      << "[data]\nschema = " << (dir / "schema.tsv").string()
      << "\nraw = " << (dir / "ratings.csv").string()
      << "\ndir = " << (dir / "data").string() << "\nrating_threshold = 4\n"
      << "[model]\nbackbone = fm\nembedding_dim = 32\n"
      << "[train]\nlearning_rate = 0.001\nbatch_size = 256\nmax_epochs = "
         "50\npatience = 3\nseed = 1\n"
      << "[output]\ndir = " << (dir / "runs").string() << "\n";

  const std::string config = (dir / "run.ini").string();
  if (run_cli({"prepare", "--config", config}) != 0) {
    return {false, "prepare failed"};
  }
  if (run_cli({"train", "--config", config}) != 0) {
    return {false, "train failed"};
  }
  const auto metrics =
      nlohmann::json::parse(slurp(dir / "runs" / "metrics.json"));
  const double auc_value = metrics["auc"].get<double>();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  fs::remove_all(dir);

  // Floor fixed from the bare-FM three-seed procedure: min AUC 0.7366 on
  // this generator, minus 0.01, stays above the 0.70 gate used here.
  std::ostringstream detail;
  detail << "test AUC " << auc_value << " (> 0.70), wall " << seconds
         << " s (< 300)";
  return {auc_value > 0.70 && seconds < 300.0, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "RelaImpr reference arithmetic", criterion_relaimpr},
      {2, "Gradient fidelity across backbones and enhancement modes",
       criterion_grad_fidelity},
      {3, "Ablation exactness (zeroed enhancements == bare backbone)",
       criterion_ablation_exactness},
      {4, "Fast AUC equals the pair-counting oracle", criterion_auc_oracle},
      {5, "Reduction identities fwfm/fmfm/deepfm -> fm",
       criterion_reduction_identities},
      {6, "Planted-interaction recovery with FM+FIE",
       criterion_planted_recovery},
      {7, "FRE non-inferiority at the best grid cell", criterion_fre_effect},
      {8, "Overfit sanity on a fixed 64-instance batch", criterion_overfit},
      {9, "Corpus contract and contrastive loss", criterion_corpus_contract},
      {10, "Desk-scale prepare+train run", criterion_desk_run},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("criterion %2d [%s] %s — %s (%.1fs)\n", c.id,
                outcome.pass ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str(), dt);
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures;
}
