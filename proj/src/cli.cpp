#include "fieldctr/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldctr/checkpoint.hpp"
#include "fieldctr/config.hpp"
#include "fieldctr/corpus.hpp"
#include "fieldctr/dataset.hpp"
#include "fieldctr/error.hpp"
#include "fieldctr/field_embeddings.hpp"
#include "fieldctr/interaction.hpp"
#include "fieldctr/metrics.hpp"
#include "fieldctr/num_format.hpp"
#include "fieldctr/schema.hpp"
#include "fieldctr/training.hpp"
#include "fieldctr/vocab.hpp"

namespace fieldctr {

namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig cfg;
  fs::path out_dir;
};

Context make_context(const std::string& config_path,
                     const std::optional<std::uint64_t>& seed,
                     const std::string& out_override) {
  Context ctx;
  ctx.cfg = load_run_config(config_path);
  if (seed) ctx.cfg.train.seed = *seed;
  if (!out_override.empty()) ctx.cfg.out_dir = out_override;
  ctx.out_dir = ctx.cfg.out_dir;
  return ctx;
}

std::shared_ptr<const FieldSchema> load_schema_shared(const RunConfig& cfg) {
  if (cfg.schema_path.empty()) throw Error("config: data.schema is required");
  return std::make_shared<const FieldSchema>(load_schema(cfg.schema_path));
}

struct PreparedData {
  std::shared_ptr<const FieldSchema> schema;
  FeatureVocab vocab;
  Dataset train;
  Dataset val;
  Dataset test;
};

PreparedData load_prepared(const RunConfig& cfg) {
  PreparedData data;
  data.schema = load_schema_shared(cfg);
  const fs::path dir = cfg.data_dir;
  data.vocab = FeatureVocab::load_files(dir, *data.schema);
  data.train = read_split_file(dir / "train.tsv", data.schema, SplitTag::train);
  data.val = read_split_file(dir / "val.tsv", data.schema, SplitTag::val);
  data.test = read_split_file(dir / "test.tsv", data.schema, SplitTag::test);
  index_dataset(data.train, data.vocab);
  index_dataset(data.val, data.vocab);
  index_dataset(data.test, data.vocab);
  return data;
}

FieldEmbeddingMatrix resolve_field_embeddings(const RunConfig& cfg,
                                              const FieldSchema& schema,
                                              bool untuned) {
  if (cfg.source == "file") {
    const std::string& path = untuned ? cfg.file_untuned : cfg.file;
    if (path.empty()) {
      throw Error(untuned ? "config: embeddings.file_untuned is required"
                          : "config: embeddings.file is required");
    }
    return load_field_embeddings(path, schema);
  }
  const std::string& mode_name =
      untuned ? cfg.synthetic_mode_untuned : cfg.synthetic_mode;
  const SyntheticMode mode = mode_name == "raw" ? SyntheticMode::raw
                                                : SyntheticMode::structured;
  return synthetic_encode(schema, mode, cfg.train.seed, cfg.dsem, cfg.clusters);
}

FieMode resolve_fie_mode(const RunConfig& cfg, BackboneKind kind) {
  if (cfg.fie_mode == "auto") {
    return kind == BackboneKind::mlp ? FieMode::implicit_plugin
                                     : FieMode::explicit_term;
  }
  return fie_mode_from_name(cfg.fie_mode);
}

std::vector<std::uint8_t> labels_of(const Dataset& ds) {
  std::vector<std::uint8_t> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.instances[i].label;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text << '\n';
}

int cmd_prepare(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.raw_path.empty()) throw Error("config: data.raw is required");
  auto schema = load_schema_shared(cfg);
  Dataset ds = ingest_table(cfg.raw_path, schema, cfg.rating_threshold,
                            cfg.drop_neutral);
  if (cfg.kcore > 0) {
    const auto user = schema->index_of(cfg.kcore_user_field);
    const auto item = schema->index_of(cfg.kcore_item_field);
    if (!user || !item) {
      throw Error("config: kcore_user_field / kcore_item_field must name schema fields");
    }
    const std::size_t before = ds.size();
    ds = kcore_filter(ds, *user, *item, cfg.kcore);
    std::cout << "kcore " << cfg.kcore << ": " << before << " -> " << ds.size()
              << " instances\n";
  }
  const auto splits = temporal_split(ds);
  const FeatureVocab vocab = FeatureVocab::build(splits[0], *schema);

  const fs::path dir = cfg.data_dir;
  fs::create_directories(dir);
  write_split_file(splits[0], dir / "train.tsv");
  write_split_file(splits[1], dir / "val.tsv");
  write_split_file(splits[2], dir / "test.tsv");
  vocab.export_files(dir, *schema);
  std::cout << "prepared " << ds.size() << " instances: train "
            << splits[0].size() << ", val " << splits[1].size() << ", test "
            << splits[2].size() << "\n";
  return 0;
}

int cmd_gen_corpus(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  auto schema = load_schema_shared(cfg);
  const FeatureVocab vocab = FeatureVocab::load_files(cfg.data_dir, *schema);
  CorpusConfig ccfg;
  ccfg.samples_per_field = cfg.samples_per_field;
  ccfg.seed = cfg.train.seed;
  ccfg.template_id = cfg.template_id;
  const auto corpus = build_corpus(vocab, *schema, ccfg);
  emit_corpus(corpus, *schema, cfg.corpus_out);

  std::map<std::size_t, std::size_t> per_field;
  for (const auto& ex : corpus) ++per_field[ex.field_index];
  for (const auto& [field, count] : per_field) {
    std::cout << schema->field(field).name << ": " << count << " samples\n";
  }
  std::cout << "wrote " << corpus.size() << " examples to " << cfg.corpus_out
            << "\n";
  return 0;
}

int cmd_gen_embeddings(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  auto schema = load_schema_shared(cfg);
  const auto tuned = resolve_field_embeddings(cfg, *schema, false);
  save_field_embeddings(tuned, *schema, cfg.out);
  std::cout << "wrote " << cfg.out << " (" << tuned.field_count() << " x "
            << tuned.dim() << ")\n";
  if (!cfg.out_untuned.empty()) {
    const auto untuned = resolve_field_embeddings(cfg, *schema, true);
    save_field_embeddings(untuned, *schema, cfg.out_untuned);
    std::cout << "wrote " << cfg.out_untuned << " (" << untuned.field_count()
              << " x " << untuned.dim() << ")\n";
  }
  return 0;
}

struct TrainOutcome {
  MetricsReport test_metrics;
  RunRecord record;
  ModelBundle bundle;
};

TrainOutcome run_training(const RunConfig& cfg, const PreparedData& data,
                          double lambda_kl, double lambda_fm, bool untuned) {
  const BackboneKind kind = backbone_kind_from_name(cfg.backbone);
  FreConfig fre;
  fre.lambda_kl = lambda_kl;
  fre.variant = fre_variant_from_name(cfg.fre_variant);
  fre.cl_temperature = cfg.cl_temperature;
  FieConfig fie;
  fie.lambda_fm = lambda_fm;
  fie.mode = resolve_fie_mode(cfg, kind);

  const bool need_embeddings = fre.active() || fie.active();
  std::optional<FieldEmbeddingMatrix> field_emb;
  std::optional<InteractionMatrix> raw_m;
  if (need_embeddings) {
    field_emb = resolve_field_embeddings(cfg, *data.schema, untuned);
    if (fie.active()) raw_m = field_interaction_matrix(*field_emb);
  }

  BundleConfig bc;
  bc.kind = kind;
  bc.embedding_dim = cfg.embedding_dim;
  bc.dnn_hidden = cfg.dnn_hidden;
  bc.with_fre_adaptor = fre.active();
  bc.semantic_dim = field_emb ? field_emb->dim() : 0;
  bc.with_fie_rescale = fie.active();

  TrainOutcome outcome;
  outcome.bundle =
      make_bundle(*data.schema, data.vocab.sizes(), bc, cfg.train.seed);

  EnhancementInputs enh;
  enh.fre = fre;
  enh.fie = fie;
  enh.field_embeddings = field_emb ? &*field_emb : nullptr;
  enh.raw_interactions = raw_m ? &*raw_m : nullptr;

  const FitResult result =
      fit(outcome.bundle, data.train, data.val, cfg.train, enh);
  outcome.record = result.record;

  const auto probs = predict_dataset(outcome.bundle, data.test, enh);
  const auto labels = labels_of(data.test);
  outcome.test_metrics = evaluate_scores(labels, probs);
  return outcome;
}

int cmd_train(const Context& ctx, const std::vector<std::string>& ablations) {
  const RunConfig& cfg = ctx.cfg;
  double lambda_kl = cfg.lambda_kl;
  double lambda_fm = cfg.lambda_fm;
  bool untuned = false;
  for (const std::string& a : ablations) {
    if (a == "wo-fre") {
      std::cout << "ablation wo-fre: lambda_kl " << lambda_kl << " -> 0\n";
      lambda_kl = 0.0;
    } else if (a == "wo-fie") {
      std::cout << "ablation wo-fie: lambda_fm " << lambda_fm << " -> 0\n";
      lambda_fm = 0.0;
    } else if (a == "wo-ft") {
      std::cout << "ablation wo-ft: using untuned field embeddings\n";
      untuned = true;
    } else {
      throw Error("train: unknown ablation '" + a +
                  "' (expected wo-fre, wo-fie, wo-ft)");
    }
  }

  const PreparedData data = load_prepared(cfg);
  const TrainOutcome outcome =
      run_training(cfg, data, lambda_kl, lambda_fm, untuned);

  fs::create_directories(ctx.out_dir);
  save_checkpoint(outcome.bundle, data.schema->hash(),
                  ctx.out_dir / "checkpoint.bin");
  write_run_log(outcome.record, ctx.out_dir / "run_log.jsonl");
  write_text(ctx.out_dir / "metrics.json", outcome.test_metrics.to_json());

  std::cout << "best epoch " << outcome.record.best_epoch + 1 << " of "
            << outcome.record.epochs.size() << ", val AUC "
            << outcome.record.epochs[outcome.record.best_epoch].val_auc << "\n"
            << "test " << outcome.test_metrics.to_json() << "\n"
            << "wall clock: " << outcome.record.wall_seconds << " s\n";
  return 0;
}

int cmd_evaluate(const Context& ctx, const std::string& checkpoint_path,
                 std::optional<double> base_auc) {
  const RunConfig& cfg = ctx.cfg;
  const PreparedData data = load_prepared(cfg);
  const fs::path path = checkpoint_path.empty()
                            ? ctx.out_dir / "checkpoint.bin"
                            : fs::path(checkpoint_path);
  LoadedCheckpoint loaded = load_checkpoint(path);
  if (loaded.schema_hash != data.schema->hash()) {
    throw Error("evaluate: checkpoint schema hash does not match the configured schema");
  }

  EnhancementInputs enh;  // FRE is train-time only
  std::optional<FieldEmbeddingMatrix> field_emb;
  std::optional<InteractionMatrix> raw_m;
  if (loaded.bundle.has_fie_rescale) {
    enh.fie.lambda_fm = cfg.lambda_fm;
    enh.fie.mode = resolve_fie_mode(cfg, loaded.bundle.kind);
    field_emb = resolve_field_embeddings(cfg, *data.schema, false);
    raw_m = field_interaction_matrix(*field_emb);
    enh.raw_interactions = &*raw_m;
  }

  const auto probs = predict_dataset(loaded.bundle, data.test, enh);
  const auto labels = labels_of(data.test);
  const MetricsReport report = evaluate_scores(labels, probs, base_auc);
  fs::create_directories(ctx.out_dir);
  write_text(ctx.out_dir / "eval_metrics.json", report.to_json());
  std::cout << report.to_json() << "\n";
  return 0;
}

int cmd_sweep(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const PreparedData data = load_prepared(cfg);

  struct Cell {
    double lambda_kl;
    double lambda_fm;
    std::optional<MetricsReport> metrics;
    std::size_t best_epoch = 0;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double lkl : cfg.lambda_kl_grid) {
    for (double lfm : cfg.lambda_fm_grid) {
      Cell cell{lkl, lfm, std::nullopt, 0, ""};
      try {
        const TrainOutcome outcome = run_training(cfg, data, lkl, lfm, false);
        cell.metrics = outcome.test_metrics;
        cell.best_epoch = outcome.record.best_epoch + 1;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }

  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.metrics.has_value() != b.metrics.has_value()) {
      return a.metrics.has_value();
    }
    if (!a.metrics) return false;
    return a.metrics->auc > b.metrics->auc;
  });

  fs::create_directories(ctx.out_dir);
  const fs::path path = ctx.out_dir / "sweep.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("sweep: cannot write " + path.string());
  out << "lambda_kl,lambda_fm,auc,logloss,n_eval,best_epoch,status,best\n";
  bool marked = false;
  for (const Cell& cell : cells) {
    out << format_compact(cell.lambda_kl) << ','
        << format_compact(cell.lambda_fm) << ',';
    if (cell.metrics) {
      out << format_compact(cell.metrics->auc) << ','
          << format_compact(cell.metrics->logloss) << ','
          << cell.metrics->n_eval << ',' << cell.best_epoch << ",ok,";
      out << (!marked ? 1 : 0);
      if (!marked) {
        std::cout << "best cell: lambda_kl=" << cell.lambda_kl
                  << " lambda_fm=" << cell.lambda_fm
                  << " auc=" << cell.metrics->auc << "\n";
      }
      marked = true;
    } else {
      out << ",,,,error,0";
    }
    out << '\n';
  }
  std::cout << "wrote " << path.string() << " (" << cells.size() << " cells)\n";
  return 0;
}

int cmd_export_heatmap(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  auto schema = load_schema_shared(cfg);
  const auto field_emb = resolve_field_embeddings(cfg, *schema, false);
  const InteractionMatrix m = field_interaction_matrix(field_emb);
  fs::create_directories(ctx.out_dir);
  const fs::path path = ctx.out_dir / "interaction_matrix.csv";
  write_interaction_csv(m, *schema, path);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"field-semantic CTR training engine"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_override;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--seed", seed, "override train.seed");
  app.add_option("--out", out_override, "override output.dir");

  auto* prepare = app.add_subcommand("prepare", "ingest, split and build vocab");
  auto* gen_corpus = app.add_subcommand("gen-corpus", "emit the SSFT corpus");
  auto* gen_embeddings =
      app.add_subcommand("gen-embeddings", "write synthetic field embeddings");
  auto* train = app.add_subcommand("train", "train one configuration");
  std::vector<std::string> ablations;
  train->add_option("--ablate", ablations,
                    "disable a component: wo-fre, wo-fie, wo-ft");
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
  std::string checkpoint_path;
  std::optional<double> base_auc;
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file");
  evaluate->add_option("--base-auc", base_auc, "base AUC for RelaImpr");
  auto* sweep = app.add_subcommand("sweep", "grid over lambda_kl x lambda_fm");
  auto* heatmap =
      app.add_subcommand("export-heatmap", "write the field interaction matrix");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("fieldctr");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const Context ctx = make_context(config_path, seed, out_override);
    if (prepare->parsed()) return cmd_prepare(ctx);
    if (gen_corpus->parsed()) return cmd_gen_corpus(ctx);
    if (gen_embeddings->parsed()) return cmd_gen_embeddings(ctx);
    if (train->parsed()) return cmd_train(ctx, ablations);
    if (evaluate->parsed()) return cmd_evaluate(ctx, checkpoint_path, base_auc);
    if (sweep->parsed()) return cmd_sweep(ctx);
    if (heatmap->parsed()) return cmd_export_heatmap(ctx);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fieldctr
