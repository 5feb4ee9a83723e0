#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fieldctr/training.hpp"

namespace fieldctr {

// Structured run configuration. Sections and keys are validated against
// the grammar below before any work starts; any scalar can be overridden
// with FIELDCTR_<SECTION>_<KEY> environment variables.
struct RunConfig {
  // [data]
  std::string schema_path;
  std::string raw_path;
  std::string data_dir = "data";
  double rating_threshold = 4.0;
  std::optional<double> drop_neutral;
  std::size_t kcore = 0;
  std::string kcore_user_field;
  std::string kcore_item_field;

  // [embeddings]
  std::string source = "synthetic";  // file | synthetic
  std::string file;
  std::string file_untuned;
  std::string synthetic_mode = "structured";
  std::string synthetic_mode_untuned = "raw";
  std::size_t dsem = 64;
  std::vector<std::pair<std::string, std::string>> clusters;
  std::string out = "field_embeddings.jsonl";
  std::string out_untuned;

  // [model]
  std::string backbone = "fm";
  std::size_t embedding_dim = 32;
  std::vector<std::size_t> dnn_hidden = {300, 300, 128};

  // [train]
  TrainConfig train;

  // [enhance]
  double lambda_kl = 0.0;
  double lambda_fm = 0.0;
  std::string fre_variant = "kl";
  double cl_temperature = 0.02;
  std::string fie_mode = "off";  // off | explicit | implicit

  // [sweep]
  std::vector<double> lambda_kl_grid;
  std::vector<double> lambda_fm_grid;

  // [corpus]
  std::size_t samples_per_field = 1000;
  std::string template_id = "default-v1";
  std::string corpus_out = "corpus.jsonl";

  // [output]
  std::string out_dir = "runs";
};

// The tuned grid from which sweep values must be drawn.
const std::vector<double>& tuned_lambda_grid();

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace fieldctr
