#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fieldctr/schema.hpp"
#include "fieldctr/vocab.hpp"

namespace fieldctr {

struct CorpusConfig {
  std::size_t samples_per_field = 1000;
  std::uint64_t seed = 0;
  std::string template_id = "default-v1";
};

struct CorpusExample {
  std::string prompt;
  std::string response;  // verbatim field description
  std::size_t field_index = 0;
  std::uint32_t feature_index = 0;
};

// Per field, min(S, available non-OOV features) drawn uniformly without
// replacement; deterministic in the seed. Fields with an empty vocabulary
// are skipped with a warning.
std::vector<std::pair<std::size_t, std::uint32_t>> sample_features(
    const FeatureVocab& vocab, const FieldSchema& schema,
    const CorpusConfig& cfg);

// f_j^k rendering: the raw feature string joined with its field name.
std::string feature_description(const FieldSchema& schema,
                                const FeatureVocab& vocab, std::size_t field,
                                std::uint32_t feature);

// Three-slot template: task description, feature description, candidate
// field descriptions in schema order.
std::string build_prompt(const std::string& feature_desc,
                         const FieldSchema& schema,
                         const std::string& template_id);

std::vector<CorpusExample> build_corpus(const FeatureVocab& vocab,
                                        const FieldSchema& schema,
                                        const CorpusConfig& cfg);

// One JSON object per line: {"prompt": ..., "response": ..., "field": ...},
// field-major then sample order. Rerunning with the same inputs is
// byte-identical.
void emit_corpus(const std::vector<CorpusExample>& examples,
                 const FieldSchema& schema,
                 const std::filesystem::path& path);

// Externally produced encodings for contrastive evaluation: the K field
// encodings plus any number of prompt encodings.
struct EncodingSet {
  std::size_t dim = 0;
  double temperature = 0.02;
  std::vector<std::vector<double>> field_encodings;   // schema order
  std::vector<std::string> prompt_ids;                // file order
  std::vector<std::vector<double>> prompt_encodings;  // file order
};

// Same JSONL contract as the field-embedding file plus
// {"prompt_id": ..., "embedding": [...]} records.
EncodingSet load_encoding_set(const std::filesystem::path& path,
                              const FieldSchema& schema);

// L = -(1/n) sum_j log softmax_l(cos(p_j, F_l)/tau)[assignment_j].
double contrastive_loss(const EncodingSet& enc,
                        std::span<const std::size_t> assignments);

}  // namespace fieldctr
