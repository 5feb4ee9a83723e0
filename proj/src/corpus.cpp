#include "fieldctr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"
#include "fieldctr/rng.hpp"

namespace fieldctr {

namespace {

struct PromptTemplate {
  std::string_view id;
  std::string_view text;  // slots: {feature}, {candidates}
};

// Versioned so externally fine-tuned encoders can record which prompt
// wording they were trained on.
constexpr PromptTemplate kTemplates[] = {
    {"default-v1",
     "You are given a feature from a recommender dataset. Decide which field "
     "it belongs to. Feature: {feature}. Candidate fields: {candidates}. "
     "Answer with the field description."},
};

const PromptTemplate& find_template(const std::string& id) {
  for (const PromptTemplate& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw Error("corpus: unknown template '" + id + "'");
}

std::string replace_slot(std::string text, std::string_view slot,
                         const std::string& value) {
  const std::size_t pos = text.find(slot);
  if (pos == std::string::npos) return text;
  return text.replace(pos, slot.size(), value);
}

}  // namespace

std::vector<std::pair<std::size_t, std::uint32_t>> sample_features(
    const FeatureVocab& vocab, const FieldSchema& schema,
    const CorpusConfig& cfg) {
  if (cfg.samples_per_field == 0) {
    throw Error("corpus: samples_per_field must be >= 1");
  }
  std::vector<std::pair<std::size_t, std::uint32_t>> out;
  for (std::size_t k = 0; k < schema.field_count(); ++k) {
    const std::size_t available = vocab.size(k) - 1;  // exclude OOV
    if (available == 0) {
      std::cerr << "warning: corpus: field '" << schema.field(k).name
                << "' has no features; skipped\n";
      continue;
    }
    std::vector<std::uint32_t> candidates(available);
    std::iota(candidates.begin(), candidates.end(), 1u);
    Rng rng = Rng::derive(cfg.seed, "sample_features", k);
    rng.shuffle(candidates);
    const std::size_t take = std::min(cfg.samples_per_field, available);
    for (std::size_t i = 0; i < take; ++i) {
      out.emplace_back(k, candidates[i]);
    }
  }
  return out;
}

std::string feature_description(const FieldSchema& schema,
                                const FeatureVocab& vocab, std::size_t field,
                                std::uint32_t feature) {
  return schema.field(field).name + ": " + vocab.raw_value(field, feature);
}

std::string build_prompt(const std::string& feature_desc,
                         const FieldSchema& schema,
                         const std::string& template_id) {
  if (feature_desc.empty()) throw Error("corpus: empty feature description");
  const PromptTemplate& tpl = find_template(template_id);
  std::string candidates;
  for (std::size_t k = 0; k < schema.field_count(); ++k) {
    if (k > 0) candidates += "; ";
    candidates += schema.field(k).description;
  }
  std::string prompt = replace_slot(std::string(tpl.text), "{feature}",
                                    feature_desc);
  return replace_slot(std::move(prompt), "{candidates}", candidates);
}

std::vector<CorpusExample> build_corpus(const FeatureVocab& vocab,
                                        const FieldSchema& schema,
                                        const CorpusConfig& cfg) {
  std::vector<CorpusExample> out;
  for (const auto& [field, feature] : sample_features(vocab, schema, cfg)) {
    CorpusExample ex;
    ex.field_index = field;
    ex.feature_index = feature;
    ex.prompt = build_prompt(feature_description(schema, vocab, field, feature),
                             schema, cfg.template_id);
    ex.response = schema.field(field).description;
    out.push_back(std::move(ex));
  }
  return out;
}

void emit_corpus(const std::vector<CorpusExample>& examples,
                 const FieldSchema& schema,
                 const std::filesystem::path& path) {
  if (examples.empty()) throw Error("corpus: nothing to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("corpus: cannot write " + path.string());
  for (const CorpusExample& ex : examples) {
    nlohmann::ordered_json j;
    j["prompt"] = ex.prompt;
    j["response"] = ex.response;
    j["field"] = schema.field(ex.field_index).name;
    out << j.dump() << '\n';
  }
}

EncodingSet load_encoding_set(const std::filesystem::path& path,
                              const FieldSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("encodings: cannot open " + path.string());

  EncodingSet enc;
  std::vector<std::vector<double>> fields_by_index(schema.field_count());
  std::vector<bool> seen(schema.field_count(), false);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("encodings: line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    if (!j.contains("embedding")) {
      throw Error("encodings: line " + std::to_string(line_no) +
                  ": missing 'embedding'");
    }
    auto vec = j["embedding"].get<std::vector<double>>();
    if (enc.dim == 0) {
      enc.dim = vec.size();
    } else if (vec.size() != enc.dim) {
      throw Error("encodings: line " + std::to_string(line_no) +
                  ": inconsistent vector length");
    }
    if (std::all_of(vec.begin(), vec.end(), [](double x) { return x == 0.0; })) {
      throw Error("encodings: line " + std::to_string(line_no) +
                  ": zero vector");
    }
    if (j.contains("field")) {
      const auto name = j["field"].get<std::string>();
      const auto idx = schema.index_of(name);
      if (!idx) {
        std::cerr << "warning: encodings: ignoring unknown field '" << name
                  << "'\n";
        continue;
      }
      fields_by_index[*idx] = std::move(vec);
      seen[*idx] = true;
    } else if (j.contains("prompt_id")) {
      enc.prompt_ids.push_back(j["prompt_id"].is_string()
                                   ? j["prompt_id"].get<std::string>()
                                   : j["prompt_id"].dump());
      enc.prompt_encodings.push_back(std::move(vec));
    } else {
      throw Error("encodings: line " + std::to_string(line_no) +
                  ": expected 'field' or 'prompt_id'");
    }
  }
  for (std::size_t k = 0; k < schema.field_count(); ++k) {
    if (!seen[k]) {
      throw Error("encodings: missing field '" + schema.field(k).name + "'");
    }
  }
  enc.field_encodings = std::move(fields_by_index);
  return enc;
}

double contrastive_loss(const EncodingSet& enc,
                        std::span<const std::size_t> assignments) {
  const std::size_t n = enc.prompt_encodings.size();
  const std::size_t K = enc.field_encodings.size();
  if (n == 0 || K == 0) throw Error("contrastive: empty encoding set");
  if (assignments.size() != n) {
    throw Error("contrastive: one assignment per prompt required");
  }

  std::vector<double> field_norms(K);
  for (std::size_t l = 0; l < K; ++l) {
    const auto& f = enc.field_encodings[l];
    field_norms[l] = std::sqrt(kernels::dot(f.data(), f.data(), f.size()));
    if (field_norms[l] == 0.0) throw Error("contrastive: zero field encoding");
  }

  double loss = 0.0;
  std::vector<double> sims(K);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = enc.prompt_encodings[j];
    const double pn = std::sqrt(kernels::dot(p.data(), p.data(), p.size()));
    if (pn == 0.0) throw Error("contrastive: zero prompt encoding");
    for (std::size_t l = 0; l < K; ++l) {
      const auto& f = enc.field_encodings[l];
      sims[l] = kernels::dot(p.data(), f.data(), enc.dim) /
                (pn * field_norms[l]) / enc.temperature;
    }
    const std::size_t target = assignments[j];
    if (target >= K) throw Error("contrastive: assignment out of range");
    const double m = *std::max_element(sims.begin(), sims.end());
    double lse = 0.0;
    for (double s : sims) lse += std::exp(s - m);
    loss += -(sims[target] - m - std::log(lse));
  }
  return loss / static_cast<double>(n);
}

}  // namespace fieldctr
