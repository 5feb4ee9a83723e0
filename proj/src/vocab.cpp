#include "fieldctr/vocab.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "fieldctr/error.hpp"

namespace fieldctr {

FeatureVocab FeatureVocab::build(const Dataset& dataset,
                                 const FieldSchema& schema) {
  const std::size_t K = schema.field_count();
  FeatureVocab vocab;
  vocab.to_index_.resize(K);
  vocab.to_raw_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    vocab.to_raw_[k].emplace_back(kOovToken);
    if (schema.field(k).kind == FieldKind::numeric) {
      vocab.to_index_[k].emplace(kNumericToken, 1);
      vocab.to_raw_[k].emplace_back(kNumericToken);
    }
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      if (schema.field(k).kind == FieldKind::numeric) continue;
      const std::string& raw = dataset.raw_values[i][k];
      if (raw.empty()) continue;
      const auto next = static_cast<std::uint32_t>(vocab.to_raw_[k].size());
      if (vocab.to_index_[k].emplace(raw, next).second) {
        vocab.to_raw_[k].push_back(raw);
      }
    }
  }
  return vocab;
}

std::uint32_t FeatureVocab::lookup(std::size_t field,
                                   std::string_view raw) const {
  const auto& map = to_index_[field];
  const auto it = map.find(std::string(raw));
  return it == map.end() ? 0 : it->second;
}

const std::string& FeatureVocab::raw_value(std::size_t field,
                                           std::uint32_t index) const {
  if (index >= to_raw_[field].size()) {
    throw Error("vocab: index " + std::to_string(index) +
                " out of range for field " + std::to_string(field));
  }
  return to_raw_[field][index];
}

std::vector<std::size_t> FeatureVocab::sizes() const {
  std::vector<std::size_t> out(to_raw_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = to_raw_[k].size();
  return out;
}

std::string vocab_file_name(const std::string& field_name) {
  std::string safe;
  for (char c : field_name) {
    safe.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return "vocab_" + safe + ".tsv";
}

void FeatureVocab::export_files(const std::filesystem::path& dir,
                                const FieldSchema& schema) const {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < field_count(); ++k) {
    const auto path = dir / vocab_file_name(schema.field(k).name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("vocab: cannot write " + path.string());
    for (std::size_t i = 0; i < to_raw_[k].size(); ++i) {
      out << i << '\t' << to_raw_[k][i] << '\n';
    }
  }
}

FeatureVocab FeatureVocab::load_files(const std::filesystem::path& dir,
                                      const FieldSchema& schema) {
  const std::size_t K = schema.field_count();
  FeatureVocab vocab;
  vocab.to_index_.resize(K);
  vocab.to_raw_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto path = dir / vocab_file_name(schema.field(k).name);
    std::ifstream in(path);
    if (!in) throw Error("vocab: cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error("vocab: malformed line in " + path.string());
      }
      std::uint32_t index = 0;
      const char* b = line.data();
      const auto res = std::from_chars(b, b + tab, index);
      if (res.ec != std::errc{} || index != line_no) {
        throw Error("vocab: non-contiguous index in " + path.string());
      }
      std::string raw = line.substr(tab + 1);
      if (index > 0) vocab.to_index_[k].emplace(raw, index);
      vocab.to_raw_[k].push_back(std::move(raw));
      ++line_no;
    }
    if (vocab.to_raw_[k].empty() || vocab.to_raw_[k][0] != kOovToken) {
      throw Error("vocab: missing OOV row in " + path.string());
    }
  }
  return vocab;
}

void index_dataset(Dataset& dataset, const FeatureVocab& vocab) {
  const FieldSchema& schema = *dataset.schema;
  const std::size_t K = schema.field_count();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::string& raw = dataset.raw_values[i][k];
      std::uint32_t index = 0;
      if (!raw.empty()) {
        index = schema.field(k).kind == FieldKind::numeric
                    ? vocab.lookup(k, FeatureVocab::kNumericToken)
                    : vocab.lookup(k, raw);
      }
      dataset.instances[i].features[k].feature_index = index;
    }
  }
  dataset.indexed = true;
}

}  // namespace fieldctr
