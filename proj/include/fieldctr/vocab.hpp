#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fieldctr/dataset.hpp"
#include "fieldctr/schema.hpp"

namespace fieldctr {

// Per-field feature index maps. Index 0 of every field is reserved for
// out-of-vocabulary values; numeric fields get a single bucket at index 1.
class FeatureVocab {
 public:
  static constexpr std::string_view kOovToken = "<oov>";
  static constexpr std::string_view kNumericToken = "<numeric>";

  // First-occurrence order over the dataset's instances.
  static FeatureVocab build(const Dataset& dataset, const FieldSchema& schema);

  std::uint32_t lookup(std::size_t field, std::string_view raw) const;
  const std::string& raw_value(std::size_t field, std::uint32_t index) const;
  std::size_t size(std::size_t field) const { return to_raw_[field].size(); }
  std::size_t field_count() const { return to_raw_.size(); }
  std::vector<std::size_t> sizes() const;

  // Audit export: one `vocab_<field>.tsv` per field with `index<TAB>raw`.
  void export_files(const std::filesystem::path& dir,
                    const FieldSchema& schema) const;
  static FeatureVocab load_files(const std::filesystem::path& dir,
                                 const FieldSchema& schema);

 private:
  std::vector<std::unordered_map<std::string, std::uint32_t>> to_index_;
  std::vector<std::vector<std::string>> to_raw_;
};

// Fills every instance's feature indices from the vocab; unseen values map
// to index 0.
void index_dataset(Dataset& dataset, const FeatureVocab& vocab);

std::string vocab_file_name(const std::string& field_name);

}  // namespace fieldctr
