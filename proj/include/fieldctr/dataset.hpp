#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldctr/schema.hpp"

namespace fieldctr {

// One per-field feature slot; the field is implied by position. Categorical
// features carry value 1.0, numeric features carry the raw value and point
// at the field's single embedding bucket.
struct FeatureRef {
  std::uint32_t feature_index = 0;
  double value = 1.0;
};

struct Instance {
  std::vector<FeatureRef> features;  // exactly K entries
  std::uint8_t label = 0;
  std::int64_t timestamp = 0;
};

enum class SplitTag { none, train, val, test };

struct Dataset {
  std::shared_ptr<const FieldSchema> schema;
  std::vector<Instance> instances;
  std::vector<std::vector<std::string>> raw_values;  // [instance][field]
  SplitTag split = SplitTag::none;
  bool indexed = false;

  std::size_t size() const { return instances.size(); }
};

// Delimited table with a header row; delimiter auto-detected (tab or comma).
// Columns `rating` and `timestamp` are mandatory on top of the schema
// fields. Labels are binarized at `rating_threshold`; rows whose rating
// equals `drop_neutral` (when set) are removed. Multi-valued cells are
// reduced to their first '|'-separated entry.
Dataset ingest_table(const std::filesystem::path& path,
                     std::shared_ptr<const FieldSchema> schema,
                     double rating_threshold,
                     std::optional<double> drop_neutral = std::nullopt);

// Sorts ascending by timestamp (stable for ties) and cuts at
// floor(train_ratio*N) and floor((train_ratio+val_ratio)*N).
std::array<Dataset, 3> temporal_split(const Dataset& dataset,
                                      double train_ratio = 0.8,
                                      double val_ratio = 0.1);

// Batch index order for one epoch: every index exactly once, final partial
// batch included; the shuffled order is a pure function of the seed.
std::vector<std::vector<std::size_t>> batch_order(std::size_t n,
                                                  std::size_t batch_size,
                                                  bool shuffle,
                                                  std::uint64_t seed);

// Iteratively drops instances until every value of the two given fields
// occurs at least `min_count` times.
Dataset kcore_filter(const Dataset& dataset, std::size_t user_field,
                     std::size_t item_field, std::size_t min_count);

// Materialized split files: TSV with header `<fields...> label timestamp`.
void write_split_file(const Dataset& dataset,
                      const std::filesystem::path& path);
Dataset read_split_file(const std::filesystem::path& path,
                        std::shared_ptr<const FieldSchema> schema,
                        SplitTag tag);

std::string_view split_tag_name(SplitTag tag);

}  // namespace fieldctr
