#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fieldctr/schema.hpp"

namespace fieldctr {

enum class EmbeddingProvenance { loaded, synthetic_raw, synthetic_structured };

// K field semantic vectors, one per schema field in schema order.
// Rows are guaranteed non-zero (cosine would be undefined).
class FieldEmbeddingMatrix {
 public:
  FieldEmbeddingMatrix(std::size_t field_count, std::size_t dim,
                       std::vector<double> data, EmbeddingProvenance prov);

  std::size_t field_count() const { return field_count_; }
  std::size_t dim() const { return dim_; }
  EmbeddingProvenance provenance() const { return provenance_; }
  std::span<const double> row(std::size_t k) const {
    return {data_.data() + k * dim_, dim_};
  }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t field_count_;
  std::size_t dim_;
  std::vector<double> data_;
  EmbeddingProvenance provenance_;
};

// Field-embedding file: one JSON object per line,
// `{"field": <name>, "embedding": [<real>, ...]}`. Rows are matched to the
// schema by field name; unknown fields are ignored with a warning.
FieldEmbeddingMatrix load_field_embeddings(const std::filesystem::path& path,
                                           const FieldSchema& schema);

void save_field_embeddings(const FieldEmbeddingMatrix& embeddings,
                           const FieldSchema& schema,
                           const std::filesystem::path& path);

enum class SyntheticMode { raw, structured };

// Stand-in for an external encoder.
//  raw        — hashed character-trigram vector of each field description,
//               L2-normalized; a pure function of the text.
//  structured — unit vectors arranged so that field pairs named in
//               cluster_spec land at cosine >= 0.9 and all other pairs at
//               cosine <= 0.1; used to plant known interaction structure.
FieldEmbeddingMatrix synthetic_encode(
    const FieldSchema& schema, SyntheticMode mode, std::uint64_t seed,
    std::size_t dim,
    const std::vector<std::pair<std::string, std::string>>& cluster_spec = {});

// h'_k = W^T h_k + bias for every field; W is dsem x D row-major, bias has
// length D. Returns a K x D row-major matrix.
std::vector<double> adapt_field_embeddings(const FieldEmbeddingMatrix& h,
                                           std::span<const double> w,
                                           std::span<const double> bias,
                                           std::size_t model_dim);

}  // namespace fieldctr
