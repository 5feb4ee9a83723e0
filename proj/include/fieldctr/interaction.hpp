#pragma once

#include <filesystem>
#include <vector>

#include "fieldctr/field_embeddings.hpp"
#include "fieldctr/schema.hpp"

namespace fieldctr {

// K x K field-pair importance scores. Raw stage holds cosine similarities
// (entries in [-1, 1], unit diagonal); the rescaled stage is an elementwise
// affine image of the raw one.
struct InteractionMatrix {
  enum class Stage { raw, rescaled };

  std::size_t field_count = 0;
  std::vector<double> values;  // row-major K x K
  Stage stage = Stage::raw;

  double at(std::size_t i, std::size_t j) const {
    return values[i * field_count + j];
  }
};

// m[i][j] = cos(h_i, h_j); exactly symmetric, diagonal exactly 1.
InteractionMatrix field_interaction_matrix(const FieldEmbeddingMatrix& h);

// m'[i][j] = scale * m[i][j] + shift.
InteractionMatrix rescale_interactions(const InteractionMatrix& raw,
                                       double scale, double shift);

// Square CSV with field names as header row and first column.
void write_interaction_csv(const InteractionMatrix& m,
                           const FieldSchema& schema,
                           const std::filesystem::path& path);

}  // namespace fieldctr
