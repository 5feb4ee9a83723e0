#include "fieldctr/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"
#include "fieldctr/num_format.hpp"

namespace fieldctr {

InteractionMatrix field_interaction_matrix(const FieldEmbeddingMatrix& h) {
  const std::size_t K = h.field_count();
  InteractionMatrix m;
  m.field_count = K;
  m.stage = InteractionMatrix::Stage::raw;
  m.values.assign(K * K, 0.0);

  std::vector<double> norms(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = h.row(k);
    norms[k] = std::sqrt(kernels::dot(row.data(), row.data(), row.size()));
    if (norms[k] == 0.0) {
      throw Error("interaction matrix: zero row at field " +
                  std::to_string(k));
    }
  }
  for (std::size_t i = 0; i < K; ++i) {
    m.values[i * K + i] = 1.0;
    for (std::size_t j = i + 1; j < K; ++j) {
      const auto hi = h.row(i);
      const auto hj = h.row(j);
      const double c = std::clamp(
          kernels::dot(hi.data(), hj.data(), hi.size()) / (norms[i] * norms[j]),
          -1.0, 1.0);
      m.values[i * K + j] = c;
      m.values[j * K + i] = c;
    }
  }
  return m;
}

InteractionMatrix rescale_interactions(const InteractionMatrix& raw,
                                       double scale, double shift) {
  if (raw.stage != InteractionMatrix::Stage::raw) {
    throw Error("rescale: expected a raw-stage interaction matrix");
  }
  InteractionMatrix out;
  out.field_count = raw.field_count;
  out.stage = InteractionMatrix::Stage::rescaled;
  out.values.resize(raw.values.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    out.values[i] = scale * raw.values[i] + shift;
  }
  return out;
}

void write_interaction_csv(const InteractionMatrix& m,
                           const FieldSchema& schema,
                           const std::filesystem::path& path) {
  if (m.field_count != schema.field_count()) {
    throw Error("interaction csv: schema/matrix size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("interaction csv: cannot write " + path.string());
  out << "field";
  for (std::size_t j = 0; j < m.field_count; ++j) {
    out << ',' << schema.field(j).name;
  }
  out << '\n';
  for (std::size_t i = 0; i < m.field_count; ++i) {
    out << schema.field(i).name;
    for (std::size_t j = 0; j < m.field_count; ++j) {
      out << ',' << format_compact(m.at(i, j));
    }
    out << '\n';
  }
}

}  // namespace fieldctr
