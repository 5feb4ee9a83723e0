#include "fieldctr/field_embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "fieldctr/error.hpp"
#include "fieldctr/kernels.hpp"
#include "fieldctr/rng.hpp"

namespace fieldctr {

namespace {

bool is_zero_row(std::span<const double> row) {
  return std::all_of(row.begin(), row.end(),
                     [](double x) { return x == 0.0; });
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

FieldEmbeddingMatrix::FieldEmbeddingMatrix(std::size_t field_count,
                                           std::size_t dim,
                                           std::vector<double> data,
                                           EmbeddingProvenance prov)
    : field_count_(field_count),
      dim_(dim),
      data_(std::move(data)),
      provenance_(prov) {
  if (data_.size() != field_count_ * dim_) {
    throw Error("field embeddings: data size does not match K x D_sem");
  }
  for (std::size_t k = 0; k < field_count_; ++k) {
    if (is_zero_row(row(k))) {
      throw Error("field embeddings: all-zero row at field index " +
                  std::to_string(k));
    }
  }
}

FieldEmbeddingMatrix load_field_embeddings(const std::filesystem::path& path,
                                           const FieldSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("field embeddings: cannot open " + path.string());

  std::unordered_map<std::string, std::vector<double>> by_name;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("field embeddings: line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    if (!j.contains("field") || !j.contains("embedding")) {
      throw Error("field embeddings: line " + std::to_string(line_no) +
                  ": expected keys 'field' and 'embedding'");
    }
    const auto name = j["field"].get<std::string>();
    auto vec = j["embedding"].get<std::vector<double>>();
    if (!schema.index_of(name)) {
      std::cerr << "warning: field embeddings: ignoring unknown field '"
                << name << "'\n";
      continue;
    }
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw Error("field embeddings: inconsistent vector length for field '" +
                  name + "' (" + std::to_string(vec.size()) + " vs " +
                  std::to_string(dim) + ")");
    }
    by_name[name] = std::move(vec);
  }

  const std::size_t K = schema.field_count();
  std::vector<double> data(K * dim);
  for (std::size_t k = 0; k < K; ++k) {
    const auto it = by_name.find(schema.field(k).name);
    if (it == by_name.end()) {
      throw Error("field embeddings: missing field '" + schema.field(k).name +
                  "'");
    }
    std::copy(it->second.begin(), it->second.end(), data.begin() + k * dim);
  }
  return FieldEmbeddingMatrix(K, dim, std::move(data),
                              EmbeddingProvenance::loaded);
}

void save_field_embeddings(const FieldEmbeddingMatrix& embeddings,
                           const FieldSchema& schema,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("field embeddings: cannot write " + path.string());
  for (std::size_t k = 0; k < embeddings.field_count(); ++k) {
    nlohmann::ordered_json j;
    j["field"] = schema.field(k).name;
    const auto row = embeddings.row(k);
    j["embedding"] = std::vector<double>(row.begin(), row.end());
    out << j.dump() << '\n';
  }
}

namespace {

std::vector<double> encode_raw_row(const std::string& text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  auto add_gram = [&](std::string_view gram) {
    const std::uint64_t h = fnv1a(gram);
    const std::size_t idx = h % dim;
    v[idx] += ((h >> 32) & 1) ? 1.0 : -1.0;
  };
  if (text.size() >= 3) {
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
      add_gram(std::string_view(text).substr(i, 3));
    }
  } else {
    add_gram(text);
  }
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq == 0.0) {
    v[fnv1a(text) % dim] = 1.0;
    norm_sq = 1.0;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace

FieldEmbeddingMatrix synthetic_encode(
    const FieldSchema& schema, SyntheticMode mode, std::uint64_t seed,
    std::size_t dim,
    const std::vector<std::pair<std::string, std::string>>& cluster_spec) {
  if (dim < 2) throw Error("synthetic encode: D_sem must be >= 2");
  const std::size_t K = schema.field_count();

  if (mode == SyntheticMode::raw) {
    std::vector<double> data(K * dim);
    for (std::size_t k = 0; k < K; ++k) {
      const auto row = encode_raw_row(schema.field(k).description, dim);
      std::copy(row.begin(), row.end(), data.begin() + k * dim);
    }
    return FieldEmbeddingMatrix(K, dim, std::move(data),
                                EmbeddingProvenance::synthetic_raw);
  }

  // Structured mode: one shared axis per cluster plus one private jitter
  // axis per field keeps planted pairs at cos = 0.99 and everything else
  // exactly orthogonal.
  std::vector<std::size_t> cluster(K);
  std::iota(cluster.begin(), cluster.end(), 0);
  auto find_root = [&](std::size_t x) {
    while (cluster[x] != x) x = cluster[x] = cluster[cluster[x]];
    return x;
  };
  for (const auto& [a, b] : cluster_spec) {
    const auto ia = schema.index_of(a);
    const auto ib = schema.index_of(b);
    if (!ia || !ib) {
      throw Error("synthetic encode: cluster_spec names unknown field '" +
                  (ia ? b : a) + "'");
    }
    cluster[find_root(*ia)] = find_root(*ib);
  }
  std::vector<std::size_t> cluster_axis(K);
  std::size_t n_clusters = 0;
  {
    std::unordered_map<std::size_t, std::size_t> axis_of_root;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t root = find_root(k);
      const auto [it, inserted] = axis_of_root.emplace(root, n_clusters);
      if (inserted) ++n_clusters;
      cluster_axis[k] = it->second;
    }
  }
  if (dim < n_clusters + K) {
    throw Error("synthetic encode: structured mode needs D_sem >= " +
                std::to_string(n_clusters + K) + " for this schema");
  }

  std::vector<std::size_t> axes(dim);
  std::iota(axes.begin(), axes.end(), 0);
  Rng rng = Rng::derive(seed, "synthetic_structured");
  rng.shuffle(axes);

  const double jitter = 0.1;
  const double main = std::sqrt(1.0 - jitter * jitter);
  std::vector<double> data(K * dim, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    data[k * dim + axes[cluster_axis[k]]] = main;
    data[k * dim + axes[n_clusters + k]] = jitter;
  }
  return FieldEmbeddingMatrix(K, dim, std::move(data),
                              EmbeddingProvenance::synthetic_structured);
}

std::vector<double> adapt_field_embeddings(const FieldEmbeddingMatrix& h,
                                           std::span<const double> w,
                                           std::span<const double> bias,
                                           std::size_t model_dim) {
  const std::size_t K = h.field_count();
  const std::size_t dsem = h.dim();
  if (w.size() != dsem * model_dim || bias.size() != model_dim) {
    throw Error("adaptor: shape mismatch");
  }
  std::vector<double> out(K * model_dim);
  for (std::size_t k = 0; k < K; ++k) {
    double* row = out.data() + k * model_dim;
    std::copy(bias.begin(), bias.end(), row);
    const auto hk = h.row(k);
    for (std::size_t s = 0; s < dsem; ++s) {
      kernels::axpy(hk[s], w.data() + s * model_dim, row, model_dim);
    }
  }
  return out;
}

}  // namespace fieldctr
