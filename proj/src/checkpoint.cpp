#include "fieldctr/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "fieldctr/error.hpp"

namespace fieldctr {

namespace {

constexpr std::uint64_t kMagic = 0x46435452434b5031ull;  // "FCTRCKP1"
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ofstream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string read_string(std::ifstream& in) {
  const std::uint64_t n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

void save_checkpoint(const ModelBundle& bundle, std::uint64_t schema_hash,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot write " + path.string());

  write_u64(out, kMagic);
  write_u32(out, kVersion);
  write_u64(out, schema_hash);
  write_u64(out, bundle.seed);
  write_string(out, std::string(backbone_kind_name(bundle.kind)));
  write_u64(out, bundle.K);
  write_u64(out, bundle.D);
  write_u64(out, bundle.semantic_dim);
  write_u32(out, bundle.has_fre_adaptor ? 1 : 0);
  write_u32(out, bundle.has_fie_rescale ? 1 : 0);
  write_u64(out, bundle.vocab_sizes.size());
  for (std::size_t v : bundle.vocab_sizes) write_u64(out, v);
  write_u64(out, bundle.dnn_hidden.size());
  for (std::size_t v : bundle.dnn_hidden) write_u64(out, v);

  write_u64(out, bundle.params.count());
  for (std::size_t t = 0; t < bundle.params.count(); ++t) {
    const Tensor& tensor = bundle.params.at(t);
    write_string(out, tensor.name);
    write_u64(out, tensor.shape.size());
    for (std::size_t d : tensor.shape) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
  }
  if (!out) throw Error("checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path.string());

  if (read_u64(in) != kMagic) {
    throw Error("checkpoint: bad magic in " + path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }

  LoadedCheckpoint loaded;
  loaded.schema_hash = read_u64(in);
  ModelBundle& b = loaded.bundle;
  b.seed = read_u64(in);
  b.kind = backbone_kind_from_name(read_string(in));
  b.K = read_u64(in);
  b.D = read_u64(in);
  b.semantic_dim = read_u64(in);
  b.has_fre_adaptor = read_u32(in) != 0;
  b.has_fie_rescale = read_u32(in) != 0;
  b.vocab_sizes.resize(read_u64(in));
  for (std::size_t& v : b.vocab_sizes) v = read_u64(in);
  b.dnn_hidden.resize(read_u64(in));
  for (std::size_t& v : b.dnn_hidden) v = read_u64(in);

  const std::uint64_t tensors = read_u64(in);
  for (std::uint64_t t = 0; t < tensors; ++t) {
    const std::string name = read_string(in);
    std::vector<std::size_t> shape(read_u64(in));
    for (std::size_t& d : shape) d = read_u64(in);
    Tensor& tensor = b.params.add(name, shape);
    in.read(reinterpret_cast<char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
  }
  if (!in) throw Error("checkpoint: truncated file " + path.string());
  return loaded;
}

}  // namespace fieldctr
