#include "fieldctr/schema.hpp"

#include <fstream>
#include <unordered_set>

#include "fieldctr/error.hpp"

namespace fieldctr {

FieldSchema::FieldSchema(std::vector<FieldSpec> fields)
    : fields_(std::move(fields)) {
  if (fields_.size() < 2) {
    throw Error("schema: needs at least 2 fields, got " +
                std::to_string(fields_.size()));
  }
  std::unordered_set<std::string_view> seen;
  for (const FieldSpec& f : fields_) {
    if (f.name.empty()) throw Error("schema: empty field name");
    if (!seen.insert(f.name).second) {
      throw Error("schema: duplicate field name '" + f.name + "'");
    }
  }
}

std::optional<std::size_t> FieldSchema::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < fields_.size(); ++k) {
    if (fields_[k].name == name) return k;
  }
  return std::nullopt;
}

std::uint64_t FieldSchema::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::string_view s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  for (const FieldSpec& f : fields_) {
    mix(f.name);
    mix(field_kind_name(f.kind));
    mix(f.description);
  }
  return h;
}

std::string_view field_kind_name(FieldKind kind) {
  return kind == FieldKind::categorical ? "categorical" : "numeric";
}

namespace {

FieldKind parse_kind(std::string_view text, std::size_t line_no) {
  if (text == "categorical") return FieldKind::categorical;
  if (text == "numeric") return FieldKind::numeric;
  throw Error("schema: line " + std::to_string(line_no) +
              ": unknown field kind '" + std::string(text) + "'");
}

}  // namespace

FieldSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("schema: cannot open " + path.string());

  std::vector<FieldSpec> fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab1 = line.find('\t');
    if (tab1 == std::string::npos) {
      throw Error("schema: line " + std::to_string(line_no) +
                  ": expected `name<TAB>kind<TAB>description`");
    }
    const std::size_t tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error("schema: line " + std::to_string(line_no) +
                  ": missing description column");
    }
    FieldSpec spec;
    spec.name = line.substr(0, tab1);
    spec.kind = parse_kind(
        std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1), line_no);
    spec.description = line.substr(tab2 + 1);
    fields.push_back(std::move(spec));
  }
  return FieldSchema(std::move(fields));
}

}  // namespace fieldctr
