#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fieldctr {

enum class FieldKind { categorical, numeric };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::categorical;
  std::string description;
};

// Ordered field layout of a dataset. Validated on construction:
// unique non-empty names, at least two fields.
class FieldSchema {
 public:
  explicit FieldSchema(std::vector<FieldSpec> fields);

  std::size_t field_count() const { return fields_.size(); }
  const FieldSpec& field(std::size_t k) const { return fields_[k]; }
  const std::vector<FieldSpec>& fields() const { return fields_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Content hash over names, kinds and descriptions in order; stored in
  // checkpoints to catch schema/model mismatches.
  std::uint64_t hash() const;

 private:
  std::vector<FieldSpec> fields_;
};

// Schema file: one field per line, `name <TAB> kind <TAB> description`.
FieldSchema load_schema(const std::filesystem::path& path);

std::string_view field_kind_name(FieldKind kind);

}  // namespace fieldctr
