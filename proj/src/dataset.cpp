#include "fieldctr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "fieldctr/error.hpp"
#include "fieldctr/rng.hpp"

namespace fieldctr {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

bool parse_double(std::string_view s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

// Minimal RFC-4180 style split; quotes only honored for comma files.
std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> cells;
  if (delim == '\t') {
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        cells.push_back(trim(std::string_view(line).substr(start)));
        break;
      }
      cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
      start = pos + 1;
    }
    return cells;
  }
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == delim) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::string first_listed_value(const std::string& cell) {
  const std::size_t bar = cell.find('|');
  return bar == std::string::npos ? cell : cell.substr(0, bar);
}

}  // namespace

Dataset ingest_table(const std::filesystem::path& path,
                     std::shared_ptr<const FieldSchema> schema,
                     double rating_threshold,
                     std::optional<double> drop_neutral) {
  std::ifstream in(path);
  if (!in) throw Error("ingest: cannot open " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw Error("ingest: empty file");
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> columns = split_row(header, delim);

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t c = 0; c < columns.size(); ++c) col_index[columns[c]] = c;

  const std::size_t K = schema->field_count();
  std::vector<std::size_t> field_col(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto it = col_index.find(schema->field(k).name);
    if (it == col_index.end()) {
      throw Error("ingest: missing column '" + schema->field(k).name + "'");
    }
    field_col[k] = it->second;
  }
  const auto rating_it = col_index.find("rating");
  if (rating_it == col_index.end()) throw Error("ingest: missing column 'rating'");
  const auto ts_it = col_index.find("timestamp");
  if (ts_it == col_index.end()) throw Error("ingest: missing column 'timestamp'");

  Dataset ds;
  ds.schema = std::move(schema);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_row(line, delim);
    if (cells.size() != columns.size()) {
      throw Error("ingest: row " + std::to_string(row) + ": expected " +
                  std::to_string(columns.size()) + " columns, got " +
                  std::to_string(cells.size()));
    }
    double rating = 0.0;
    if (!parse_double(cells[rating_it->second], rating)) {
      throw Error("ingest: row " + std::to_string(row) +
                  ": non-numeric rating '" + cells[rating_it->second] + "'");
    }
    if (drop_neutral && rating == *drop_neutral) continue;

    Instance inst;
    if (!parse_i64(cells[ts_it->second], inst.timestamp)) {
      throw Error("ingest: row " + std::to_string(row) +
                  ": non-numeric timestamp '" + cells[ts_it->second] + "'");
    }
    inst.label = rating >= rating_threshold ? 1 : 0;
    inst.features.resize(K);

    std::vector<std::string> raw(K);
    for (std::size_t k = 0; k < K; ++k) {
      raw[k] = first_listed_value(cells[field_col[k]]);
      if (ds.schema->field(k).kind == FieldKind::numeric && !raw[k].empty()) {
        double value = 0.0;
        if (!parse_double(raw[k], value)) {
          throw Error("ingest: row " + std::to_string(row) +
                      ": non-numeric value '" + raw[k] + "' in field '" +
                      ds.schema->field(k).name + "'");
        }
        inst.features[k].value = value;
      }
    }
    ds.instances.push_back(std::move(inst));
    ds.raw_values.push_back(std::move(raw));
  }
  return ds;
}

std::array<Dataset, 3> temporal_split(const Dataset& dataset,
                                      double train_ratio, double val_ratio) {
  const std::size_t n = dataset.size();
  if (n < 3) {
    throw Error("split: need at least 3 instances, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dataset.instances[a].timestamp <
                            dataset.instances[b].timestamp;
                   });

  const auto cut1 =
      static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));
  const auto cut2 = static_cast<std::size_t>(
      std::floor((train_ratio + val_ratio) * static_cast<double>(n)));

  std::array<Dataset, 3> out;
  const SplitTag tags[3] = {SplitTag::train, SplitTag::val, SplitTag::test};
  const std::size_t bounds[4] = {0, cut1, cut2, n};
  for (int s = 0; s < 3; ++s) {
    out[s].schema = dataset.schema;
    out[s].split = tags[s];
    out[s].indexed = dataset.indexed;
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
      out[s].instances.push_back(dataset.instances[order[i]]);
      out[s].raw_values.push_back(dataset.raw_values[order[i]]);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> batch_order(std::size_t n,
                                                  std::size_t batch_size,
                                                  bool shuffle,
                                                  std::uint64_t seed) {
  if (batch_size == 0) throw Error("batch_order: batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng = Rng::derive(seed, "batch_order");
    rng.shuffle(order);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Dataset kcore_filter(const Dataset& dataset, std::size_t user_field,
                     std::size_t item_field, std::size_t min_count) {
  std::vector<std::size_t> keep(dataset.size());
  std::iota(keep.begin(), keep.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string, std::size_t> users, items;
    for (std::size_t i : keep) {
      ++users[dataset.raw_values[i][user_field]];
      ++items[dataset.raw_values[i][item_field]];
    }
    std::vector<std::size_t> next;
    next.reserve(keep.size());
    for (std::size_t i : keep) {
      if (users[dataset.raw_values[i][user_field]] >= min_count &&
          items[dataset.raw_values[i][item_field]] >= min_count) {
        next.push_back(i);
      } else {
        changed = true;
      }
    }
    keep = std::move(next);
  }
  Dataset out;
  out.schema = dataset.schema;
  out.split = dataset.split;
  out.indexed = dataset.indexed;
  for (std::size_t i : keep) {
    out.instances.push_back(dataset.instances[i]);
    out.raw_values.push_back(dataset.raw_values[i]);
  }
  return out;
}

void write_split_file(const Dataset& dataset,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("split file: cannot write " + path.string());
  const std::size_t K = dataset.schema->field_count();
  for (std::size_t k = 0; k < K; ++k) {
    out << dataset.schema->field(k).name << '\t';
  }
  out << "label\ttimestamp\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::string& v = dataset.raw_values[i][k];
      if (v.find('\t') != std::string::npos ||
          v.find('\n') != std::string::npos) {
        throw Error("split file: value with tab/newline in field '" +
                    dataset.schema->field(k).name + "'");
      }
      out << v << '\t';
    }
    out << static_cast<int>(dataset.instances[i].label) << '\t'
        << dataset.instances[i].timestamp << '\n';
  }
}

Dataset read_split_file(const std::filesystem::path& path,
                        std::shared_ptr<const FieldSchema> schema,
                        SplitTag tag) {
  std::ifstream in(path);
  if (!in) throw Error("split file: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw Error("split file: empty " + path.string());

  const std::vector<std::string> columns = split_row(header, '\t');
  const std::size_t K = schema->field_count();
  if (columns.size() != K + 2) {
    throw Error("split file: header mismatch in " + path.string());
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (columns[k] != schema->field(k).name) {
      throw Error("split file: field order mismatch at column " +
                  std::to_string(k) + " in " + path.string());
    }
  }

  Dataset ds;
  ds.schema = std::move(schema);
  ds.split = tag;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_row(line, '\t');
    if (cells.size() != K + 2) {
      throw Error("split file: row " + std::to_string(row) +
                  ": column count mismatch");
    }
    Instance inst;
    inst.features.resize(K);
    std::int64_t label = 0;
    if (!parse_i64(cells[K], label) || (label != 0 && label != 1)) {
      throw Error("split file: row " + std::to_string(row) + ": bad label");
    }
    inst.label = static_cast<std::uint8_t>(label);
    if (!parse_i64(cells[K + 1], inst.timestamp)) {
      throw Error("split file: row " + std::to_string(row) + ": bad timestamp");
    }
    std::vector<std::string> raw(K);
    for (std::size_t k = 0; k < K; ++k) {
      raw[k] = cells[k];
      if (ds.schema->field(k).kind == FieldKind::numeric && !raw[k].empty()) {
        double value = 0.0;
        if (!parse_double(raw[k], value)) {
          throw Error("split file: row " + std::to_string(row) +
                      ": non-numeric value in field '" +
                      ds.schema->field(k).name + "'");
        }
        inst.features[k].value = value;
      }
    }
    ds.instances.push_back(std::move(inst));
    ds.raw_values.push_back(std::move(raw));
  }
  return ds;
}

std::string_view split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
    default: return "none";
  }
}

}  // namespace fieldctr
