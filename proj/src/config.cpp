#include "fieldctr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include "fieldctr/backbones.hpp"
#include "fieldctr/enhancement.hpp"
#include "fieldctr/error.hpp"

namespace fieldctr {

const std::vector<double>& tuned_lambda_grid() {
  static const std::vector<double> grid{0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 1.0};
  return grid;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

double to_double(const std::string& v, const std::string& where) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error("config: " + where + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string& v, const std::string& where) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error("config: " + where + ": expected a non-negative integer, got '" +
                v + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t pos = v.find(',', start);
    if (pos == std::string::npos) {
      const std::string item = trim(std::string_view(v).substr(start));
      if (!item.empty()) out.push_back(item);
      break;
    }
    const std::string item = trim(std::string_view(v).substr(start, pos - start));
    if (!item.empty()) out.push_back(item);
    start = pos + 1;
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

// The published config grammar: section -> key -> setter.
const std::map<std::string, std::map<std::string, Setter>>& grammar() {
  static const std::map<std::string, std::map<std::string, Setter>> g = [] {
    std::map<std::string, std::map<std::string, Setter>> m;
    auto str = [](std::string RunConfig::* field) {
      return [field](RunConfig& c, const std::string& v, const std::string&) {
        c.*field = v;
      };
    };
    m["data"] = {
        {"schema", str(&RunConfig::schema_path)},
        {"raw", str(&RunConfig::raw_path)},
        {"dir", str(&RunConfig::data_dir)},
        {"rating_threshold",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.rating_threshold = to_double(v, w);
         }},
        {"drop_neutral",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.drop_neutral = to_double(v, w);
         }},
        {"kcore",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.kcore = to_size(v, w);
         }},
        {"kcore_user_field", str(&RunConfig::kcore_user_field)},
        {"kcore_item_field", str(&RunConfig::kcore_item_field)},
    };
    m["embeddings"] = {
        {"source", str(&RunConfig::source)},
        {"file", str(&RunConfig::file)},
        {"file_untuned", str(&RunConfig::file_untuned)},
        {"synthetic_mode", str(&RunConfig::synthetic_mode)},
        {"synthetic_mode_untuned", str(&RunConfig::synthetic_mode_untuned)},
        {"dsem",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.dsem = to_size(v, w);
         }},
        {"clusters",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.clusters.clear();
           for (const std::string& pair : split_list(v)) {
             const std::size_t colon = pair.find(':');
             if (colon == std::string::npos) {
               throw Error("config: " + w + ": expected `fieldA:fieldB` pairs");
             }
             c.clusters.emplace_back(trim(std::string_view(pair).substr(0, colon)),
                                     trim(std::string_view(pair).substr(colon + 1)));
           }
         }},
        {"out", str(&RunConfig::out)},
        {"out_untuned", str(&RunConfig::out_untuned)},
    };
    m["model"] = {
        {"backbone", str(&RunConfig::backbone)},
        {"embedding_dim",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.embedding_dim = to_size(v, w);
         }},
        {"dnn_hidden",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.dnn_hidden.clear();
           for (const std::string& item : split_list(v)) {
             c.dnn_hidden.push_back(to_size(item, w));
           }
         }},
    };
    m["train"] = {
        {"learning_rate",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.learning_rate = to_double(v, w);
         }},
        {"weight_decay",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.weight_decay = to_double(v, w);
         }},
        {"batch_size",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.batch_size = to_size(v, w);
         }},
        {"max_epochs",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.max_epochs = to_size(v, w);
         }},
        {"patience",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.patience = to_size(v, w);
         }},
        {"seed",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.train.seed = to_size(v, w);
         }},
    };
    m["enhance"] = {
        {"lambda_kl",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.lambda_kl = to_double(v, w);
         }},
        {"lambda_fm",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.lambda_fm = to_double(v, w);
         }},
        {"fre_variant", str(&RunConfig::fre_variant)},
        {"cl_temperature",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.cl_temperature = to_double(v, w);
         }},
        {"fie_mode", str(&RunConfig::fie_mode)},
    };
    m["sweep"] = {
        {"lambda_kl_grid",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.lambda_kl_grid.clear();
           for (const std::string& item : split_list(v)) {
             c.lambda_kl_grid.push_back(to_double(item, w));
           }
         }},
        {"lambda_fm_grid",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.lambda_fm_grid.clear();
           for (const std::string& item : split_list(v)) {
             c.lambda_fm_grid.push_back(to_double(item, w));
           }
         }},
    };
    m["corpus"] = {
        {"samples_per_field",
         [](RunConfig& c, const std::string& v, const std::string& w) {
           c.samples_per_field = to_size(v, w);
         }},
        {"template", str(&RunConfig::template_id)},
        {"out", str(&RunConfig::corpus_out)},
    };
    m["output"] = {
        {"dir", str(&RunConfig::out_dir)},
    };
    return m;
  }();
  return g;
}

void validate(const RunConfig& c) {
  backbone_kind_from_name(c.backbone);
  fre_variant_from_name(c.fre_variant);
  if (c.fie_mode != "auto") fie_mode_from_name(c.fie_mode);
  if (c.source != "file" && c.source != "synthetic") {
    throw Error("config: embeddings.source must be 'file' or 'synthetic'");
  }
  if (c.synthetic_mode != "raw" && c.synthetic_mode != "structured") {
    throw Error("config: embeddings.synthetic_mode must be 'raw' or 'structured'");
  }
  if (c.synthetic_mode_untuned != "raw" &&
      c.synthetic_mode_untuned != "structured") {
    throw Error(
        "config: embeddings.synthetic_mode_untuned must be 'raw' or "
        "'structured'");
  }
  if (!(c.train.learning_rate > 0.0)) {
    throw Error("config: train.learning_rate must be positive");
  }
  if (c.train.batch_size == 0) throw Error("config: train.batch_size must be >= 1");
  if (c.train.patience == 0) throw Error("config: train.patience must be >= 1");
  if (c.train.max_epochs == 0) throw Error("config: train.max_epochs must be >= 1");
  if (c.lambda_kl < 0.0 || c.lambda_fm < 0.0) {
    throw Error("config: enhancement lambdas must be non-negative");
  }
  if (c.cl_temperature <= 0.0) {
    throw Error("config: enhance.cl_temperature must be positive");
  }
  if (c.samples_per_field == 0) {
    throw Error("config: corpus.samples_per_field must be >= 1");
  }
  if (c.embedding_dim == 0) throw Error("config: model.embedding_dim must be >= 1");
  if (c.dsem < 2) throw Error("config: embeddings.dsem must be >= 2");
  for (const double v : c.lambda_kl_grid) {
    if (std::none_of(tuned_lambda_grid().begin(), tuned_lambda_grid().end(),
                     [v](double g) { return g == v; })) {
      throw Error("config: sweep.lambda_kl_grid value outside the tuned grid");
    }
  }
  for (const double v : c.lambda_fm_grid) {
    if (std::none_of(tuned_lambda_grid().begin(), tuned_lambda_grid().end(),
                     [v](double g) { return g == v; })) {
      throw Error("config: sweep.lambda_fm_grid value outside the tuned grid");
    }
  }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());

  RunConfig cfg;
  cfg.lambda_kl_grid = tuned_lambda_grid();
  cfg.lambda_fm_grid = tuned_lambda_grid();

  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw Error("config: line " + std::to_string(line_no) +
                    ": unterminated section header");
      }
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (grammar().find(section) == grammar().end()) {
        throw Error("config: line " + std::to_string(line_no) +
                    ": unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error("config: line " + std::to_string(line_no) +
                  ": expected `key = value`");
    }
    if (section.empty()) {
      throw Error("config: line " + std::to_string(line_no) +
                  ": key outside any section");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const auto& keys = grammar().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw Error("config: line " + std::to_string(line_no) + ": unknown key '" +
                  key + "' in section [" + section + "]");
    }
    it->second(cfg, value, section + "." + key);
  }

  // Environment overrides: FIELDCTR_<SECTION>_<KEY>.
  for (const auto& [section_name, keys] : grammar()) {
    for (const auto& [key, setter] : keys) {
      const std::string var =
          "FIELDCTR_" + upper(section_name) + "_" + upper(key);
      if (const char* env = std::getenv(var.c_str())) {
        setter(cfg, env, section_name + "." + key + " (env)");
      }
    }
  }

  validate(cfg);
  return cfg;
}

}  // namespace fieldctr
