#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"
#include "tlb/data.hpp"
#include "tlb/error.hpp"

namespace tlb {
namespace {

using Json = nlohmann::ordered_json;

// Blanks out `#`-to-end-of-line comments outside string literals. Positions
// are preserved so parse errors still point at the right line and column.
std::string strip_hash_comments(std::string_view text) {
  std::string out(text);
  bool in_string = false;
  bool escaped = false;
  bool in_comment = false;
  for (char& c : out) {
    if (in_comment) {
      if (c == '\n') {
        in_comment = false;
      } else {
        c = ' ';
      }
      continue;
    }
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      in_comment = true;
      c = ' ';
    }
  }
  return out;
}

Json parse_json(std::string_view raw) {
  const std::string text = strip_hash_comments(raw);
  try {
    return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points at the offending character.
    std::size_t line = 1, col = 0;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 0;
      } else {
        ++col;
      }
    }
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         e.what(),
                     line, col);
  }
}

[[noreturn]] void schema_error(const std::string& what) { throw ParseError("dataset schema: " + what); }

template <typename T>
T get_field(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + " is missing \"" + key + "\"");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(where + " has an ill-typed \"" + key + "\"");
  }
}

std::vector<double> get_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + " must be an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) schema_error(where + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

void throw_if_invalid(const TimelineSample& s) {
  const auto violations = validate_sample(s);
  if (violations.empty()) return;
  std::string msg = "topic " + s.topic_id + ":";
  for (const auto& v : violations) msg += " " + v.message + ";";
  msg.pop_back();
  throw ValidationError(msg);
}

Dataset parse_bare(const Json& root) {
  Dataset d;
  d.split_name = "bare";
  d.metrics_only = true;
  for (const auto& [topic, nodes] : root.items()) {
    if (!nodes.is_array()) schema_error("topic " + topic + " must map to a list of node lists");
    TimelineSample s;
    s.topic_id = topic;
    s.num_nodes = static_cast<int>(nodes.size());
    std::set<std::string> seen;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& node = nodes[k];
      if (!node.is_array()) schema_error("topic " + topic + " node " + std::to_string(k + 1) + " is not a list");
      if (node.empty()) {
        throw ValidationError("topic " + topic + ": node " + std::to_string(k + 1) + " empty");
      }
      for (const auto& vid : node) {
        if (!vid.is_string()) schema_error("topic " + topic + " has a non-string video id");
        const auto id = vid.get<std::string>();
        if (!seen.insert(id).second) {
          throw ValidationError("topic " + topic + ": video assigned to two nodes (" + id + ")");
        }
        s.videos.push_back(Video{id, 0, {}, std::nullopt});
        s.labels.push_back(static_cast<NodeId>(k + 1));
      }
    }
    throw_if_invalid(s);
    d.samples.push_back(std::move(s));
  }
  return d;
}

Dataset parse_extended(const Json& root) {
  Dataset d;
  d.split_name = root.contains("split") ? get_field<std::string>(root, "split", "document") : "";
  d.embedding_dim = root.contains("embedding_dim") ? get_field<std::size_t>(root, "embedding_dim", "document") : 0;
  d.metrics_only = d.embedding_dim == 0;
  const auto& samples = root.at("samples");
  if (!samples.is_array()) schema_error("\"samples\" must be an array");
  std::optional<std::size_t> text_dim;
  for (std::size_t si = 0; si < samples.size(); ++si) {
    const auto& js = samples[si];
    const std::string where = "sample " + std::to_string(si);
    if (!js.is_object()) schema_error(where + " is not an object");
    TimelineSample s;
    s.topic_id = get_field<std::string>(js, "topic_id", where);
    s.num_nodes = get_field<int>(js, "num_nodes", where);
    s.labels = get_field<LabelVector>(js, "labels", where);
    const auto videos = js.find("videos");
    if (videos == js.end() || !videos->is_array()) schema_error(where + " needs a \"videos\" array");
    for (const auto& jv : *videos) {
      Video v;
      v.id = get_field<std::string>(jv, "id", where + " video");
      v.release_time = jv.contains("release_time") ? get_field<std::int64_t>(jv, "release_time", where) : 0;
      if (jv.contains("embedding")) v.embedding = get_vector(jv.at("embedding"), where + " embedding");
      if (v.embedding.size() != d.embedding_dim) {
        throw DimensionError("topic " + s.topic_id + ": video " + v.id + " has embedding dimension " +
                             std::to_string(v.embedding.size()) + ", dataset declares " +
                             std::to_string(d.embedding_dim));
      }
      if (jv.contains("title") && !jv.at("title").is_null()) v.title = get_field<std::string>(jv, "title", where);
      s.videos.push_back(std::move(v));
    }
    if (auto it = js.find("node_text_embeddings"); it != js.end() && !it->is_null()) {
      if (!it->is_array()) schema_error(where + " node_text_embeddings must be a list");
      std::vector<std::vector<double>> texts;
      for (const auto& row : *it) {
        texts.push_back(get_vector(row, where + " node_text_embeddings"));
        if (!text_dim) text_dim = texts.back().size();
        if (texts.back().size() != *text_dim) {
          throw DimensionError("topic " + s.topic_id + ": node text embedding dimension " +
                               std::to_string(texts.back().size()) + " differs from " + std::to_string(*text_dim));
        }
      }
      s.node_text_embeddings = std::move(texts);
    }
    throw_if_invalid(s);
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace

Dataset parse_dataset(std::string_view text) {
  const Json root = parse_json(text);
  if (!root.is_object()) schema_error("top level must be an object");
  if (root.contains("samples")) return parse_extended(root);
  return parse_bare(root);
}

std::string write_dataset(const Dataset& d) {
  Json root = Json::object();
  root["split"] = d.split_name;
  root["embedding_dim"] = d.embedding_dim;
  Json samples = Json::array();
  for (const auto& s : d.samples) {
    Json js = Json::object();
    js["topic_id"] = s.topic_id;
    Json videos = Json::array();
    for (const auto& v : s.videos) {
      Json jv = Json::object();
      jv["id"] = v.id;
      jv["release_time"] = v.release_time;
      jv["embedding"] = v.embedding;
      if (v.title) jv["title"] = *v.title;
      videos.push_back(std::move(jv));
    }
    js["videos"] = std::move(videos);
    js["labels"] = s.labels;
    js["num_nodes"] = s.num_nodes;
    if (s.node_text_embeddings) js["node_text_embeddings"] = *s.node_text_embeddings;
    samples.push_back(std::move(js));
  }
  root["samples"] = std::move(samples);
  return root.dump(1) + "\n";
}

Predictions parse_predictions(std::string_view text) {
  const Json root = parse_json(text);
  if (!root.is_object()) throw ParseError("prediction file must be an object of topic_id -> [node ids]");
  Predictions p;
  for (const auto& [topic, ids] : root.items()) {
    try {
      p[topic] = ids.get<LabelVector>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError("prediction for topic " + topic + " must be a list of integers");
    }
  }
  return p;
}

std::string write_predictions(const Predictions& p) {
  Json root = Json::object();
  for (const auto& [topic, ids] : p) root[topic] = ids;
  return root.dump() + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace tlb
