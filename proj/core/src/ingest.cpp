// Copyright 2026 The DLD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dld/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dld/hash.hpp"

namespace dld {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::string default_id(const std::string& group_id, std::size_t index) {
  return group_id + ":" + std::to_string(index);
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  if (!obj.contains(name) || !obj[name].is_string()) {
    throw ParseError(where + ": missing string field '" + name + "'");
  }
  return obj[name].get<std::string>();
}

SemanticGroup parse_group(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": group must be an object");
  SemanticGroup group;
  group.group_id = string_field(obj, "group_id", where);
  const std::string at = where + " (group " + group.group_id + ")";
  if (obj.contains("entries")) {
    if (!obj["entries"].is_array()) throw ParseError(at + ": 'entries' must be an array");
    std::size_t p = 0;
    for (const auto& e : obj["entries"]) {
      const std::string entry_at = at + " entry " + std::to_string(p);
      if (!e.is_object()) throw ParseError(entry_at + ": entry must be an object");
      const std::string id = default_id(group.group_id, p);
      group.labels.push_back({string_field(e, "label", entry_at),
                              e.contains("label_id") ? string_field(e, "label_id", entry_at) : id});
      group.glossary.push_back({string_field(e, "description", entry_at),
                                e.contains("entry_id") ? string_field(e, "entry_id", entry_at) : id});
      ++p;
    }
  } else if (obj.contains("labels") && obj.contains("descriptions")) {
    // Column-wise form; lengths are checked by validation, not here.
    if (!obj["labels"].is_array() || !obj["descriptions"].is_array()) {
      throw ParseError(at + ": 'labels' and 'descriptions' must be arrays");
    }
    std::size_t p = 0;
    for (const auto& l : obj["labels"]) {
      if (!l.is_string()) throw ParseError(at + ": label " + std::to_string(p) + " is not a string");
      group.labels.push_back({l.get<std::string>(), default_id(group.group_id, p++)});
    }
    p = 0;
    for (const auto& d : obj["descriptions"]) {
      if (!d.is_string()) throw ParseError(at + ": description " + std::to_string(p) + " is not a string");
      group.glossary.push_back({d.get<std::string>(), default_id(group.group_id, p++)});
    }
  } else {
    throw ParseError(at + ": needs 'entries' (or 'labels' + 'descriptions')");
  }
  return group;
}

json parse_json_text(std::string_view text, std::string_view source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source_name) + ": " + location_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                     e.what());
  }
}

void reject_invalid(const Dataset& dataset) {
  std::vector<std::string> violations = validate_dataset(dataset);
  for (const auto& g : dataset.groups) {
    if (g.labels.empty() && g.glossary.empty()) violations.push_back("group " + g.group_id + ": no entries");
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

}  // namespace

Dataset parse_dataset_json(std::string_view text, std::string_view source_name) {
  const json doc = parse_json_text(text, source_name);
  Dataset dataset;
  const std::string where(source_name);
  if (doc.is_object() && doc.contains("groups")) {
    if (!doc["groups"].is_array()) throw ParseError(where + ": 'groups' must be an array");
    std::size_t i = 0;
    for (const auto& g : doc["groups"]) dataset.groups.push_back(parse_group(g, where + " group #" + std::to_string(i++)));
  } else if (doc.is_object() && doc.contains("group_id")) {
    dataset.groups.push_back(parse_group(doc, where));
  } else {
    throw ParseError(where + ": expected {\"groups\": [...]} or a single group object");
  }
  return dataset;
}

std::string dataset_to_json(const Dataset& dataset) {
  json groups = json::array();
  for (const auto& g : dataset.groups) {
    json entries = json::array();
    const std::size_t n = std::max(g.labels.size(), g.glossary.size());
    if (g.labels.size() != g.glossary.size()) {
      json labels = json::array();
      json descriptions = json::array();
      for (const auto& l : g.labels) labels.push_back(l.text);
      for (const auto& d : g.glossary) descriptions.push_back(d.text);
      groups.push_back({{"group_id", g.group_id}, {"labels", labels}, {"descriptions", descriptions}});
      continue;
    }
    for (std::size_t p = 0; p < n; ++p) {
      json e;
      e["label"] = g.labels[p].text;
      e["description"] = g.glossary[p].text;
      const std::string id = default_id(g.group_id, p);
      if (g.labels[p].label_id != id) e["label_id"] = g.labels[p].label_id;
      if (g.glossary[p].entry_id != id) e["entry_id"] = g.glossary[p].entry_id;
      entries.push_back(std::move(e));
    }
    groups.push_back({{"group_id", g.group_id}, {"entries", entries}});
  }
  return json{{"groups", groups}}.dump(2) + "\n";
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset dataset;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      Dataset part = parse_dataset_json(read_file(file), file.string());
      std::move(part.groups.begin(), part.groups.end(), std::back_inserter(dataset.groups));
    }
  } else {
    if (!std::filesystem::exists(path)) throw IoError("no such dataset file: " + path.string());
    dataset = parse_dataset_json(read_file(path), path.string());
  }
  reject_invalid(dataset);
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << dataset_to_json(dataset);
}

std::string dataset_hash(const Dataset& dataset) { return sha256_hex(dataset_to_json(dataset)); }

SemanticGroup parse_table_csv(std::string_view text, const std::string& group_id, const std::string& label_column,
                              const std::string& description_column) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ArgumentError("CSV for group " + group_id + " is empty");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw SchemaError("CSV for group " + group_id + " has no column '" + name + "'");
  };
  const std::size_t label_col = column(label_column);
  const std::size_t desc_col = column(description_column);

  std::vector<std::string> labels;
  std::vector<std::string> descriptions;
  std::vector<std::string> violations;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string label = label_col < row.size() ? trim(row[label_col]) : "";
    const std::string desc = desc_col < row.size() ? trim(row[desc_col]) : "";
    if (label.empty()) violations.push_back("row " + std::to_string(r) + ": empty label");
    if (desc.empty()) violations.push_back("row " + std::to_string(r) + ": empty description");
    labels.push_back(label);
    descriptions.push_back(desc);
  }
  if (!violations.empty()) throw ValidationError(std::move(violations));
  if (labels.empty()) throw ArgumentError("CSV for group " + group_id + " has a header but no rows");
  return make_group(group_id, labels, descriptions);
}

SemanticGroup load_table_csv(const std::filesystem::path& path, const std::string& group_id,
                             const std::string& label_column, const std::string& description_column) {
  return parse_table_csv(read_file(path), group_id, label_column, description_column);
}

}  // namespace dld
