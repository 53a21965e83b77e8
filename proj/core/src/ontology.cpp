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

#include <expat.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "dld/ingest.hpp"

namespace dld {

namespace {

constexpr char kNsSep = '\x01';
constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
constexpr std::string_view kSkos = "http://www.w3.org/2004/02/skos/core#";
constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
constexpr std::string_view kXml = "http://www.w3.org/XML/1998/namespace";

struct QName {
  std::string_view ns;
  std::string_view local;
};

QName split_name(const char* raw) {
  std::string_view name(raw);
  const auto sep = name.find(kNsSep);
  if (sep == std::string_view::npos) return {{}, name};
  return {name.substr(0, sep), name.substr(sep + 1)};
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

enum class Annotation { kNone, kLabel, kPrefLabel, kDefinition, kDescription };

Annotation classify_predicate(QName name) {
  if (name.ns == kRdfs && name.local == "label") return Annotation::kLabel;
  if (name.ns == kSkos && name.local == "prefLabel") return Annotation::kPrefLabel;
  if (iequals(name.local, "definition")) return Annotation::kDefinition;
  if (iequals(name.local, "description")) return Annotation::kDescription;
  return Annotation::kNone;
}

struct Literal {
  std::string lang;
  std::string text;
};

struct EntityAnnotations {
  std::vector<Literal> labels;
  std::vector<Literal> pref_labels;
  std::vector<Literal> definitions;
  std::vector<Literal> descriptions;
  bool is_ontology_header = false;
};

bool english_or_untagged(const Literal& l) {
  return l.lang.empty() || iequals(l.lang, "en") || (l.lang.size() > 3 && iequals(l.lang.substr(0, 3), "en-"));
}

std::optional<std::string> pick(const std::vector<Literal>& values) {
  for (const auto& v : values) {
    if (english_or_untagged(v) && !trim(v.text).empty()) return trim(v.text);
  }
  for (const auto& v : values) {
    if (!trim(v.text).empty()) return trim(v.text);
  }
  return std::nullopt;
}

using EntityMap = std::map<std::string, EntityAnnotations>;

// Streaming RDF/XML reader that keeps only the annotation literals attached
// directly to named subjects.
class RdfXmlReader {
 public:
  RdfXmlReader(EntityMap& entities, std::string source) : entities_(entities), source_(std::move(source)) {}

  void parse(std::string_view document) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreateNS(nullptr, kNsSep),
                                                                         XML_ParserFree);
    if (!parser) throw Error("cannot allocate XML parser");
    XML_SetUserData(parser.get(), this);
    XML_SetElementHandler(parser.get(), &RdfXmlReader::on_start, &RdfXmlReader::on_end);
    XML_SetCharacterDataHandler(parser.get(), &RdfXmlReader::on_text);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) == XML_STATUS_ERROR) {
      throw ParseError(source_ + ":" + std::to_string(XML_GetCurrentLineNumber(parser.get())) + ":" +
                       std::to_string(XML_GetCurrentColumnNumber(parser.get())) + ": " +
                       XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
  }

 private:
  enum class FrameKind { kContainer, kNode, kProperty, kLiteralXml };

  struct Frame {
    FrameKind kind = FrameKind::kContainer;
    std::string lang;
    std::string base;
    // kNode
    std::optional<std::string> subject;
    // kProperty
    Annotation annotation = Annotation::kNone;
    std::string text;
    bool has_child_node = false;
    bool resource_valued = false;
    bool expects_nodes = false;  // parseType="Collection"
  };

  static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<RdfXmlReader*>(self)->start(name, attrs);
  }
  static void XMLCALL on_end(void* self, const XML_Char* name) { static_cast<RdfXmlReader*>(self)->end(name); }
  static void XMLCALL on_text(void* self, const XML_Char* text, int len) {
    static_cast<RdfXmlReader*>(self)->characters(std::string_view(text, static_cast<std::size_t>(len)));
  }

  std::string resolve(std::string_view ref, const std::string& base) const {
    if (ref.find(':') != std::string_view::npos) return std::string(ref);
    if (base.empty()) return std::string(ref);
    const std::string doc = base.substr(0, base.find('#'));
    if (ref.empty()) return doc;
    if (ref.front() == '#') return doc + std::string(ref);
    return doc.substr(0, doc.rfind('/') + 1) + std::string(ref);
  }

  void start(const XML_Char* raw_name, const XML_Char** attrs) {
    const QName name = split_name(raw_name);
    Frame frame;
    frame.lang = stack_.empty() ? "" : stack_.back().lang;
    frame.base = stack_.empty() ? "" : stack_.back().base;

    std::vector<std::pair<QName, std::string_view>> attributes;
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
      const QName an = split_name(attrs[i]);
      if (an.ns == kXml && an.local == "lang") frame.lang = attrs[i + 1];
      if (an.ns == kXml && an.local == "base") frame.base = attrs[i + 1];
      attributes.emplace_back(an, attrs[i + 1]);
    }
    auto attr = [&](std::string_view ns, std::string_view local) -> std::optional<std::string_view> {
      for (const auto& [an, value] : attributes) {
        if (an.ns == ns && an.local == local) return value;
      }
      return std::nullopt;
    };

    const Frame* parent = stack_.empty() ? nullptr : &stack_.back();
    if (literal_depth_marker_ != 0) {
      frame.kind = FrameKind::kLiteralXml;
      stack_.push_back(std::move(frame));
      return;
    }

    const bool node_position = parent == nullptr || parent->kind == FrameKind::kContainer ||
                               parent->kind == FrameKind::kProperty;
    if (parent == nullptr && name.ns == kRdf && name.local == "RDF") {
      frame.kind = FrameKind::kContainer;
      stack_.push_back(std::move(frame));
      return;
    }

    if (node_position) {
      if (parent != nullptr && parent->kind == FrameKind::kProperty) stack_.back().has_child_node = true;
      frame.kind = FrameKind::kNode;
      if (auto about = attr(kRdf, "about")) {
        frame.subject = resolve(*about, frame.base);
      } else if (auto id = attr(kRdf, "ID")) {
        frame.subject = resolve("#" + std::string(*id), frame.base);
      }
      if (frame.subject) {
        auto& entity = entities_[*frame.subject];
        if (name.ns == kOwl && name.local == "Ontology") entity.is_ontology_header = true;
        // Property attributes carry literal values directly on the node.
        for (const auto& [an, value] : attributes) {
          if (an.ns == kRdf || an.ns == kXml || an.ns.empty()) continue;
          record(entity, classify_predicate(an), Literal{frame.lang, std::string(value)});
        }
      }
      stack_.push_back(std::move(frame));
      return;
    }

    // Property element under a node.
    frame.kind = FrameKind::kProperty;
    frame.annotation = classify_predicate(name);
    frame.resource_valued = attr(kRdf, "resource").has_value() || attr(kRdf, "nodeID").has_value();
    const auto parse_type = attr(kRdf, "parseType");
    if (parse_type && *parse_type == "Literal") {
      stack_.push_back(std::move(frame));
      literal_depth_marker_ = stack_.size();
      return;
    }
    if (parse_type && *parse_type == "Resource") {
      // The property's object is a blank node whose properties follow.
      frame.resource_valued = true;
      stack_.push_back(std::move(frame));
      Frame blank;
      blank.kind = FrameKind::kNode;
      blank.lang = stack_.back().lang;
      blank.base = stack_.back().base;
      stack_.push_back(std::move(blank));
      implicit_blank_depth_.push_back(stack_.size());
      return;
    }
    frame.expects_nodes = parse_type && *parse_type == "Collection";
    stack_.push_back(std::move(frame));
  }

  void end(const XML_Char*) {
    if (!implicit_blank_depth_.empty() && implicit_blank_depth_.back() == stack_.size()) {
      implicit_blank_depth_.pop_back();
      stack_.pop_back();
    }
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    if (frame.kind != FrameKind::kProperty) return;
    if (literal_depth_marker_ == stack_.size() + 1) literal_depth_marker_ = 0;
    if (frame.resource_valued || frame.has_child_node || frame.annotation == Annotation::kNone) return;
    if (stack_.empty() || stack_.back().kind != FrameKind::kNode || !stack_.back().subject) return;
    record(entities_[*stack_.back().subject], frame.annotation, Literal{frame.lang, std::move(frame.text)});
  }

  void characters(std::string_view text) {
    if (stack_.empty()) return;
    if (literal_depth_marker_ != 0 && literal_depth_marker_ <= stack_.size()) {
      stack_[literal_depth_marker_ - 1].text.append(text);
      return;
    }
    if (stack_.back().kind == FrameKind::kProperty) stack_.back().text.append(text);
  }

  static void record(EntityAnnotations& entity, Annotation kind, Literal value) {
    switch (kind) {
      case Annotation::kLabel:
        entity.labels.push_back(std::move(value));
        break;
      case Annotation::kPrefLabel:
        entity.pref_labels.push_back(std::move(value));
        break;
      case Annotation::kDefinition:
        entity.definitions.push_back(std::move(value));
        break;
      case Annotation::kDescription:
        entity.descriptions.push_back(std::move(value));
        break;
      case Annotation::kNone:
        break;
    }
  }

  EntityMap& entities_;
  std::string source_;
  std::vector<Frame> stack_;
  std::vector<std::size_t> implicit_blank_depth_;
  std::size_t literal_depth_marker_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Dataset build_dataset(const EntityMap& entities) {
  std::map<std::string, SemanticGroup> groups;
  for (const auto& [iri, annotations] : entities) {
    if (annotations.is_ontology_header) continue;
    auto label = pick(annotations.labels);
    if (!label) label = pick(annotations.pref_labels);
    auto description = pick(annotations.definitions);
    if (!description) description = pick(annotations.descriptions);
    if (!label || !description) continue;
    const std::string ns = iri_namespace(iri);
    auto& group = groups[ns];
    group.group_id = ns;
    group.labels.push_back({*label, iri});
    group.glossary.push_back({*description, iri});
  }
  Dataset dataset;
  for (auto& [ns, group] : groups) dataset.groups.push_back(std::move(group));
  if (dataset.groups.empty()) throw ArgumentError("ontology yielded no entities with both a label and a definition");
  return dataset;
}

}  // namespace

std::string iri_namespace(std::string_view iri) {
  const auto cut = iri.find_last_of("/#");
  if (cut == std::string_view::npos) return std::string(iri);
  return std::string(iri.substr(0, cut + 1));
}

Dataset extract_ontology(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw ArgumentError("extract_ontology: no input files");
  EntityMap entities;
  for (const auto& path : paths) {
    RdfXmlReader reader(entities, path.string());
    reader.parse(read_file(path));
  }
  return build_dataset(entities);
}

Dataset extract_ontology_from_strings(std::span<const std::string> documents) {
  if (documents.empty()) throw ArgumentError("extract_ontology: no input documents");
  EntityMap entities;
  std::size_t i = 0;
  for (const auto& doc : documents) {
    RdfXmlReader reader(entities, "<document " + std::to_string(i++) + ">");
    reader.parse(doc);
  }
  return build_dataset(entities);
}

}  // namespace dld
