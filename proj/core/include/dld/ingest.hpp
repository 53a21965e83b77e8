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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dld/domain.hpp"

namespace dld {

/// Group-file JSON. A dataset file is {"groups": [group, ...]}; a group is
///   {"group_id": "loans", "entries": [{"label": "LOAN_AMT", "description": "..."}]}
/// Entries may carry "label_id"/"entry_id"; missing IDs become "{group_id}:{index}".
Dataset parse_dataset_json(std::string_view text, std::string_view source_name = "<memory>");

/// Canonical serialization; IDs are written only where they differ from the
/// generated default. Round-trips through parse_dataset_json.
std::string dataset_to_json(const Dataset& dataset);

/// Loads a dataset file, or every *.json one-group file of a directory in
/// file-name order. Rejects datasets that fail validate_dataset with a
/// ValidationError.
Dataset load_dataset(const std::filesystem::path& path);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// SHA-256 of the canonical serialization.
std::string dataset_hash(const Dataset& dataset);

/// One group from a headered CSV, rows in file order.
SemanticGroup load_table_csv(const std::filesystem::path& path, const std::string& group_id,
                             const std::string& label_column, const std::string& description_column);

SemanticGroup parse_table_csv(std::string_view text, const std::string& group_id, const std::string& label_column,
                              const std::string& description_column);

/// RFC 4180 records; quoted fields may hold commas, quotes ("") and newlines.
/// Throws ParseError (with line number) on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Label/definition pairs from RDF/XML ontology files. Named entities with
/// both an rdfs:label (or skos:prefLabel) and an annotation whose local name
/// is "definition" or "description" (definition preferred) become entries,
/// grouped by IRI namespace (IRI cut after its last '/' or '#'). Groups and
/// entries are ordered lexicographically by IRI; IDs are the entity IRIs.
/// Files are merged in the given order, first value winning.
Dataset extract_ontology(std::span<const std::filesystem::path> paths);
Dataset extract_ontology_from_strings(std::span<const std::string> documents);

/// The IRI's namespace: everything up to and including its last '/' or '#'.
std::string iri_namespace(std::string_view iri);

}  // namespace dld
