#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "barframe/framework.hpp"
#include "barframe/pinning.hpp"
#include "json.hpp"

namespace barframe {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// JSON framework file. Keys: schema_version, dim, vertices, edges, and the
// optional lengths, pins ([vertex, axis] pairs), linear_constraints
// (midpoint triples [mid, a, b]) and metadata. Other top-level keys are kept
// in `extra` and written back unchanged.
struct FrameworkDocument {
  int schema_version = kSchemaVersion;
  int dim = 2;
  std::vector<std::vector<double>> vertices;
  std::vector<std::pair<int, int>> edges;
  std::optional<std::vector<double>> lengths;
  std::vector<PinnedCoordinate> pins;
  std::vector<std::array<int, 3>> midpoints;
  Json metadata = Json::object();
  Json extra = Json::object();
};

// every invariant violation, empty when valid
std::vector<std::string> validate(const FrameworkDocument& doc);

FrameworkDocument parse_document(const std::string& text);
FrameworkDocument load_document(const std::string& path);
std::string dump_document(const FrameworkDocument& doc);
// refuses to replace an existing file unless force
void save_document(const FrameworkDocument& doc, const std::string& path, bool force = false);

Json to_json(const FrameworkDocument& doc);
FrameworkDocument from_json(const Json& j);

FrameworkDocument make_document(const Framework& fw);

struct LengthMismatch {
  int edge = 0;
  double measured = 0.0;
  double target = 0.0;
};
// edges whose measured length differs from the stored target by more than tol
std::vector<LengthMismatch> length_mismatches(const FrameworkDocument& doc, double tol = 1e-9);

Framework to_framework(const FrameworkDocument& doc);
std::vector<Constraint> linear_constraints(const FrameworkDocument& doc);
// squared targets (from lengths when present)
std::optional<std::vector<double>> target_lengths_sq(const FrameworkDocument& doc);
std::optional<PinningSpec> document_pinning(const FrameworkDocument& doc);

// edges, then pins, then midpoint rows
ConstraintSystem to_system(const FrameworkDocument& doc, std::vector<int> free = {});

std::optional<int> meta_int(const FrameworkDocument& doc, const std::string& key);
std::optional<double> meta_double(const FrameworkDocument& doc, const std::string& key);
std::optional<std::string> meta_string(const FrameworkDocument& doc, const std::string& key);

// Packing text layout:
//   line 1: n [d]            (d defaults to 3)
//   n lines of d coordinates
//   then either an n x n 0/1 adjacency matrix or one "i j" contact per line
// Blank lines and '#' comments are ignored.
struct IngestResult {
  FrameworkDocument doc;
  std::vector<std::string> warnings;
};
IngestResult ingest_packing_text(const std::string& text, const std::string& name = "");
IngestResult ingest_packing(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace barframe
