#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "barframe/error.hpp"
#include "barframe/fixtures.hpp"
#include "barframe/rigidity.hpp"
#include "support.hpp"

using namespace barframe;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& f) { return std::string(BARFRAME_DATA_DIR) + "/" + f; }

std::string error_text(const std::string& text) {
  try {
    parse_document(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ErrorCode error_code(const std::string& text) {
  try {
    parse_document(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("checked-in fixtures match the generators") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    CHECK(read_file(testsupport::fixture_path(name)) == dump_document(fixture(name)));
  }
  CHECK_THROWS_AS(fixture("no_such_fixture"), Error);
}

TEST_CASE("round trip keeps unknown keys") {
  std::string text = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1]],
                         "note": "kept", "metadata": {"free_edge": 0}})";
  auto doc = parse_document(text);
  CHECK(doc.extra.at("note") == "kept");
  auto again = parse_document(dump_document(doc));
  CHECK(dump_document(again) == dump_document(doc));
  CHECK(meta_int(again, "free_edge") == 0);
  CHECK_FALSE(meta_double(again, "missing").has_value());
}

TEST_CASE("hexagon fixture loads") {
  auto doc = testsupport::load_fixture("hexagon_diagonals_initial");
  auto fw = to_framework(doc);
  CHECK(fw.num_vertices() == 6);
  CHECK(fw.num_edges() == 9);
  CHECK(fw.dim() == 2);
  auto cs = to_system(doc, {8});
  CHECK(cs.size() == 12);
  CHECK(cs.free() == std::vector<int>{8});
  CHECK(document_pinning(doc).has_value());
}

TEST_CASE("validation messages name the offending entry") {
  std::string bad = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0],[0,1]],
                        "edges": [[0,1],[1,2],[2,0],[1,7]]})";
  CHECK(error_code(bad) == ErrorCode::InvalidDocument);
  CHECK(error_text(bad).find("edges[3]: vertex index 7 out of range") != std::string::npos);

  std::string loop = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[1,1]]})";
  CHECK(error_code(loop) == ErrorCode::InvalidDocument);
  std::string dup = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1],[1,0]]})";
  CHECK(error_code(dup) == ErrorCode::InvalidDocument);
  std::string pins = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1]],
                         "pins": [[0,0],[0,1],[1,0]]})";
  CHECK(error_code(pins) == ErrorCode::InvalidDocument);
  std::string version = R"({"schema_version": 9, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1]]})";
  CHECK(error_code(version) == ErrorCode::InvalidDocument);
  std::string lengths = R"({"schema_version": 1, "dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1]],
                            "lengths": [1, 2]})";
  CHECK(error_code(lengths) == ErrorCode::InvalidDocument);
}

TEST_CASE("parse errors report the line") {
  std::string text = "{\n  \"dim\": 2,\n  \"vertices\": [[0,0],\n  oops\n}";
  CHECK(error_code(text) == ErrorCode::ParseError);
  CHECK(error_text(text).find("line 4") != std::string::npos);
}

TEST_CASE("length mismatches are reported") {
  auto doc = testsupport::load_fixture("fourbar");
  CHECK(length_mismatches(doc).empty());
  doc.lengths = std::vector<double>(doc.edges.size(), 1.0);
  CHECK(length_mismatches(doc).size() == doc.edges.size());
  auto t = target_lengths_sq(doc);
  REQUIRE(t.has_value());
  CHECK((*t)[0] == 1.0);
}

TEST_CASE("save refuses to overwrite") {
  auto dir = fs::temp_directory_path() / "barframe_doc_test";
  fs::create_directories(dir);
  auto path = (dir / "out.json").string();
  fs::remove(path);
  auto doc = fixture("fourbar");
  save_document(doc, path);
  CHECK_THROWS_AS(save_document(doc, path), Error);
  CHECK_NOTHROW(save_document(doc, path, true));
  CHECK(read_file(path) == dump_document(doc));
  fs::remove_all(dir);
}

TEST_CASE("packing ingest") {
  auto tri = ingest_packing(data("triangle.txt"));
  CHECK(tri.warnings.empty());
  CHECK(tri.doc.dim == 2);
  CHECK(tri.doc.edges.size() == 3);
  REQUIRE(tri.doc.lengths.has_value());
  for (double l : *tri.doc.lengths) CHECK(l == 1.0);
  CHECK(meta_string(tri.doc, "name") == "triangle");

  auto tet = ingest_packing(data("tetrahedron.txt"));
  CHECK(tet.doc.dim == 3);
  CHECK(tet.doc.edges.size() == 6);
  auto r = analyze(to_framework(tet.doc));
  CHECK(r.classification == Classification::Isostatic);
  CHECK(r.first_order_rigid);

  auto uneven = ingest_packing(data("uneven.txt"));
  CHECK_FALSE(uneven.warnings.empty());
  CHECK((*uneven.doc.lengths)[0] == doctest::Approx(2.0));

  CHECK_THROWS_AS(ingest_packing_text("3 2\n0 0\n1 0\n"), Error);
  CHECK_THROWS_AS(ingest_packing_text("2 2\n0 0\n1 0\n0 5\n"), Error);
  CHECK_THROWS_AS(ingest_packing(data("missing.txt")), Error);
}

TEST_CASE("doubles survive a round trip") {
  FrameworkDocument doc;
  doc.vertices = {{0.1 + 0.2, 1.0 / 3.0}, {std::nextafter(1.0, 2.0), -2.5e-17}};
  doc.edges = {{0, 1}};
  auto back = parse_document(dump_document(doc));
  CHECK(back.vertices == doc.vertices);
}

TEST_CASE("ingested packings satisfy the ledger") {
  for (const char* f : {"triangle.txt", "tetrahedron.txt", "uneven.txt"}) {
    CAPTURE(f);
    auto r = ingest_packing(data(f));
    CHECK(analyze(to_framework(r.doc)).ledger_defect() == 0);
  }
}
