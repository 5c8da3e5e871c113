#include "barframe/document.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "barframe/error.hpp"

namespace barframe {

namespace {

const std::set<std::string> kKnownKeys{"schema_version", "dim",  "vertices", "edges",
                                       "lengths",        "pins", "linear_constraints", "metadata"};

std::string at(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

bool is_int(const Json& v) { return v.is_number_integer(); }

// structural checks while converting; all problems go to errs
FrameworkDocument convert(const Json& j, std::vector<std::string>& errs) {
  FrameworkDocument doc;
  if (!j.is_object()) {
    errs.push_back("document: expected a JSON object");
    return doc;
  }
  for (const char* key : {"schema_version", "dim", "vertices", "edges"})
    if (!j.contains(key)) errs.push_back(std::string(key) + ": missing");

  if (j.contains("schema_version")) {
    if (!is_int(j["schema_version"]))
      errs.push_back("schema_version: expected an integer");
    else
      doc.schema_version = j["schema_version"].get<int>();
  }
  if (j.contains("dim")) {
    if (!is_int(j["dim"]))
      errs.push_back("dim: expected an integer");
    else
      doc.dim = j["dim"].get<int>();
  }
  if (j.contains("vertices")) {
    const auto& vs = j["vertices"];
    if (!vs.is_array()) {
      errs.push_back("vertices: expected an array");
    } else {
      for (std::size_t i = 0; i < vs.size(); ++i) {
        std::vector<double> row;
        if (!vs[i].is_array()) {
          errs.push_back(at("vertices", i) + ": expected an array of numbers");
        } else {
          for (std::size_t k = 0; k < vs[i].size(); ++k) {
            if (!vs[i][k].is_number())
              errs.push_back(at(at("vertices", i), k) + ": expected a number");
            else
              row.push_back(vs[i][k].get<double>());
          }
        }
        doc.vertices.push_back(row);
      }
    }
  }
  if (j.contains("edges")) {
    const auto& es = j["edges"];
    if (!es.is_array()) {
      errs.push_back("edges: expected an array");
    } else {
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (!es[i].is_array() || es[i].size() != 2 || !is_int(es[i][0]) || !is_int(es[i][1])) {
          errs.push_back(at("edges", i) + ": expected a pair of vertex indices");
          doc.edges.push_back({-1, -1});
        } else {
          doc.edges.push_back({es[i][0].get<int>(), es[i][1].get<int>()});
        }
      }
    }
  }
  if (j.contains("lengths") && !j["lengths"].is_null()) {
    const auto& ls = j["lengths"];
    if (!ls.is_array()) {
      errs.push_back("lengths: expected an array");
    } else {
      std::vector<double> l;
      for (std::size_t i = 0; i < ls.size(); ++i) {
        if (!ls[i].is_number()) {
          errs.push_back(at("lengths", i) + ": expected a number");
          l.push_back(NAN);
        } else {
          l.push_back(ls[i].get<double>());
        }
      }
      doc.lengths = l;
    }
  }
  if (j.contains("pins")) {
    const auto& ps = j["pins"];
    if (!ps.is_array()) {
      errs.push_back("pins: expected an array");
    } else {
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!ps[i].is_array() || ps[i].size() != 2 || !is_int(ps[i][0]) || !is_int(ps[i][1]))
          errs.push_back(at("pins", i) + ": expected [vertex, axis]");
        else
          doc.pins.push_back({ps[i][0].get<int>(), ps[i][1].get<int>()});
      }
    }
  }
  if (j.contains("linear_constraints")) {
    const auto& ls = j["linear_constraints"];
    if (!ls.is_array()) {
      errs.push_back("linear_constraints: expected an array");
    } else {
      for (std::size_t i = 0; i < ls.size(); ++i) {
        const auto& t = ls[i];
        if (!t.is_array() || t.size() != 3 || !is_int(t[0]) || !is_int(t[1]) || !is_int(t[2]))
          errs.push_back(at("linear_constraints", i) + ": expected a midpoint triple [mid, a, b]");
        else
          doc.midpoints.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
      }
    }
  }
  if (j.contains("metadata")) {
    if (!j["metadata"].is_object())
      errs.push_back("metadata: expected an object");
    else
      doc.metadata = j["metadata"];
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kKnownKeys.count(it.key())) doc.extra[it.key()] = it.value();
  return doc;
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += "\n  " + x;
  return s;
}

}  // namespace

std::vector<std::string> validate(const FrameworkDocument& doc) {
  std::vector<std::string> errs;
  if (doc.schema_version != kSchemaVersion)
    errs.push_back("schema_version: unsupported version " + std::to_string(doc.schema_version));
  if (doc.dim < 1) errs.push_back("dim: must be positive");
  const int n = static_cast<int>(doc.vertices.size());
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(doc.vertices[i].size()) != doc.dim)
      errs.push_back(at("vertices", i) + ": has " + std::to_string(doc.vertices[i].size()) +
                     " coordinates, expected " + std::to_string(doc.dim));
    for (double x : doc.vertices[i])
      if (!std::isfinite(x)) {
        errs.push_back(at("vertices", i) + ": non-finite coordinate");
        break;
      }
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < doc.edges.size(); ++k) {
    auto [a, b] = doc.edges[k];
    bool ok = true;
    for (int v : {a, b})
      if (v < 0 || v >= n) {
        errs.push_back(at("edges", k) + ": vertex index " + std::to_string(v) + " out of range");
        ok = false;
      }
    if (!ok) continue;
    if (a == b) {
      errs.push_back(at("edges", k) + ": self-loop at vertex " + std::to_string(a));
      continue;
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) errs.push_back(at("edges", k) + ": duplicate edge");
    if (static_cast<int>(doc.vertices[a].size()) == doc.dim && static_cast<int>(doc.vertices[b].size()) == doc.dim) {
      double l2 = 0;
      for (int ax = 0; ax < doc.dim; ++ax) l2 += std::pow(doc.vertices[a][ax] - doc.vertices[b][ax], 2);
      if (l2 == 0.0) errs.push_back(at("edges", k) + ": zero length");
    }
  }
  if (doc.lengths) {
    if (doc.lengths->size() != doc.edges.size())
      errs.push_back("lengths: has " + std::to_string(doc.lengths->size()) + " entries for " +
                     std::to_string(doc.edges.size()) + " edges");
    for (std::size_t k = 0; k < doc.lengths->size(); ++k)
      if (!((*doc.lengths)[k] > 0) || !std::isfinite((*doc.lengths)[k]))
        errs.push_back(at("lengths", k) + ": must be a positive finite number");
  }
  std::set<std::pair<int, int>> pinned;
  for (std::size_t i = 0; i < doc.pins.size(); ++i) {
    const auto& p = doc.pins[i];
    if (p.vertex < 0 || p.vertex >= n) {
      errs.push_back(at("pins", i) + ": vertex index " + std::to_string(p.vertex) + " out of range");
      continue;
    }
    if (p.axis < 0 || p.axis >= doc.dim) {
      errs.push_back(at("pins", i) + ": axis " + std::to_string(p.axis) + " out of range");
      continue;
    }
    if (!pinned.insert({p.vertex, p.axis}).second) errs.push_back(at("pins", i) + ": duplicate pin");
    if (static_cast<int>(doc.vertices[p.vertex].size()) == doc.dim && doc.vertices[p.vertex][p.axis] != 0.0)
      errs.push_back(at("pins", i) + ": pinned coordinate must be 0");
  }
  if (!doc.pins.empty() && errs.empty()) {
    try {
      PinningSpec::from_pins(doc.dim, doc.pins);
    } catch (const Error& e) {
      errs.push_back(std::string("pins: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < doc.midpoints.size(); ++i) {
    const auto& t = doc.midpoints[i];
    for (int v : t)
      if (v < 0 || v >= n) errs.push_back(at("linear_constraints", i) + ": vertex index " + std::to_string(v) + " out of range");
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2])
      errs.push_back(at("linear_constraints", i) + ": indices must be distinct");
  }
  return errs;
}

FrameworkDocument from_json(const Json& j) {
  std::vector<std::string> errs;
  FrameworkDocument doc = convert(j, errs);
  if (errs.empty()) errs = validate(doc);
  else {
    auto more = validate(doc);
    errs.insert(errs.end(), more.begin(), more.end());
  }
  if (!errs.empty()) throw Error(ErrorCode::InvalidDocument, "invalid framework document:" + join(errs));
  return doc;
}

FrameworkDocument parse_document(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "parse error at " + line_context(text, e.byte) + ": " + e.what());
  }
  return from_json(j);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FrameworkDocument load_document(const std::string& path) {
  try {
    return parse_document(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

Json to_json(const FrameworkDocument& doc) {
  Json j = doc.extra.is_object() ? doc.extra : Json::object();
  j["schema_version"] = doc.schema_version;
  j["dim"] = doc.dim;
  j["vertices"] = doc.vertices;
  Json es = Json::array();
  for (auto [a, b] : doc.edges) es.push_back({a, b});
  j["edges"] = es;
  if (doc.lengths) j["lengths"] = *doc.lengths;
  if (!doc.pins.empty()) {
    Json ps = Json::array();
    for (const auto& p : doc.pins) ps.push_back({p.vertex, p.axis});
    j["pins"] = ps;
  }
  if (!doc.midpoints.empty()) j["linear_constraints"] = doc.midpoints;
  if (!doc.metadata.empty()) j["metadata"] = doc.metadata;
  return j;
}

std::string dump_document(const FrameworkDocument& doc) { return to_json(doc).dump(2) + "\n"; }

void save_document(const FrameworkDocument& doc, const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path))
    throw Error(ErrorCode::Io, path + " exists (use --force to overwrite)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << dump_document(doc);
}

FrameworkDocument make_document(const Framework& fw) {
  FrameworkDocument doc;
  doc.dim = fw.dim();
  for (int v = 0; v < fw.num_vertices(); ++v) {
    Vec p = fw.point(v);
    doc.vertices.emplace_back(p.data(), p.data() + p.size());
  }
  for (const auto& e : fw.edges()) doc.edges.push_back({e.a, e.b});
  return doc;
}

std::vector<LengthMismatch> length_mismatches(const FrameworkDocument& doc, double tol) {
  std::vector<LengthMismatch> out;
  if (!doc.lengths) return out;
  auto fw = to_framework(doc);
  for (int k = 0; k < fw.num_edges(); ++k) {
    const double m = std::sqrt(edge_length_sq(fw, k));
    const double t = (*doc.lengths)[k];
    if (std::abs(m - t) > tol) out.push_back({k, m, t});
  }
  return out;
}

Framework to_framework(const FrameworkDocument& doc) {
  std::vector<std::pair<int, int>> edges(doc.edges.begin(), doc.edges.end());
  return Framework::from_points(doc.dim, doc.vertices, edges);
}

std::vector<Constraint> linear_constraints(const FrameworkDocument& doc) {
  std::vector<Constraint> out;
  const int n = static_cast<int>(doc.vertices.size());
  for (const auto& t : doc.midpoints) {
    auto rows = midpoint_constraints(n, doc.dim, t[0], t[1], t[2]);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::optional<std::vector<double>> target_lengths_sq(const FrameworkDocument& doc) {
  if (!doc.lengths) return std::nullopt;
  std::vector<double> sq;
  for (double l : *doc.lengths) sq.push_back(l * l);
  return sq;
}

std::optional<PinningSpec> document_pinning(const FrameworkDocument& doc) {
  if (doc.pins.empty()) return std::nullopt;
  return PinningSpec::from_pins(doc.dim, doc.pins);
}

ConstraintSystem to_system(const FrameworkDocument& doc, std::vector<int> free) {
  std::vector<Constraint> extra;
  if (auto ps = document_pinning(doc)) extra = ps->constraints();
  auto lin = linear_constraints(doc);
  extra.insert(extra.end(), lin.begin(), lin.end());
  return build_system(to_framework(doc), extra, target_lengths_sq(doc), std::move(free));
}

std::optional<int> meta_int(const FrameworkDocument& doc, const std::string& key) {
  if (doc.metadata.contains(key) && doc.metadata[key].is_number_integer()) return doc.metadata[key].get<int>();
  return std::nullopt;
}

std::optional<double> meta_double(const FrameworkDocument& doc, const std::string& key) {
  if (doc.metadata.contains(key) && doc.metadata[key].is_number()) return doc.metadata[key].get<double>();
  return std::nullopt;
}

std::optional<std::string> meta_string(const FrameworkDocument& doc, const std::string& key) {
  if (doc.metadata.contains(key) && doc.metadata[key].is_string()) return doc.metadata[key].get<std::string>();
  return std::nullopt;
}

IngestResult ingest_packing_text(const std::string& text, const std::string& name) {
  // collect (line number, tokens) for non-empty lines
  std::vector<std::pair<int, std::vector<std::string>>> lines;
  {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(t);
      if (!tok.empty()) lines.push_back({no, tok});
    }
  }
  auto fail = [](int line, const std::string& msg) -> Error {
    return Error(ErrorCode::ParseError, "packing file line " + std::to_string(line) + ": " + msg);
  };
  auto num = [&](int line, const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw fail(line, "expected a number, got '" + s + "'");
    }
  };
  auto integer = [&](int line, const std::string& s) {
    double v = num(line, s);
    if (v != std::floor(v)) throw fail(line, "expected an integer, got '" + s + "'");
    return static_cast<int>(v);
  };
  if (lines.empty()) throw Error(ErrorCode::ParseError, "packing file is empty");
  const auto& head = lines[0];
  if (head.second.size() > 2) throw fail(head.first, "header must be 'n [d]'");
  const int n = integer(head.first, head.second[0]);
  const int d = head.second.size() == 2 ? integer(head.first, head.second[1]) : 3;
  if (n < 1) throw fail(head.first, "vertex count must be positive");
  if (d < 1) throw fail(head.first, "dimension must be positive");
  if (static_cast<int>(lines.size()) < 1 + n) throw Error(ErrorCode::ParseError, "packing file has fewer than n coordinate rows");

  IngestResult res;
  auto& doc = res.doc;
  doc.dim = d;
  for (int i = 0; i < n; ++i) {
    const auto& [no, tok] = lines[1 + i];
    if (static_cast<int>(tok.size()) != d)
      throw fail(no, "expected " + std::to_string(d) + " coordinates, got " + std::to_string(tok.size()));
    std::vector<double> row;
    for (const auto& t : tok) row.push_back(num(no, t));
    doc.vertices.push_back(row);
  }
  const std::size_t rest = lines.size() - 1 - n;
  bool matrix = rest == static_cast<std::size_t>(n) && n != 2;
  if (matrix)
    for (std::size_t i = 0; i < rest; ++i)
      if (static_cast<int>(lines[1 + n + i].second.size()) != n) matrix = false;
  if (matrix) {
    std::vector<std::vector<int>> A(n, std::vector<int>(n));
    for (int i = 0; i < n; ++i) {
      const auto& [no, tok] = lines[1 + n + i];
      for (int k = 0; k < n; ++k) {
        A[i][k] = integer(no, tok[k]);
        if (A[i][k] != 0 && A[i][k] != 1) throw fail(no, "adjacency entries must be 0 or 1");
      }
    }
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        if (A[i][k] != A[k][i])
          throw fail(lines[1 + n + i].first, "adjacency matrix is not symmetric at (" + std::to_string(i) + ", " +
                                                 std::to_string(k) + ")");
        if (A[i][k]) doc.edges.push_back({i, k});
      }
  } else {
    for (std::size_t i = 0; i < rest; ++i) {
      const auto& [no, tok] = lines[1 + n + i];
      if (tok.size() != 2) throw fail(no, "expected a contact 'i j'");
      doc.edges.push_back({integer(no, tok[0]), integer(no, tok[1])});
    }
  }
  auto errs = validate(doc);
  if (!errs.empty()) throw Error(ErrorCode::InvalidDocument, "invalid packing:" + join(errs));

  auto fw = to_framework(doc);
  double worst = 0.0;
  std::vector<double> measured;
  for (int k = 0; k < fw.num_edges(); ++k) {
    measured.push_back(std::sqrt(edge_length_sq(fw, k)));
    worst = std::max(worst, std::abs(measured.back() - 1.0));
  }
  if (worst <= 1e-6) {
    doc.lengths = std::vector<double>(doc.edges.size(), 1.0);
  } else {
    doc.lengths = measured;
    std::ostringstream w;
    w << "contact lengths differ from 1 by up to " << worst << "; using measured lengths";
    res.warnings.push_back(w.str());
  }
  if (!name.empty()) doc.metadata["name"] = name;
  doc.metadata["provenance"] = "sphere packing";
  return res;
}

IngestResult ingest_packing(const std::string& path) {
  return ingest_packing_text(read_file(path), std::filesystem::path(path).stem().string());
}

}  // namespace barframe
