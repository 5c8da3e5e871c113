#include "barframe/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "barframe/bifurcation.hpp"
#include "barframe/document.hpp"
#include "barframe/error.hpp"
#include "barframe/fixtures.hpp"
#include "barframe/manifold_opt.hpp"
#include "barframe/pinning.hpp"
#include "barframe/rigidity.hpp"
#include "barframe/stress_design.hpp"

namespace barframe {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidFramework:
    case ErrorCode::InvalidConstraint:
    case ErrorCode::InvalidPinSpec:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidDocument:
    case ErrorCode::Io:
      return kExitUsage;
    default:
      return kExitSolver;
  }
}

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (double x : parse_list(s, what)) {
    if (x != std::floor(x)) throw UsageError(what + ": expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

void check_output(const std::string& path, bool force) {
  if (!path.empty() && !force && std::filesystem::exists(path))
    throw Error(ErrorCode::Io, path + " exists (use --force to overwrite)");
}

void write_text(const std::string& path, const std::string& text, bool force) {
  check_output(path, force);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
}

FrameworkDocument load_checked(const std::string& path, std::ostream& err) {
  auto doc = load_document(path);
  for (const auto& m : length_mismatches(doc))
    err << "warning: edge " << m.edge << " measured length " << num(m.measured) << " differs from target "
        << num(m.target) << "\n";
  return doc;
}

double rank_tol_for(const FrameworkDocument& doc, double flag) {
  if (flag > 0) return flag;
  return meta_double(doc, "rank_tolerance").value_or(linalg::default_rank_tol);
}

// document with pins; unpinned documents are moved to the standard pinned frame
FrameworkDocument ensure_pinned(FrameworkDocument doc) {
  if (!doc.pins.empty()) return doc;
  auto pf = make_pinning(to_framework(doc));
  auto moved = make_document(pf.framework);
  doc.vertices = moved.vertices;
  doc.pins = pf.spec.pinned;
  return doc;
}

int edge_arg(const FrameworkDocument& doc, int flag, const char* key, const char* what) {
  int e = flag;
  if (e < 0) {
    auto m = meta_int(doc, key);
    if (!m) throw UsageError(std::string(what) + " not given and not in the document metadata");
    e = *m;
  }
  if (e < 0 || e >= static_cast<int>(doc.edges.size()))
    throw UsageError(std::string(what) + " " + std::to_string(e) + " out of range (document has " +
                     std::to_string(doc.edges.size()) + " edges)");
  return e;
}

Json verdict_json(const SecondOrderVerdict& v) {
  return {{"certified", v.certified()}, {"min_eig", v.min_eig}, {"max_eig", v.max_eig},
          {"pd_tol", v.pd_tol},         {"cone_dim", v.cone_dim}};
}

Json result_json(const OptimizationResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["certified"] = r.certified();
  j["direction"] = to_string(r.direction);
  j["objective"] = r.objective;
  j["kkt_residual"] = r.kkt_residual;
  j["licq"] = r.licq_ok;
  j["pin_multiplier"] = r.pin_multiplier;
  j["iterations"] = r.iters;
  j["lambda"] = vec_json(r.lambda);
  j["second_order"] = verdict_json(r.second_order);
  std::vector<double> free_len;
  for (int f : r.cs.free()) free_len.push_back(std::sqrt(r.cs.value(f, r.p_star)));
  j["free_lengths"] = free_len;
  return j;
}

void print_result(std::ostream& out, const OptimizationResult& r) {
  out << "status: " << to_string(r.status) << "\n";
  for (int f : r.cs.free())
    out << "free edge " << std::get<EdgeLength>(r.cs.constraint(f).kind).edge << ": length "
        << num(std::sqrt(r.cs.value(f, r.p_star))) << "\n";
  out << "direction: " << to_string(r.direction) << "\n";
  out << "kkt residual: " << num(r.kkt_residual) << "\n";
  out << "licq: " << (r.licq_ok ? "yes" : "no") << "\n";
  if (r.pin_multiplier > 1e-6) out << "warning: pins carry stress (" << num(r.pin_multiplier) << ")\n";
  out << "second order: " << (r.certified() ? "certified" : "not certified")
      << " (extreme eigenvalue " << num(r.second_order.extreme_eig()) << ", tolerance " << num(r.second_order.pd_tol)
      << ")\n";
  out << "iterations: " << r.iters << "\n";
}

int result_exit(const OptimizationResult& r) {
  if (!r.converged()) return kExitSolver;
  return r.certified() ? kExitOk : kExitUncertified;
}

FrameworkDocument result_document(FrameworkDocument doc, const Vec& p, const std::string& key, const Json& info) {
  const int d = doc.dim;
  for (std::size_t v = 0; v < doc.vertices.size(); ++v)
    for (int ax = 0; ax < d; ++ax) doc.vertices[v][ax] = p(v * d + ax);
  // pinned coordinates are exact zeros; clear roundoff signs
  for (const auto& pc : doc.pins) doc.vertices[pc.vertex][pc.axis] = 0.0;
  doc.lengths.reset();
  doc.metadata.erase("rank_tolerance");
  doc.metadata[key] = info;
  return doc;
}

// perturb free coordinates and drop stored lengths
FrameworkDocument perturbed(FrameworkDocument doc, double magnitude, std::uint64_t seed) {
  auto fw = perturb(to_framework(doc), magnitude, seed);
  auto moved = make_document(fw);
  doc.vertices = moved.vertices;
  for (const auto& pc : doc.pins) doc.vertices[pc.vertex][pc.axis] = 0.0;
  doc.lengths.reset();
  return doc;
}

struct Common {
  std::string file;
  std::string out;
  bool force = false;
  std::string emit;
  double rank_tol = -1;
};

void add_common(CLI::App* sub, Common& c, bool with_out) {
  sub->add_option("file", c.file, "framework document")->required();
  if (with_out) {
    sub->add_option("--out", c.out, "output path");
    sub->add_flag("--force", c.force, "overwrite existing outputs");
  }
  sub->add_option("--emit", c.emit, "machine-readable output")->check(CLI::IsMember({"summary"}));
  sub->add_option("--rank-tol", c.rank_tol, "relative rank tolerance");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  Common c;
  bool stresses = false;
  bool flexes = false;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  AnalyzeOptions ao;
  ao.rank_tol = rank_tol_for(doc, a.c.rank_tol);
  ao.linear = linear_constraints(doc);
  auto rep = analyze(to_framework(doc), ao);
  if (a.c.emit == "summary") {
    Json j{{"summary", rep.summary()},
           {"classification", to_string(rep.classification)},
           {"flexes", rep.num_flexes()},
           {"stresses", rep.num_stresses()},
           {"rank", rep.rank_R},
           {"first_order_rigid", rep.first_order_rigid},
           {"prestress", to_string(rep.prestress.kind)},
           {"ledger_defect", rep.ledger_defect()}};
    if (a.stresses) {
      Json s = Json::array();
      for (int k = 0; k < rep.num_stresses(); ++k) s.push_back(vec_json(rep.self_stresses.col(k)));
      j["self_stresses"] = s;
    }
    if (a.flexes) {
      Json f = Json::array();
      for (int k = 0; k < rep.num_flexes(); ++k) f.push_back(vec_json(rep.nontrivial_flexes.col(k)));
      j["flexes"] = f;
    }
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << rep.summary() << "\n";
  out << "vertices " << rep.num_vertices << ", dim " << rep.dim << ", edges " << rep.num_edges << ", rows "
      << rep.num_rows << "\n";
  out << "rank R " << rep.rank_R << ", trivial flexes " << rep.trivial_dim
      << (rep.degenerate_span ? " (degenerate span)" : "") << "\n";
  out << "first-order rigid: " << (rep.first_order_rigid ? "yes" : "no") << "\n";
  out << "prestress: " << to_string(rep.prestress.kind);
  if (rep.prestress.kind == PrestressKind::PrestressStable)
    out << " (min eigenvalue " << num(rep.prestress.min_eig) << ", tolerance " << num(rep.prestress.pd_tol) << ")";
  out << "\n";
  out << "smallest singular values:";
  const auto& s = rep.singular_values;
  for (Eigen::Index i = std::max<Eigen::Index>(0, s.size() - 4); i < s.size(); ++i) out << " " << num(s(i));
  out << "\n";
  if (a.stresses)
    for (int k = 0; k < rep.num_stresses(); ++k)
      out << "stress " << k << ": " << rep.self_stresses.col(k).transpose().format(Eigen::IOFormat(10)) << "\n";
  if (a.flexes)
    for (int k = 0; k < rep.num_flexes(); ++k)
      out << "flex " << k << ": " << rep.nontrivial_flexes.col(k).transpose().format(Eigen::IOFormat(10)) << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- optimize

struct OptimizeArgs {
  Common c;
  int edge = -1;
  std::string dir;
  double eta = 1e-2;
  double tol = -1;
  std::uint64_t seed = 0;
  double perturb = 0.0;
  int restarts = 1;
  long max_iters = 200000;
};

Direction parse_dir(const std::string& s) {
  if (s == "min") return Direction::Minimize;
  if (s == "max") return Direction::Maximize;
  throw UsageError("--dir must be min or max");
}

bool better(const OptimizationResult& a, const OptimizationResult& b) {
  // certified beats converged beats failed, then objective
  auto rank = [](const OptimizationResult& r) { return r.certified() ? 2 : (r.converged() ? 1 : 0); };
  if (rank(a) != rank(b)) return rank(a) > rank(b);
  return a.direction == Direction::Minimize ? a.objective < b.objective : a.objective > b.objective;
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  const int edge = edge_arg(doc, a.edge, "free_edge", "--edge");
  std::string dir = a.dir;
  if (dir.empty()) dir = meta_string(doc, "direction").value_or("");
  if (dir.empty()) throw UsageError("--dir not given and not in the document metadata");
  const Direction direction = parse_dir(dir);
  if (a.restarts < 1) throw UsageError("--restarts must be at least 1");
  check_output(a.c.out, a.c.force);
  doc = ensure_pinned(doc);

  Tolerances tol;
  tol.rank = a.c.rank_tol > 0 ? a.c.rank_tol : tol.rank;
  if (a.tol > 0) tol.step = a.tol;

  const double mag = a.perturb > 0 ? a.perturb : (a.restarts > 1 ? 1e-2 : 0.0);
  auto run = [&](int i) {
    FrameworkDocument start = mag > 0 ? perturbed(doc, mag, a.seed + i) : doc;
    OptimizationProblem op;
    op.cs = to_system(start, {edge});
    op.p0 = to_framework(start).coords();
    op.direction = direction;
    op.tol = tol;
    op.eta = a.eta;
    op.max_iters = a.max_iters;
    return solve(op);
  };
  std::vector<std::future<OptimizationResult>> jobs;
  for (int i = 0; i < a.restarts; ++i) jobs.push_back(std::async(std::launch::async, run, i));
  std::optional<OptimizationResult> best;
  int best_i = 0;
  for (int i = 0; i < a.restarts; ++i) {
    auto r = jobs[i].get();
    if (!best || better(r, *best)) {
      best = std::move(r);
      best_i = i;
    }
  }
  const auto& r = *best;
  Json info = result_json(r);
  info["edge"] = edge;
  if (a.restarts > 1 || mag > 0) info["seed"] = a.seed + best_i;
  if (!a.c.out.empty()) save_document(result_document(doc, r.p_star, "optimization", info), a.c.out, a.c.force);
  if (a.c.emit == "summary") {
    out << info.dump(2) << "\n";
  } else {
    print_result(out, r);
    if (a.restarts > 1) out << "best of " << a.restarts << " restarts: seed " << a.seed + best_i << "\n";
  }
  return result_exit(r);
}

// ---------------------------------------------------------- stress-design

struct StressArgs {
  Common c;
  std::string targets;
  double eta = 1e-2;
  long max_iters = 200000;
};

std::vector<StressTarget> parse_targets(const FrameworkDocument& doc, const std::string& s) {
  std::vector<StressTarget> out;
  if (s.empty()) {
    if (!doc.metadata.contains("targets")) throw UsageError("--targets not given and not in the document metadata");
    for (const auto& t : doc.metadata["targets"]) out.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw UsageError("--targets: expected edge=sigma, got '" + tok + "'");
      try {
        std::size_t p1 = 0, p2 = 0;
        const std::string ks = tok.substr(0, eq), vs = tok.substr(eq + 1);
        int k = std::stoi(ks, &p1);
        double v = std::stod(vs, &p2);
        if (p1 != ks.size() || p2 != vs.size()) throw std::invalid_argument(tok);
        out.push_back({k, v});
      } catch (const std::exception&) {
        throw UsageError("--targets: cannot parse '" + tok + "'");
      }
    }
  }
  for (const auto& t : out)
    if (t.edge < 0 || t.edge >= static_cast<int>(doc.edges.size()))
      throw UsageError("--targets: edge " + std::to_string(t.edge) + " out of range");
  return out;
}

int cmd_stress(const StressArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  auto targets = parse_targets(doc, a.targets);
  check_output(a.c.out, a.c.force);
  doc = ensure_pinned(doc);
  StressDesignProblem prob;
  prob.framework = to_framework(doc);
  prob.targets = targets;
  prob.pinning = *document_pinning(doc);
  prob.linear = linear_constraints(doc);
  prob.lengths_sq = target_lengths_sq(doc);
  if (a.c.rank_tol > 0) prob.tol.rank = a.c.rank_tol;
  prob.eta = a.eta;
  prob.max_iters = a.max_iters;
  auto r = solve_stress_design(prob);
  auto chk = designed_stress_check(r, targets, prob.linear);
  Json info = result_json(r);
  info["max_rel_deviation"] = chk.max_rel_deviation;
  info["self_stresses"] = chk.num_stresses;
  info["designed_stress"] = vec_json(chk.stress);
  if (!a.c.out.empty()) save_document(result_document(doc, r.p_star, "stress_design", info), a.c.out, a.c.force);
  if (a.c.emit == "summary") {
    out << info.dump(2) << "\n";
  } else {
    print_result(out, r);
    out << "self-stresses: " << chk.num_stresses << "\n";
    out << "max relative deviation from targets: " << num(chk.max_rel_deviation) << "\n";
  }
  return result_exit(r);
}

// ----------------------------------------------------------- force-density

struct ForceArgs {
  Common c;
  std::string weights;
  std::string fixed;
};

int cmd_force(const ForceArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  auto w = parse_list(a.weights, "--weights");
  if (w.size() != doc.edges.size())
    throw UsageError("--weights: need " + std::to_string(doc.edges.size()) + " values, got " + std::to_string(w.size()));
  check_output(a.c.out, a.c.force);
  auto fw = to_framework(doc);
  Vec wv = Eigen::Map<Vec>(w.data(), w.size());
  ForceDensityResult r;
  if (!a.fixed.empty()) {
    auto vs = parse_int_list(a.fixed, "--fixed");
    for (int v : vs)
      if (v < 0 || v >= fw.num_vertices()) throw UsageError("--fixed: vertex " + std::to_string(v) + " out of range");
    r = force_density_solve(fw, wv, vs);
  } else {
    if (doc.pins.empty()) throw UsageError("--fixed not given and the document has no pins");
    r = force_density_solve(fw, wv, doc.pins);
  }
  Json info{{"minimizer", r.minimizer}, {"residual", r.residual}, {"weights", w}};
  if (!a.c.out.empty()) {
    auto res = result_document(doc, r.p, "force_density", info);
    save_document(res, a.c.out, a.c.force);
  }
  if (a.c.emit == "summary")
    out << info.dump(2) << "\n";
  else
    out << "equilibrium residual: " << num(r.residual) << "\nenergy minimizer: " << (r.minimizer ? "yes" : "no")
        << "\n";
  return r.minimizer ? kExitOk : kExitUncertified;
}

// ----------------------------------------------------------------- perturb

struct PerturbArgs {
  Common c;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  if (!(a.magnitude >= 0)) throw UsageError("--magnitude must be non-negative");
  check_output(a.c.out, a.c.force);
  auto res = perturbed(doc, a.magnitude, a.seed);
  res.metadata["perturbation"] = {{"magnitude", a.magnitude}, {"seed", a.seed}};
  if (a.c.out.empty())
    out << dump_document(res);
  else
    save_document(res, a.c.out, a.c.force);
  return kExitOk;
}

// ------------------------------------------------------------------- trace

struct TraceArgs {
  Common c;
  int edge = -1;
  int alpha_edge = -1;
  double step = 0.01;
};

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  const int edge = edge_arg(doc, a.edge, "free_edge", "--free-edge");
  if (!(a.step > 0)) throw UsageError("--step must be positive");
  check_output(a.c.out, a.c.force);
  doc = ensure_pinned(doc);
  TraceOptions to;
  to.h = a.step;
  to.alpha_edge = a.alpha_edge >= 0 ? a.alpha_edge : meta_int(doc, "alpha_edge").value_or(-1);
  if (to.alpha_edge >= static_cast<int>(doc.edges.size())) throw UsageError("--alpha-edge out of range");
  if (a.c.rank_tol > 0) to.rank_tol = a.c.rank_tol;
  auto cs = to_system(doc, {edge});
  auto tr = trace_manifold(cs, to_framework(doc).coords(), to);
  auto ex = find_extrema(tr);

  std::ostringstream csv;
  csv << "X,Y\n" << std::setprecision(17);
  for (const auto& s : tr.samples) csv << s.alpha << "," << std::sqrt(s.f1) << "\n";
  if (a.c.out.empty())
    out << csv.str();
  else
    write_text(a.c.out, csv.str(), a.c.force);

  Json info{{"closed", tr.closed}, {"samples", tr.samples.size()}, {"end", to_string(tr.end)},
            {"loop_length", tr.loop_length}};
  Json ej = Json::array();
  for (const auto& e : ex)
    ej.push_back({{"kind", to_string(e.kind)}, {"alpha", e.alpha}, {"length", e.length()}, {"kkt_residual", e.kkt_residual}});
  info["extrema"] = ej;
  auto& log = a.c.out.empty() ? err : out;
  if (a.c.emit == "summary") {
    log << info.dump(2) << "\n";
  } else {
    log << "trace: " << tr.samples.size() << " samples, " << (tr.closed ? "closed" : to_string(tr.end)) << "\n";
    for (const auto& e : ex)
      log << to_string(e.kind) << " at alpha " << num(e.alpha) << ", length " << num(e.length()) << "\n";
  }
  return tr.end == TraceEnd::Closed || tr.end == TraceEnd::MaxSteps ? kExitOk : kExitSolver;
}

// --------------------------------------------------------------- bifurcate

struct BifArgs {
  Common c;
  int free_edge = -1;
  int tune_edge = -1;
  std::string bracket;
  double step = 0.01;
};

int cmd_bifurcate(const BifArgs& a, std::ostream& out, std::ostream& err) {
  auto doc = load_checked(a.c.file, err);
  const int free_edge = edge_arg(doc, a.free_edge, "free_edge", "--free-edge");
  const int tune_edge = edge_arg(doc, a.tune_edge, "tune_edge", "--tune-edge");
  if (free_edge == tune_edge) throw UsageError("--free-edge and --tune-edge must differ");
  std::vector<double> br;
  if (!a.bracket.empty())
    br = parse_list(a.bracket, "--bracket");
  else if (doc.metadata.contains("bracket"))
    br = doc.metadata["bracket"].get<std::vector<double>>();
  if (br.size() != 2) throw UsageError("--bracket must be lo,hi");
  if (!(a.step > 0)) throw UsageError("--step must be positive");
  check_output(a.c.out, a.c.force);
  doc = ensure_pinned(doc);
  MergeOptions mo;
  mo.h = a.step;
  mo.trace.alpha_edge = meta_int(doc, "alpha_edge").value_or(-1);
  if (a.c.rank_tol > 0) mo.trace.rank_tol = mo.cert.rank_tol = a.c.rank_tol;
  auto cs = to_system(doc, {free_edge});
  auto res = merge_search(cs, to_framework(doc).coords(), cs.edge_constraint(tune_edge), {br[0], br[1]}, mo);
  const auto& c = res.certificate;
  const bool third = c.kind == CertificateKind::ThirdOrder;
  Json hist = Json::array();
  for (const auto& h : res.history) hist.push_back({{"mu", h.mu}, {"extrema", h.extrema}, {"gap", h.gap}});
  Json info{{"certificate", third ? "third-order" : "inconclusive"},
            {"reason", c.reason},
            {"tuned_length", res.tuned_length},
            {"critical_free_length", res.critical_free_length},
            {"critical_alpha", res.critical_alpha},
            {"a3", res.a3},
            {"dimK", res.dimK},
            {"d1", c.d1},
            {"d2", c.d2},
            {"licq", c.licq},
            {"second_order_value", std::isnan(res.second_order_value) ? Json(nullptr) : Json(res.second_order_value)},
            {"free_edge", free_edge},
            {"tune_edge", tune_edge},
            {"history", hist}};
  if (!a.c.out.empty()) save_document(result_document(doc, res.critical_config, "bifurcation", info), a.c.out, a.c.force);
  if (a.c.emit == "summary") {
    out << info.dump(2) << "\n";
  } else {
    out << "certificate: " << (third ? "third-order" : "inconclusive");
    if (!c.reason.empty()) out << " (" << c.reason << ")";
    out << "\n";
    out << "tuned length: " << num(res.tuned_length) << "\n";
    out << "critical free length: " << num(res.critical_free_length) << "\n";
    out << "critical alpha: " << num(res.critical_alpha) << "\n";
    out << "cubic coefficient: " << num(res.a3) << "\n";
    out << "dim K: " << res.dimK << "\n";
    out << "second-order stress test: " << num(res.second_order_value) << "\n";
  }
  return third ? kExitOk : kExitUncertified;
}

// ----------------------------------------------------------------- fixture

struct FixtureArgs {
  std::string name;
  bool list = false;
  bool all = false;
  std::string out;
  std::string out_dir;
  bool force = false;
};

int cmd_fixture(const FixtureArgs& a, std::ostream& out, std::ostream&) {
  if (a.list) {
    for (const auto& n : fixture_names()) out << n << "\n";
    return kExitOk;
  }
  if (a.all) {
    if (a.out_dir.empty()) throw UsageError("--all needs --out-dir");
    std::filesystem::create_directories(a.out_dir);
    for (const auto& n : fixture_names())
      save_document(fixture(n), (std::filesystem::path(a.out_dir) / (n + ".json")).string(), a.force);
    return kExitOk;
  }
  if (a.name.empty()) throw UsageError("give a fixture name, --list or --all");
  auto doc = fixture(a.name);
  if (a.out.empty())
    out << dump_document(doc);
  else
    save_document(doc, a.out, a.force);
  return kExitOk;
}

// ------------------------------------------------------------------ ingest

struct IngestArgs {
  std::string file;
  std::string out;
  bool force = false;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  check_output(a.out, a.force);
  auto r = ingest_packing(a.file);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  if (a.out.empty())
    out << dump_document(r.doc);
  else
    save_document(r.doc, a.out, a.force);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rigidity analysis and design of bar frameworks", "barframe"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* s_an = app.add_subcommand("analyze", "rank, flexes, self-stresses and prestress verdict");
  add_common(s_an, an.c, false);
  s_an->add_flag("--stresses", an.stresses, "print the self-stress basis");
  s_an->add_flag("--flexes", an.flexes, "print the nontrivial flex basis");

  OptimizeArgs op;
  auto* s_op = app.add_subcommand("optimize", "extremize one edge length with all others fixed");
  add_common(s_op, op.c, true);
  s_op->add_option("--edge", op.edge, "free edge index");
  s_op->add_option("--dir", op.dir, "min or max")->check(CLI::IsMember({"min", "max"}));
  s_op->add_option("--eta", op.eta, "gradient step");
  s_op->add_option("--tol", op.tol, "step-size stopping tolerance");
  s_op->add_option("--seed", op.seed, "perturbation seed");
  s_op->add_option("--perturb", op.perturb, "perturbation magnitude applied before solving");
  s_op->add_option("--restarts", op.restarts, "number of seeded runs");
  s_op->add_option("--max-iters", op.max_iters, "iteration cap");

  StressArgs sd;
  auto* s_sd = app.add_subcommand("stress-design", "prescribe stress ratios on a set of edges");
  add_common(s_sd, sd.c, true);
  s_sd->add_option("--targets", sd.targets, "edge=sigma,...");
  s_sd->add_option("--eta", sd.eta, "gradient step");
  s_sd->add_option("--max-iters", sd.max_iters, "iteration cap");

  ForceArgs fd;
  auto* s_fd = app.add_subcommand("force-density", "positions from prescribed force densities");
  add_common(s_fd, fd.c, true);
  s_fd->add_option("--weights", fd.weights, "one force density per edge, comma separated")->required();
  s_fd->add_option("--fixed", fd.fixed, "fixed vertices (default: pinned coordinates)");

  PerturbArgs pt;
  auto* s_pt = app.add_subcommand("perturb", "random perturbation of the vertices");
  add_common(s_pt, pt.c, true);
  s_pt->add_option("--magnitude", pt.magnitude, "uniform perturbation size")->required();
  s_pt->add_option("--seed", pt.seed, "random seed");

  TraceArgs tr;
  auto* s_tr = app.add_subcommand("trace", "trace the one-dimensional constraint manifold");
  add_common(s_tr, tr.c, true);
  s_tr->add_option("--free-edge", tr.edge, "free edge index");
  s_tr->add_option("--alpha-edge", tr.alpha_edge, "edge whose angle is reported as X");
  s_tr->add_option("--step", tr.step, "arclength step");

  BifArgs bf;
  auto* s_bf = app.add_subcommand("bifurcate", "tune an edge until a max/min pair merges");
  add_common(s_bf, bf.c, true);
  s_bf->add_option("--free-edge", bf.free_edge, "free edge index");
  s_bf->add_option("--tune-edge", bf.tune_edge, "tuned edge index");
  s_bf->add_option("--bracket", bf.bracket, "lo,hi tuned lengths");
  s_bf->add_option("--step", bf.step, "trace step");

  FixtureArgs fx;
  auto* s_fx = app.add_subcommand("fixture", "write bundled fixtures");
  s_fx->add_option("name", fx.name, "fixture name");
  s_fx->add_flag("--list", fx.list, "list fixture names");
  s_fx->add_flag("--all", fx.all, "write every fixture");
  s_fx->add_option("--out", fx.out, "output path");
  s_fx->add_option("--out-dir", fx.out_dir, "directory for --all");
  s_fx->add_flag("--force", fx.force, "overwrite existing outputs");

  IngestArgs ig;
  auto* s_ig = app.add_subcommand("ingest", "convert a sphere-packing contact file");
  s_ig->add_option("file", ig.file, "packing file")->required();
  s_ig->add_option("--out", ig.out, "output document");
  s_ig->add_flag("--force", ig.force, "overwrite existing outputs");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s_an) return cmd_analyze(an, out, err);
    if (*s_op) return cmd_optimize(op, out, err);
    if (*s_sd) return cmd_stress(sd, out, err);
    if (*s_fd) return cmd_force(fd, out, err);
    if (*s_pt) return cmd_perturb(pt, out, err);
    if (*s_tr) return cmd_trace(tr, out, err);
    if (*s_bf) return cmd_bifurcate(bf, out, err);
    if (*s_fx) return cmd_fixture(fx, out, err);
    if (*s_ig) return cmd_ingest(ig, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_for(e.code());
  } catch (const Json::exception& e) {
    err << "error: malformed metadata: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}

}  // namespace barframe
