#include "barframe/bifurcation.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "barframe/error.hpp"
#include "barframe/manifold_opt.hpp"
#include "barframe/rigidity.hpp"

namespace barframe {

const char* to_string(TraceEnd e) {
  switch (e) {
    case TraceEnd::Closed: return "closed";
    case TraceEnd::MaxSteps: return "max-steps";
    case TraceEnd::LicqFailure: return "licq-failure";
    case TraceEnd::ProjectionFailed: return "projection-failed";
  }
  return "?";
}

const char* to_string(ExtremumKind k) { return k == ExtremumKind::Max ? "max" : "min"; }

double Extremum::length() const { return std::sqrt(f1); }

namespace {

int free_of(const ConstraintSystem& cs) {
  auto f = cs.free_index();
  if (!f) throw Error(ErrorCode::InvalidConstraint, "exactly one free constraint required");
  if (!cs.constraint(*f).is_edge()) throw Error(ErrorCode::InvalidConstraint, "free constraint must be an edge");
  return *f;
}

struct TangentInfo {
  Vec t;
  int null_dim = 0;
};

TangentInfo tangent_at(const ConstraintSystem& cs, const Vec& p, const Vec* ref, double rank_tol) {
  Mat J = cs.fixed_jacobian(p);
  auto dec = linalg::svd(J, rank_tol);
  const int nd = cs.dof();
  TangentInfo ti;
  ti.null_dim = nd - dec.rank;
  ti.t = dec.V.col(nd - 1);
  if (ref) {
    if (ti.t.dot(*ref) < 0) ti.t = -ti.t;
  } else {
    ti.t = linalg::normalize_sign(ti.t);
  }
  return ti;
}

// Newton corrector on c(q) = 0, tau . (q - pred) = 0
Vec correct(const ConstraintSystem& cs, const Vec& pred, const Vec& tau, double feas_tol, int max_newton) {
  const auto fixed = cs.fixed_indices();
  const int r = static_cast<int>(fixed.size());
  const int nd = cs.dof();
  Vec q = pred;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= max_newton; ++it) {
    Vec c = cs.fixed_residual(q);
    const double s = tau.dot(q - pred);
    const double res = std::max(c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0, std::abs(s));
    if (!std::isfinite(res)) break;
    if (res <= 1e-2 * feas_tol) return q;
    if (res <= feas_tol && res >= 0.5 * prev) return q;
    if (it == max_newton) break;
    prev = res;
    Mat A(r + 1, nd);
    A.topRows(r) = cs.rows_jacobian(fixed, q);
    A.row(r) = tau.transpose();
    Vec F(r + 1);
    F << c, s;
    Vec dq;
    if (r + 1 == nd) {
      Eigen::FullPivLU<Mat> lu(A);
      if (lu.rank() < nd) throw Error(ErrorCode::ProjectionFailed, "singular corrector system");
      dq = lu.solve(-F);
    } else {
      dq = Eigen::CompleteOrthogonalDecomposition<Mat>(A).solve(-F);
    }
    q += dq;
  }
  if (cs.violation(q) <= feas_tol && std::abs(tau.dot(q - pred)) <= feas_tol) return q;
  throw Error(ErrorCode::ProjectionFailed, "corrector did not converge");
}

double dalpha_dt(const Vec& p, const Vec& tau, int d, int o, int t) {
  const double ux = p(t * d) - p(o * d), uy = p(t * d + 1) - p(o * d + 1);
  const double vx = tau(t * d) - tau(o * d), vy = tau(t * d + 1) - tau(o * d + 1);
  return ux * vy - uy * vx;
}

struct AlphaSetup {
  int origin = 0;
  int target = 0;
};

AlphaSetup alpha_setup(const ConstraintSystem& cs, int origin, int edge) {
  AlphaSetup a;
  const int d = cs.dim();
  if (origin < 0) {
    origin = 0;
    // the vertex with every axis pinned
    std::vector<int> count(cs.num_vertices(), 0);
    for (const auto& c : cs.constraints())
      if (auto pc = std::get_if<PinCoordinate>(&c.kind)) ++count[pc->vertex];
    for (int v = 0; v < cs.num_vertices(); ++v)
      if (count[v] == d) {
        origin = v;
        break;
      }
  }
  if (origin >= cs.num_vertices()) throw Error(ErrorCode::IndexOutOfRange, "alpha origin out of range");
  a.origin = origin;
  if (edge < 0) {
    for (std::size_t k = 0; k < cs.edges().size(); ++k)
      if (cs.edges()[k].a == origin || cs.edges()[k].b == origin) {
        edge = static_cast<int>(k);
        break;
      }
    if (edge < 0) throw Error(ErrorCode::InvalidConstraint, "no edge at the alpha origin");
  }
  if (edge >= static_cast<int>(cs.edges().size())) throw Error(ErrorCode::IndexOutOfRange, "alpha edge out of range");
  const auto& e = cs.edges()[edge];
  if (e.a != origin && e.b != origin) {
    // edge not at the origin: measure along it from its first endpoint
    a.origin = e.a;
    a.target = e.b;
  } else {
    a.target = e.a == origin ? e.b : e.a;
  }
  return a;
}

double deriv_along(const ConstraintSystem& cs, int fi, const Vec& p, const Vec& ref, double rank_tol) {
  auto ti = tangent_at(cs, p, &ref, rank_tol);
  return cs.gradient(fi, p).dot(ti.t);
}

}  // namespace

double alpha_angle(const Vec& p, int dim, int origin, int target) {
  double a = std::atan2(p(target * dim + 1) - p(origin * dim + 1), p(target * dim) - p(origin * dim));
  if (a < 0) a += 2 * M_PI;
  if (a >= 2 * M_PI) a -= 2 * M_PI;
  return a;
}

PathDerivatives path_derivatives(const ConstraintSystem& cs, const Vec& p, const Vec* ref, double rank_tol) {
  const int fi = free_of(cs);
  const auto fixed = cs.fixed_indices();
  auto ti = tangent_at(cs, p, ref, rank_tol);
  PathDerivatives out;
  out.tangent = ti.t;
  out.null_dim = ti.null_dim;
  out.f1 = cs.value(fi, p);
  Vec g = cs.gradient(fi, p);
  out.d1 = g.dot(ti.t);
  // curvature of the path: J kappa = -[tau^T H_i tau]
  Mat J = cs.rows_jacobian(fixed, p);
  Vec q(fixed.size());
  for (std::size_t k = 0; k < fixed.size(); ++k) q(k) = cs.hessian_form(fixed[k], ti.t, ti.t);
  Vec kappa = Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(-q);
  out.d2 = cs.hessian_form(fi, ti.t, ti.t) + g.dot(kappa);
  return out;
}

ManifoldTrace trace_manifold(const ConstraintSystem& cs, const Vec& p0_in, const TraceOptions& o) {
  const int fi = free_of(cs);
  if (cs.dim() < 2) throw Error(ErrorCode::DimensionMismatch, "trace needs d >= 2");
  if (!(o.h > 0)) throw Error(ErrorCode::InvalidConstraint, "step must be positive");
  ManifoldTrace tr;
  tr.cs = cs;
  tr.h = o.h;
  auto al = alpha_setup(cs, o.alpha_origin, o.alpha_edge);
  tr.alpha_origin = al.origin;
  tr.alpha_target = al.target;
  const int d = cs.dim();

  Vec p0 = project(cs, p0_in, {o.feas_tol, o.max_newton, false});
  auto ti = tangent_at(cs, p0, nullptr, o.rank_tol);
  if (ti.null_dim != 1)
    throw Error(ErrorCode::LicqFailure, "constraint manifold is not 1-dimensional at the start (null dim " +
                                            std::to_string(ti.null_dim) + ")");
  Vec tau = ti.t;
  if (dalpha_dt(p0, tau, d, al.origin, al.target) < 0) tau = -tau;

  auto sample = [&](double t, const Vec& p, const Vec& tg) {
    TraceSample s;
    s.t = t;
    s.p = p;
    s.alpha = alpha_angle(p, d, al.origin, al.target);
    s.f1 = cs.value(fi, p);
    s.df1 = cs.gradient(fi, p).dot(tg);
    s.tangent = tg;
    return s;
  };
  tr.samples.push_back(sample(0.0, p0, tau));

  Vec p = p0;
  double t = 0.0;
  tr.end = TraceEnd::MaxSteps;
  for (int step = 1; step <= o.max_steps; ++step) {
    Vec q;
    bool ok = false;
    double h = o.h;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt, h *= 0.5) {
      try {
        q = correct(cs, p + h * tau, tau, o.feas_tol, o.max_newton);
        ok = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProjectionFailed) throw;
      }
    }
    if (!ok) {
      tr.end = TraceEnd::ProjectionFailed;
      break;
    }
    auto tn = tangent_at(cs, q, &tau, o.rank_tol);
    if (tn.null_dim != 1) {
      tr.end = TraceEnd::LicqFailure;
      break;
    }
    if (step >= 10 && tn.t.dot(tr.samples[0].tangent) > 0) {
      Vec seg = q - p;
      double s = std::clamp((p0 - p).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
      if ((p + s * seg - p0).norm() < 0.5 * o.h) {
        tr.closed = true;
        tr.loop_length = t + (p0 - p).norm();
        tr.end = TraceEnd::Closed;
        break;
      }
    }
    t += (q - p).norm();
    tr.samples.push_back(sample(t, q, tn.t));
    p = q;
    tau = tn.t;
  }
  return tr;
}

namespace {

struct Bracket {
  std::size_t a, b;
  double tb;  // arclength at b (loop length for the wrap pair)
};

std::vector<Bracket> sign_changes(const ManifoldTrace& tr) {
  std::vector<Bracket> out;
  const auto& s = tr.samples;
  const std::size_t n = s.size();
  if (n < 2) return out;
  auto flips = [](double x, double y) { return (x > 0 && y <= 0) || (x < 0 && y >= 0); };
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (flips(s[i].df1, s[i + 1].df1) && s[i].df1 != 0.0) out.push_back({i, i + 1, s[i + 1].t});
  if (tr.closed && s[n - 1].df1 != 0.0 && flips(s[n - 1].df1, s[0].df1)) out.push_back({n - 1, 0, tr.loop_length});
  return out;
}

}  // namespace

std::vector<Extremum> raw_extrema(const ManifoldTrace& tr) {
  std::vector<Extremum> out;
  for (const auto& br : sign_changes(tr)) {
    const auto& a = tr.samples[br.a];
    const auto& b = tr.samples[br.b];
    Extremum e;
    e.kind = a.df1 > 0 ? ExtremumKind::Max : ExtremumKind::Min;
    const double w = a.df1 / (a.df1 - b.df1);
    e.t = a.t + w * (br.tb - a.t);
    const auto& near = w < 0.5 ? a : b;
    e.p = near.p;
    e.alpha = near.alpha;
    e.f1 = near.f1;
    out.push_back(e);
  }
  return out;
}

std::vector<Extremum> find_extrema(const ManifoldTrace& tr, double kkt_tol) {
  std::vector<Extremum> out;
  const auto& cs = tr.cs;
  const int fi = free_of(cs);
  const int d = cs.dim();
  TraceOptions o;
  for (const auto& br : sign_changes(tr)) {
    const auto& a = tr.samples[br.a];
    const auto& b = tr.samples[br.b];
    const Vec& ta = a.tangent;
    const double db = ta.dot(b.p - a.p);
    auto chart = [&](double delta) { return correct(cs, a.p + delta * ta, ta, o.feas_tol, o.max_newton); };
    auto g = [&](double delta) { return deriv_along(cs, fi, chart(delta), ta, o.rank_tol); };

    Extremum e;
    e.kind = a.df1 > 0 ? ExtremumKind::Max : ExtremumKind::Min;
    double root = 0.0;
    Vec q;
    try {
      const double ga = a.df1;
      const double gb = g(db);
      if (db > 0 && ga * gb < 0) {
        boost::uintmax_t iters = 80;
        auto r = boost::math::tools::toms748_solve(g, 0.0, db, ga, gb,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
        root = 0.5 * (r.first + r.second);
      } else {
        root = std::abs(ga) <= std::abs(gb) ? 0.0 : db;
      }
      q = chart(root);
    } catch (const Error&) {
      root = std::abs(a.df1) <= std::abs(b.df1) ? 0.0 : db;
      q = std::abs(a.df1) <= std::abs(b.df1) ? a.p : b.p;
    }
    e.t = a.t + (db > 0 ? root / db : 0.0) * (br.tb - a.t);
    e.p = q;
    e.alpha = alpha_angle(q, d, tr.alpha_origin, tr.alpha_target);
    e.f1 = cs.value(fi, q);
    e.kkt_residual = lagrange_multiplier(cs, q).kkt_residual;
    e.kkt_ok = e.kkt_residual <= kkt_tol;
    out.push_back(e);
  }
  return out;
}

std::vector<double> cubic_fit(const ConstraintSystem& cs, const Vec& p, double window, int n, double feas_tol) {
  const int fi = free_of(cs);
  const double f0 = cs.value(fi, p);
  const double step = window / n;
  auto t0 = tangent_at(cs, p, nullptr, linalg::default_rank_tol);
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (double dir : {1.0, -1.0}) {
    Vec q = p;
    Vec tau = dir * t0.t;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      Vec qn = correct(cs, q + step * tau, tau, feas_tol, 30);
      s += (qn - q).norm();
      auto tn = tangent_at(cs, qn, &tau, linalg::default_rank_tol);
      q = qn;
      tau = tn.t;
      pts.push_back({dir * s, cs.value(fi, q) - f0});
    }
  }
  Mat A(pts.size(), 3);
  Vec y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = pts[i].first;
    A(i, 0) = s;
    A(i, 1) = s * s;
    A(i, 2) = s * s * s;
    y(i) = pts[i].second;
  }
  Vec c = A.colPivHouseholderQr().solve(y);
  // sign of t follows the tangent orientation chosen by normalize_sign
  return {c(0), c(1), c(2)};
}

Certificate third_order_certificate(const ConstraintSystem& cs, const Vec& p, const CertificateOptions& o) {
  const int fi = free_of(cs);
  Certificate c;
  const int nd = cs.dof();
  c.dimK = nd - linalg::rank(cs.jacobian(p), o.rank_tol);
  c.licq = licq_check(cs, p, o.rank_tol);
  auto pd = path_derivatives(cs, p, nullptr, o.rank_tol);
  c.d1 = pd.d1;
  c.d2 = pd.d2;
  try {
    auto fit = cubic_fit(cs, p, o.window, o.samples_per_side, o.feas_tol);
    c.a1_fit = fit[0];
    c.a2_fit = fit[1];
    c.a3 = fit[2];
  } catch (const Error& e) {
    c.a3 = 0.0;
    c.reason = std::string("cubic fit failed: ") + e.what();
  }

  Framework fw(cs.dim(), p, cs.edges());
  std::vector<Constraint> linear;
  for (const auto& k : cs.constraints())
    if (k.is_linear()) linear.push_back(k);
  AnalyzeOptions ao;
  ao.rank_tol = o.rank_tol;
  ao.linear = linear;
  auto rep = analyze(fw, ao);
  c.second_order_value = std::numeric_limits<double>::quiet_NaN();
  if (rep.num_stresses() == 1) {
    Vec w = rep.self_stresses.col(0);
    const auto& e = std::get<EdgeLength>(cs.constraint(fi).kind);
    c.free_stress_ratio = std::abs(w(e.edge)) / w.norm();
    if (rep.tperp_flexes.cols() == 1) c.second_order_value = second_order_stress_test(fw, w, rep.tperp_flexes.col(0));
  }

  std::vector<std::string> fails;
  if (c.dimK != 1) fails.push_back("dim K = " + std::to_string(c.dimK) + " (need 1)");
  if (!c.licq) fails.push_back("LICQ fails for the fixed constraints");
  if (!(std::abs(c.d1) < o.merge_tol)) fails.push_back("first derivative not zero");
  if (!(std::abs(c.d2) < o.merge_tol)) fails.push_back("second derivative not zero");
  if (!(std::abs(c.a3) > o.a3_tol)) fails.push_back("cubic coefficient vanishes");
  if (fails.empty() && c.reason.empty()) {
    c.kind = CertificateKind::ThirdOrder;
  } else {
    c.kind = CertificateKind::Inconclusive;
    for (const auto& f : fails) c.reason += (c.reason.empty() ? "" : "; ") + f;
  }
  return c;
}

namespace {

struct State {
  double mu = 0.0;
  Vec p;
};

struct Pair {
  std::size_t i = 0, j = 0;  // adjacent extrema, j follows i along the trace
  double gap = 0.0;
  Vec mid;
};

std::vector<Pair> adjacent_pairs(const ManifoldTrace& tr, const std::vector<Extremum>& ex) {
  std::vector<Pair> out;
  const std::size_t n = ex.size();
  if (n < 2) return out;
  const double L = tr.closed ? tr.loop_length : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + 1;
    if (j == n) {
      if (!tr.closed) break;
      j = 0;
    }
    if (ex[i].kind == ex[j].kind) continue;
    double gap = ex[j].t - ex[i].t;
    if (gap < 0) gap += L;
    out.push_back({i, j, gap, 0.5 * (ex[i].p + ex[j].p)});
  }
  return out;
}

}  // namespace

BifurcationResult merge_search(const ConstraintSystem& base, const Vec& p0, int tune,
                               std::pair<double, double> bracket, const MergeOptions& o) {
  const int fi = free_of(base);
  if (tune < 0 || tune >= base.size() || !base.constraint(tune).is_edge() || tune == fi)
    throw Error(ErrorCode::InvalidConstraint, "tuning constraint must be a fixed edge");
  if (!(bracket.first > 0 && bracket.second > 0 && bracket.first != bracket.second))
    throw Error(ErrorCode::BracketInvalid, "bracket must hold two distinct positive lengths");
  const auto fixed = base.fixed_indices();
  const int tune_row = static_cast<int>(std::find(fixed.begin(), fixed.end(), tune) - fixed.begin());
  TraceOptions topt = o.trace;
  topt.h = o.h;

  auto system_at = [&](double mu) { return base.with_target(tune, mu * mu); };
  auto move_to = [&](const State& from, double mu) {
    const int n0 = std::max(1, static_cast<int>(std::ceil(std::abs(mu - from.mu) / o.ramp_step)));
    for (int n = n0; n <= 16 * n0; n *= 2) {
      try {
        Vec p = from.p;
        for (int i = 1; i <= n; ++i) {
          double mi = from.mu + (mu - from.mu) * i / n;
          p = project(system_at(mi), p, {topt.feas_tol, topt.max_newton, false});
        }
        return State{mu, p};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProjectionFailed) throw;
      }
    }
    throw Error(ErrorCode::ProjectionFailed, "could not follow the tuning length to " + std::to_string(mu));
  };
  struct Eval {
    ManifoldTrace trace;
    std::vector<Extremum> ex;
  };
  auto evaluate = [&](const State& s) {
    Eval e;
    e.trace = trace_manifold(system_at(s.mu), s.p, topt);
    e.ex = find_extrema(e.trace);
    return e;
  };

  BifurcationResult res;
  res.tuning_constraint = tune;
  State s0{std::sqrt(base.value(tune, p0)), p0};
  s0.p = project(system_at(s0.mu), p0, {topt.feas_tol, topt.max_newton, false});
  State lo = move_to(s0, bracket.first), hi = move_to(s0, bracket.second);
  Eval elo = evaluate(lo), ehi = evaluate(hi);
  res.history.push_back({lo.mu, static_cast<int>(elo.ex.size()), 0.0});
  res.history.push_back({hi.mu, static_cast<int>(ehi.ex.size()), 0.0});
  if (elo.ex.size() == ehi.ex.size())
    throw Error(ErrorCode::BracketInvalid, "extrema count is the same at both ends of the bracket (" +
                                               std::to_string(elo.ex.size()) + ")");
  const bool lo_present = elo.ex.size() > ehi.ex.size();
  State P = lo_present ? lo : hi, A = lo_present ? hi : lo;
  Eval EP = lo_present ? elo : ehi;
  const Eval& EA = lo_present ? ehi : elo;
  const std::size_t np = EP.ex.size(), na = EA.ex.size();

  // the pair with no counterpart on the absent side
  auto pairs = adjacent_pairs(EP.trace, EP.ex);
  if (pairs.empty()) throw Error(ErrorCode::PairTrackingLost, "no adjacent max/min pair on the present side");
  Pair tracked = *std::min_element(pairs.begin(), pairs.end(), [](auto& x, auto& y) { return x.gap < y.gap; });
  {
    std::vector<bool> used(np, false);
    for (const auto& ea : EA.ex) {
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < np; ++k) {
        if (used[k] || EP.ex[k].kind != ea.kind) continue;
        double dd = (EP.ex[k].p - ea.p).norm();
        if (dd < bd) {
          bd = dd;
          best = static_cast<int>(k);
        }
      }
      if (best >= 0) used[best] = true;
    }
    for (const auto& pr : pairs)
      if (!used[pr.i] && !used[pr.j] && std::count(used.begin(), used.end(), false) == 2) tracked = pr;
  }
  res.history.back().gap = lo_present ? 0.0 : tracked.gap;
  if (lo_present) res.history[0].gap = tracked.gap;

  for (int it = 0; it < o.max_bisect && std::abs(P.mu - A.mu) > o.bracket_tol; ++it) {
    const double mid = 0.5 * (P.mu + A.mu);
    State S = move_to(P, mid);
    Eval E = evaluate(S);
    if (E.ex.size() == np) {
      auto prs = adjacent_pairs(E.trace, E.ex);
      if (prs.empty()) throw Error(ErrorCode::PairTrackingLost, "pair lost at mu = " + std::to_string(P.mu));
      tracked = *std::min_element(prs.begin(), prs.end(), [&](auto& x, auto& y) {
        return (x.mid - tracked.mid).norm() < (y.mid - tracked.mid).norm();
      });
      res.history.push_back({mid, static_cast<int>(np), tracked.gap});
      P = S;
      EP = std::move(E);
    } else if (E.ex.size() == na) {
      res.history.push_back({mid, static_cast<int>(na), 0.0});
      A = S;
    } else {
      throw Error(ErrorCode::PairTrackingLost, "extrema count " + std::to_string(E.ex.size()) +
                                                   " at mu = " + std::to_string(mid) +
                                                   "; last good mu = " + std::to_string(P.mu));
    }
  }

  // start the augmented Newton solve at the inflection between the pair
  Vec pstart = EP.ex[tracked.i].p;
  {
    const auto& ei = EP.ex[tracked.i];
    const auto& ej = EP.ex[tracked.j];
    double best = std::numeric_limits<double>::infinity();
    const double L = EP.trace.loop_length;
    for (const auto& s : EP.trace.samples) {
      double off = s.t - ei.t;
      if (off < 0 && EP.trace.closed) off += L;
      if (off <= 0 || off >= tracked.gap) continue;
      auto pd = path_derivatives(EP.trace.cs, s.p, &s.tangent);
      if (std::abs(pd.d2) < best) {
        best = std::abs(pd.d2);
        pstart = s.p;
      }
    }
    if (!std::isfinite(best)) pstart = 0.5 * (ei.p + ej.p);
  }

  const int nd = base.dof();
  const int r = static_cast<int>(fixed.size());
  Vec p = pstart;
  double mu = P.mu;
  Vec tref = path_derivatives(system_at(mu), p).tangent;
  const double eps = 1e-6;
  int it = 0;
  for (; it < o.max_newton; ++it) {
    auto cs = system_at(mu);
    auto pd = path_derivatives(cs, p, &tref);
    tref = pd.tangent;
    Vec F(r + 2);
    F << cs.fixed_residual(p), pd.d1, pd.d2;
    const double cres = F.head(r).lpNorm<Eigen::Infinity>();
    if (cres <= 1e-2 * topt.feas_tol && std::abs(pd.d1) <= 1e-3 * o.cert.merge_tol &&
        std::abs(pd.d2) <= 1e-3 * o.cert.merge_tol)
      break;
    Mat Jz = Mat::Zero(r + 2, nd + 1);
    Jz.topLeftCorner(r, nd) = cs.rows_jacobian(fixed, p);
    Jz(tune_row, nd) = -2.0 * mu;
    for (int k = 0; k < nd; ++k) {
      Vec pp = p, pm = p;
      pp(k) += eps;
      pm(k) -= eps;
      auto a = path_derivatives(cs, pp, &tref), b = path_derivatives(cs, pm, &tref);
      Jz(r, k) = (a.d1 - b.d1) / (2 * eps);
      Jz(r + 1, k) = (a.d2 - b.d2) / (2 * eps);
    }
    Vec dz;
    if (r + 2 == nd + 1) {
      Eigen::FullPivLU<Mat> lu(Jz);
      dz = lu.solve(-F);
    } else {
      dz = Eigen::CompleteOrthogonalDecomposition<Mat>(Jz).solve(-F);
    }
    const double dn = dz.norm();
    if (dn > 0.05) dz *= 0.05 / dn;
    p += dz.head(nd);
    mu += dz(nd);
    if (dn < 1e-15) break;
  }
  res.newton_iters = it;
  res.cs = system_at(mu);
  res.tuned_length = mu;
  res.critical_config = p;
  res.critical_free_length = std::sqrt(res.cs.value(fi, p));
  auto al = alpha_setup(res.cs, topt.alpha_origin, topt.alpha_edge);
  res.critical_alpha = alpha_angle(p, base.dim(), al.origin, al.target);
  res.certificate = third_order_certificate(res.cs, p, o.cert);
  res.a3 = res.certificate.a3;
  res.dimK = res.certificate.dimK;
  res.second_order_value = res.certificate.second_order_value;
  return res;
}

}  // namespace barframe
