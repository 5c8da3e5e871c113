#include "doctest.h"

#include <cmath>

#include "barframe/bifurcation.hpp"
#include "barframe/error.hpp"
#include "barframe/manifold_opt.hpp"
#include "barframe/pinning.hpp"
#include "barframe/rigidity.hpp"
#include "support.hpp"

using namespace barframe;

namespace {

struct Setup {
  ConstraintSystem cs;
  Vec p0;
};

Setup load(const std::string& name, int free_edge) {
  auto doc = testsupport::load_fixture(name);
  return {to_system(doc, {free_edge}), to_framework(doc).coords()};
}

// reference values from tests/oracles/two_triangle_merge.py
constexpr double kMuStar = 0.4981153364903416;
constexpr double kAlphaStar = 4.4551112771272473;
constexpr double kLengthStar = 0.95853834016669956;

}  // namespace

TEST_CASE("fourbar loop has one maximum and one minimum") {
  auto s = load("fourbar", 4);
  auto tr = trace_manifold(s.cs, s.p0);
  CHECK(tr.closed);
  CHECK(tr.end == TraceEnd::Closed);
  auto ex = find_extrema(tr);
  REQUIRE(ex.size() == 2);
  int nmax = 0, nmin = 0;
  for (auto& e : ex) {
    CHECK(e.kkt_ok);
    if (e.kind == ExtremumKind::Max) {
      ++nmax;
      CHECK(e.length() == doctest::Approx(2.5).epsilon(1e-8));
    } else {
      ++nmin;
      CHECK(e.length() == doctest::Approx(1.5).epsilon(1e-8));
    }
  }
  CHECK(nmax == 1);
  CHECK(nmin == 1);
}

TEST_CASE("path second derivative matches differences of the first") {
  auto s = load("fourbar", 4);
  TraceOptions o;
  o.h = 1e-3;
  o.max_steps = 200;
  auto tr = trace_manifold(s.cs, s.p0, o);
  REQUIRE(tr.samples.size() > 100);
  for (int i : {20, 50, 90}) {
    const auto& a = tr.samples[i - 1];
    const auto& b = tr.samples[i + 1];
    auto pd = path_derivatives(s.cs, tr.samples[i].p, &tr.samples[i].tangent);
    double fd = (b.df1 - a.df1) / (b.t - a.t);
    CHECK(pd.d2 == doctest::Approx(fd).epsilon(1e-4));
    CHECK(pd.d1 == doctest::Approx(tr.samples[i].df1).epsilon(1e-9));
    CHECK(pd.null_dim == 1);
  }
}

TEST_CASE("cubic coefficient matches the third derivative") {
  auto s = load("fourbar", 4);
  TraceOptions o;
  o.h = 1e-3;
  o.max_steps = 200;
  auto tr = trace_manifold(s.cs, s.p0, o);
  const int i = 100;
  Vec p = tr.samples[i].p;
  auto c = cubic_fit(s.cs, p, 0.05, 20);
  REQUIRE(c.size() == 3);
  auto pd = path_derivatives(s.cs, p);
  auto dm = path_derivatives(s.cs, tr.samples[i - 10].p, &pd.tangent);
  auto dp = path_derivatives(s.cs, tr.samples[i + 10].p, &pd.tangent);
  double d3 = (dp.d2 - dm.d2) / (tr.samples[i + 10].t - tr.samples[i - 10].t);
  double sgn = pd.tangent.dot(tr.samples[i].tangent) > 0 ? 1.0 : -1.0;
  CHECK(c[0] == doctest::Approx(pd.d1).epsilon(1e-5));
  CHECK(c[1] == doctest::Approx(pd.d2 / 2).epsilon(1e-3));
  CHECK(c[2] == doctest::Approx(sgn * d3 / 6).epsilon(2e-2));
}

TEST_CASE("two-triangle family at the reference length") {
  auto s = load("third_order_family_unit", 6);
  TraceOptions o;
  o.alpha_edge = 2;
  auto tr = trace_manifold(s.cs, s.p0, o);
  REQUIRE(tr.closed);
  auto ex = find_extrema(tr);
  REQUIRE(ex.size() == 4);
  struct Ref {
    ExtremumKind kind;
    double alpha, length;
  };
  std::vector<Ref> ref{{ExtremumKind::Max, 0.12948166, 1.6007525},
                       {ExtremumKind::Min, 1.8749337, 0.4726192},
                       {ExtremumKind::Max, 3.8491349, 1.2914822},
                       {ExtremumKind::Min, 5.1329216, 1.0842469}};
  for (const auto& r : ref) {
    bool found = false;
    for (const auto& e : ex) {
      if (e.kind != r.kind || std::abs(e.alpha - r.alpha) > 1e-5) continue;
      found = true;
      CHECK(e.length() == doctest::Approx(r.length).epsilon(1e-6));
      CHECK(e.kkt_ok);
    }
    CHECK_MESSAGE(found, "missing extremum at alpha " << r.alpha);
  }
}

TEST_CASE("merge search finds the reference critical point") {
  auto s = load("third_order_family_unit", 6);
  MergeOptions mo;
  mo.trace.alpha_edge = 2;
  auto res = merge_search(s.cs, s.p0, 7, {0.3, 1.0}, mo);
  CHECK(res.certificate.kind == CertificateKind::ThirdOrder);
  CHECK(res.tuned_length == doctest::Approx(kMuStar).epsilon(1e-6));
  CHECK(res.critical_free_length == doctest::Approx(kLengthStar).epsilon(1e-6));
  CHECK(res.critical_alpha == doctest::Approx(kAlphaStar).epsilon(1e-5));
  CHECK(res.dimK == 1);
  CHECK(std::abs(res.second_order_value) < 1e-3);
  CHECK(std::abs(res.a3) > 1e-6);
  CHECK(res.certificate.free_stress_ratio > 1e-6);
  CHECK(res.certificate.licq);
  // cubic coefficient is stable under halving the window
  auto wide = cubic_fit(res.cs, res.critical_config, 0.2, 20);
  auto narrow = cubic_fit(res.cs, res.critical_config, 0.1, 20);
  CHECK(std::abs(narrow[2] - wide[2]) <= 0.2 * std::abs(wide[2]));
  CHECK(third_order_certificate(res.cs, res.critical_config).kind == CertificateKind::ThirdOrder);
}

TEST_CASE("bracket must straddle a merge") {
  auto s = load("third_order_family_unit", 6);
  MergeOptions mo;
  mo.trace.alpha_edge = 2;
  try {
    merge_search(s.cs, s.p0, 7, {0.7, 1.0}, mo);
    FAIL("expected BracketInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BracketInvalid);
  }
  CHECK_THROWS_AS(merge_search(s.cs, s.p0, 7, {-1.0, 0.3}, mo), Error);
}

TEST_CASE("certificate is inconclusive away from a critical point") {
  auto s = load("fourbar", 4);
  auto c = third_order_certificate(s.cs, s.p0);
  CHECK(c.kind == CertificateKind::Inconclusive);
  CHECK_FALSE(c.reason.empty());
  CHECK(c.licq);
  CHECK(c.dimK == 0);
}

TEST_CASE("ordinary minimum is not third order") {
  auto s = load("fourbar", 4);
  auto tr = trace_manifold(s.cs, s.p0);
  for (auto& e : find_extrema(tr)) {
    auto c = third_order_certificate(s.cs, e.p);
    CHECK(c.kind == CertificateKind::Inconclusive);
    CHECK(std::abs(c.d1) < 1e-6);
    CHECK(std::abs(c.d2) > 1e-3);
  }
}

TEST_CASE("trace samples stay on the manifold with regular spacing") {
  auto s = load("fourbar", 4);
  TraceOptions o;
  o.h = 0.02;
  auto tr = trace_manifold(s.cs, s.p0, o);
  REQUIRE(tr.closed);
  double worst = 0;
  for (const auto& smp : tr.samples) worst = std::max(worst, s.cs.fixed_residual(smp.p).cwiseAbs().maxCoeff());
  CHECK(worst <= o.feas_tol);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    double dt = tr.samples[i].t - tr.samples[i - 1].t;
    CHECK(dt >= 0.5 * o.h);
    CHECK(dt <= 1.5 * o.h);
  }
}

TEST_CASE("extrema do not move when the step doubles") {
  auto s = load("third_order_family_unit", 6);
  TraceOptions fine, coarse;
  fine.alpha_edge = coarse.alpha_edge = 2;
  fine.h = 0.01;
  coarse.h = 0.02;
  auto a = find_extrema(trace_manifold(s.cs, s.p0, fine));
  auto b = find_extrema(trace_manifold(s.cs, s.p0, coarse));
  REQUIRE(a.size() == b.size());
  for (const auto& e : a) {
    double best = 1e9;
    for (const auto& f : b)
      if (f.kind == e.kind) best = std::min(best, (f.p - e.p).norm());
    CHECK(best <= 2 * coarse.h);
  }
}

TEST_CASE("no extrema on a short monotone arc") {
  auto s = load("fourbar", 4);
  TraceOptions o;
  o.max_steps = 5;
  auto tr = trace_manifold(s.cs, s.p0, o);
  CHECK_FALSE(tr.closed);
  CHECK(tr.end == TraceEnd::MaxSteps);
  CHECK(find_extrema(tr).empty());
}

TEST_CASE("extrema of the reference family are prestress stable") {
  auto s = load("third_order_family_unit", 6);
  TraceOptions o;
  o.alpha_edge = 2;
  auto ex = find_extrema(trace_manifold(s.cs, s.p0, o));
  REQUIRE(ex.size() == 4);
  for (const auto& e : ex) {
    auto rep = analyze(Framework(2, e.p, s.cs.edges()));
    CHECK(rep.prestress.kind == PrestressKind::PrestressStable);
  }
}

TEST_CASE("printed minimum is not a third-order point") {
  auto s = load("third_order_family_minimum", 6);
  Vec p = project_from(s.cs, s.p0, s.p0);
  auto c = third_order_certificate(s.cs, p);
  CHECK(c.kind == CertificateKind::Inconclusive);
  CHECK(std::abs(c.d2) > 1e-3);
}

TEST_CASE("constant free edge along a flex") {
  // rigid body 0,1,4,5 (the free edge 0-1 is implied) hinged into a four-bar
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {1.2, 1}, {0.1, 1.1}, {0.5, -0.6}, {0.3, -0.3}},
                                   {{0, 1}, {0, 4}, {1, 4}, {0, 5}, {1, 5}, {4, 5}, {1, 2}, {2, 3}, {0, 3}});
  auto pins = PinningSpec::standard(2, {0, 1}).constraints();
  auto cs = build_system(fw, pins, std::nullopt, {0});
  auto c = third_order_certificate(cs, fw.coords());
  CHECK(c.kind == CertificateKind::Inconclusive);
  CHECK(c.licq);
  CHECK(std::abs(c.a3) < 1e-8);
  CHECK(std::abs(c.d1) < 1e-10);
  CHECK(std::abs(c.d2) < 1e-8);
}
