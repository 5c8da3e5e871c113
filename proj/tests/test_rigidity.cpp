#include "doctest.h"

#include <random>

#include "barframe/error.hpp"
#include "barframe/rigidity.hpp"
#include "support.hpp"

using namespace barframe;

TEST_CASE("triangle is isostatic and rigid") {
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {0.3, 0.8}}, {{0, 1}, {1, 2}, {0, 2}});
  auto r = analyze(fw);
  CHECK(r.rank_R == 3);
  CHECK(r.trivial_dim == 3);
  CHECK(r.num_flexes() == 0);
  CHECK(r.num_stresses() == 0);
  CHECK(r.classification == Classification::Isostatic);
  CHECK(r.first_order_rigid);
  CHECK(r.prestress.kind == PrestressKind::FirstOrderRigid);
  CHECK(r.ledger_defect() == 0);
}

TEST_CASE("square has one flex, braced square one stress") {
  auto sq = Framework::from_points(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  auto r = analyze(sq);
  CHECK(r.num_flexes() == 1);
  CHECK(r.num_stresses() == 0);
  CHECK(r.classification == Classification::UnderConstrained);
  CHECK_FALSE(r.first_order_rigid);
  CHECK(r.prestress.kind == PrestressKind::NotCertified);

  auto braced = Framework::from_points(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                       {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}, {1, 3}});
  auto b = analyze(braced);
  CHECK(b.num_flexes() == 0);
  REQUIRE(b.num_stresses() == 1);
  CHECK(b.classification == Classification::OverConstrained);
  // sides and diagonals carry opposite signs
  Vec w = b.self_stresses.col(0);
  CHECK(w(0) * w(4) < 0);
  CHECK(w(0) * w(1) > 0);
  CHECK(b.ledger_defect() == 0);
}

TEST_CASE("collinear bar with midpoint vertex is prestress stable") {
  // two bars along a line: the midpoint can move sideways to first order
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}, {0, 2}});
  auto r = analyze(fw);
  CHECK(r.num_flexes() == 1);
  CHECK(r.num_stresses() == 1);
  CHECK_FALSE(r.first_order_rigid);
  CHECK(r.prestress.kind == PrestressKind::PrestressStable);
  Vec v = r.nontrivial_flexes.col(0);
  Vec w = r.self_stresses.col(0);
  CHECK(std::abs(second_order_stress_test(fw, w, v)) > 1e-3);
}

TEST_CASE("trivial flexes lie in the kernel of R") {
  std::mt19937_64 rng(3);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto fw = testsupport::random_framework(7, d, 12, rng);
      Mat R = rigidity_matrix(fw);
      Mat T = trivial_flex_generators(fw);
      CHECK(T.cols() == d * (d + 1) / 2);
      CHECK((R * T).cwiseAbs().maxCoeff() < 1e-10);
      Mat B = trivial_flex_basis(fw);
      CHECK(B.cols() == d * (d + 1) / 2);
      CHECK((B.transpose() * B - Mat::Identity(B.cols(), B.cols())).norm() < 1e-12);
    }
  }
}

TEST_CASE("degenerate span is reported") {
  auto fw = Framework::from_points(3, {{0, 0, 0}, {1, 0, 0}, {2.5, 0, 0}}, {{0, 1}, {1, 2}, {0, 2}});
  auto r = analyze(fw);
  CHECK(r.degenerate_span);
  CHECK(r.trivial_dim == 5);
  CHECK(r.ledger_defect() == 0);
  AnalyzeOptions o;
  o.pins = {pin_constraint(0, 0)};
  CHECK_THROWS_AS(analyze(fw, o), Error);
}

TEST_CASE("ledger holds on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + trial % 2;
    int n = 4 + trial % 5;
    int m = std::min(n * (n - 1) / 2, 2 * n + trial % 4);
    auto fw = testsupport::random_framework(n, d, m, rng);
    auto r = analyze(fw);
    CHECK(r.ledger_defect() == 0);
  }
}

TEST_CASE("optimized hexagon summary") {
  auto doc = testsupport::load_fixture("hexagon_diagonals_optimized");
  AnalyzeOptions o;
  o.rank_tol = 1e-4;
  auto r = analyze(to_framework(doc), o);
  CHECK(r.num_stresses() == 1);
  CHECK(r.num_flexes() == 1);
  CHECK(r.prestress.kind == PrestressKind::PrestressStable);
  CHECK(r.summary() == "isostatic, flexes=1, stresses=1, prestress-stable");
}

TEST_CASE("second order stress test normalizes its inputs") {
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}, {0, 2}});
  Vec w(3);
  w << 1, 1, -0.5;
  Vec v = Vec::Zero(6);
  v(3) = 1;
  double a = second_order_stress_test(fw, w, v);
  double b = second_order_stress_test(fw, 10 * w, 3 * v);
  CHECK(a == doctest::Approx(b));
}

TEST_CASE("rigidity matrix of one edge") {
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}}, {{0, 1}});
  Mat R = rigidity_matrix(fw);
  Mat expect(1, 4);
  expect << -2, 0, 2, 0;
  CHECK(R == expect);
  auto tri = Framework::from_points(2, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(linalg::rank(rigidity_matrix(tri)) == 3);
}

TEST_CASE("printed optimal hexagon has rank 8") {
  auto fw = to_framework(testsupport::load_fixture("hexagon_diagonals_optimized"));
  CHECK(linalg::rank(rigidity_matrix(fw), 1e-4) == 8);
  CHECK(trivial_flex_basis(fw).cols() == 3);
}

TEST_CASE("printed two-triangle optimum carries the figure's stress signs") {
  auto doc = testsupport::load_fixture("two_triangles_optimized");
  AnalyzeOptions o;
  o.rank_tol = 1e-4;
  auto r = analyze(to_framework(doc), o);
  REQUIRE(r.prestress.kind == PrestressKind::PrestressStable);
  std::string s;
  for (int k = 0; k < 9; ++k) s += r.prestress.stress(k) > 0 ? '+' : '-';
  CHECK(s == "-++-++--+");
}

TEST_CASE("flexes are orthogonal to trivial motions") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    int d = 2 + trial % 2;
    auto fw = testsupport::random_framework(7, d, d == 2 ? 9 : 13, rng);
    auto r = analyze(fw);
    Mat T = trivial_flex_basis(fw);
    if (r.num_flexes() > 0) CHECK((T.transpose() * r.nontrivial_flexes).cwiseAbs().maxCoeff() <= 1e-10);
    Mat R = rigidity_matrix(fw);
    if (r.num_flexes() > 0) CHECK((R * r.nontrivial_flexes).norm() <= 1e-9 * R.norm());
    if (r.num_stresses() > 0) CHECK((r.self_stresses.transpose() * R).norm() <= 1e-9 * R.norm());
  }
}

TEST_CASE("prestress verdict is invariant under rescaling") {
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}, {0, 2}});
  auto r = analyze(fw);
  auto a = prestress_test(fw, r.nontrivial_flexes, r.self_stresses);
  auto b = prestress_test(fw, -r.nontrivial_flexes, 4.0 * r.self_stresses);
  auto c = prestress_test(fw, r.nontrivial_flexes, -r.self_stresses);
  CHECK(a.kind == PrestressKind::PrestressStable);
  CHECK(b.kind == a.kind);
  CHECK(c.kind == a.kind);
  CHECK(a.min_eig > 0);
  CHECK(b.min_eig > 0);
  CHECK(c.min_eig > 0);
  CHECK(prestress_test(fw, Mat(6, 0), r.self_stresses).kind == PrestressKind::FirstOrderRigid);
}

TEST_CASE("second order stress test examples") {
  auto fw = Framework::from_points(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}, {0, 2}});
  Vec w(3);
  w << 1, 1, -0.5;
  Vec trans(6);
  trans << 1, 0, 1, 0, 1, 0;
  CHECK(second_order_stress_test(fw, w, trans) == 0.0);

  // near the merged critical point of the two-triangle family the value is small
  auto crit = testsupport::load_fixture("third_order_family_critical");
  AnalyzeOptions o;
  o.rank_tol = 1e-4;
  auto rc = analyze(to_framework(crit), o);
  REQUIRE(rc.num_stresses() == 1);
  REQUIRE(rc.num_flexes() == 1);
  double v = second_order_stress_test(to_framework(crit), rc.self_stresses.col(0), rc.nontrivial_flexes.col(0));
  CHECK(std::abs(v) < 1e-3);

  auto opt = testsupport::load_fixture("hexagon_diagonals_optimized");
  auto ro = analyze(to_framework(opt), o);
  REQUIRE(ro.prestress.kind == PrestressKind::PrestressStable);
  double s = second_order_stress_test(to_framework(opt), ro.prestress.stress, ro.nontrivial_flexes.col(0));
  CHECK(s > 1e-3);
}
