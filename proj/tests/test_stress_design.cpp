#include "doctest.h"

#include "barframe/error.hpp"
#include "barframe/rigidity.hpp"
#include "barframe/stress_design.hpp"
#include "support.hpp"

using namespace barframe;

namespace {

std::vector<StressTarget> targets_of(const FrameworkDocument& doc) {
  std::vector<StressTarget> out;
  for (auto& t : doc.metadata.at("targets")) out.push_back({t[0].get<int>(), t[1].get<double>()});
  return out;
}

}  // namespace

TEST_CASE("stacked squares realize the prescribed stresses") {
  auto doc = testsupport::load_fixture("stacked_squares");
  StressDesignProblem prob;
  prob.framework = to_framework(doc);
  prob.targets = targets_of(doc);
  prob.pinning = *document_pinning(doc);
  auto res = solve_stress_design(prob);
  REQUIRE(res.converged());
  auto chk = designed_stress_check(res, prob.targets);
  CHECK(chk.max_rel_deviation <= 1e-4);
  CHECK(chk.num_stresses >= 1);
}

TEST_CASE("stress design input validation") {
  auto doc = testsupport::load_fixture("stacked_squares");
  StressDesignProblem prob;
  prob.framework = to_framework(doc);
  prob.pinning = *document_pinning(doc);
  CHECK_THROWS_AS(stress_design_problem(prob), Error);
  prob.targets = {{1, 1.0}, {1, 2.0}};
  CHECK_THROWS_AS(stress_design_problem(prob), Error);
  prob.targets = {{99, 1.0}};
  CHECK_THROWS_AS(stress_design_problem(prob), Error);
  prob.targets = {{3, 2.0}, {1, 1.0}};
  auto op = stress_design_problem(prob);
  CHECK(op.cs.free() == std::vector<int>{1, 3});
  CHECK(op.weights == std::vector<double>{1.0, 2.0});
}

TEST_CASE("force density places a hub at the weighted average") {
  // hub vertex 3 tied to three fixed vertices
  auto fw = Framework::from_points(2, {{0, 0}, {4, 0}, {1, 3}, {5, 5}}, {{0, 3}, {1, 3}, {2, 3}});
  Vec w(3);
  w << 1, 2, 3;
  auto r = force_density_solve(fw, w, std::vector<int>{0, 1, 2});
  CHECK(r.minimizer);
  CHECK(r.residual < 1e-12);
  CHECK(r.p(6) == doctest::Approx((0 * 1 + 4 * 2 + 1 * 3) / 6.0));
  CHECK(r.p(7) == doctest::Approx((0 * 1 + 0 * 2 + 3 * 3) / 6.0));
  CHECK(r.p.head(6) == fw.coords().head(6));

  w << 1, -3, 1;
  auto s = force_density_solve(fw, w, std::vector<int>{0, 1, 2});
  CHECK_FALSE(s.minimizer);
  CHECK(s.residual < 1e-10);
}

TEST_CASE("force density with a singular Laplacian") {
  auto fw = Framework::from_points(2, {{0, 0}, {4, 0}, {1, 3}, {5, 5}}, {{0, 3}, {1, 3}, {2, 3}});
  Vec w(3);
  w << 1, -2, 1;
  try {
    force_density_solve(fw, w, std::vector<int>{0, 1, 2});
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
  CHECK_THROWS_AS(force_density_solve(fw, Vec::Ones(2), std::vector<int>{0}), Error);
}

TEST_CASE("one designed edge reduces to edge minimization") {
  auto doc = testsupport::load_fixture("fourbar");
  StressDesignProblem sp;
  sp.framework = to_framework(doc);
  sp.targets = {{4, 1.0}};
  sp.pinning = *document_pinning(doc);
  auto a = solve_stress_design(sp);

  OptimizationProblem op;
  op.cs = to_system(doc, {4});
  op.p0 = sp.framework.coords();
  op.direction = Direction::Minimize;
  auto b = solve(op);
  CHECK(a.iters == b.iters);
  CHECK(a.p_star == b.p_star);
}

TEST_CASE("symmetric design gives equal stresses") {
  // vertex 3 hangs from vertex 2 and is pulled toward vertices 0 and 1
  auto fw = Framework::from_points(2, {{-1, 0}, {1, 0}, {0, 1}, {0.3, 1.4}},
                                   {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}});
  auto pf = make_pinning(fw, std::vector<int>{0, 1});
  StressDesignProblem sp;
  sp.framework = pf.framework;
  sp.pinning = pf.spec;
  sp.targets = {{3, 1.0}, {4, 1.0}};
  auto res = solve_stress_design(sp);
  REQUIRE(res.converged());
  auto chk = designed_stress_check(res, sp.targets);
  CHECK(std::abs(chk.stress(3) - chk.stress(4)) <= 1e-6 * std::abs(chk.stress(3)));
  Framework out(2, res.p_star, fw.edges());
  // vertex 3 ends on the mirror line
  CHECK(std::abs(edge_length_sq(out, 3) - edge_length_sq(out, 4)) <= 1e-8);

  // KKT extended to the designed edges
  Mat J = res.cs.jacobian(res.p_star);
  CHECK((J.transpose() * res.lambda).norm() <= 1e-6);
  CHECK(res.lambda(3) == 1.0);
  CHECK(res.lambda(4) == 1.0);
}

TEST_CASE("certified stress design is prestress stable") {
  auto doc = testsupport::load_fixture("stacked_squares");
  StressDesignProblem prob;
  prob.framework = to_framework(doc);
  prob.targets = targets_of(doc);
  prob.pinning = *document_pinning(doc);
  auto res = solve_stress_design(prob);
  REQUIRE(res.converged());
  if (res.second_order.certified()) {
    auto rep = analyze(Framework(2, res.p_star, res.cs.edges()));
    CHECK(rep.prestress.kind != PrestressKind::NotCertified);
  }
}

TEST_CASE("force density examples") {
  auto path = Framework::from_points(2, {{0, 0}, {7, 3}, {2, 0}}, {{0, 1}, {1, 2}});
  auto r = force_density_solve(path, Vec::Ones(2), std::vector<int>{0, 2});
  CHECK(r.p(2) == doctest::Approx(1.0));
  CHECK(r.p(3) == doctest::Approx(0.0).epsilon(1e-14));

  // unit square with crossed diagonals, three corners fixed
  auto sq = Framework::from_points(2, {{0, 0}, {1, 0}, {1, 1}, {0.3, 0.8}},
                                   {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}, {1, 3}});
  Vec w(6);
  w << 1, 1, 1, 1, -0.5, -0.5;
  auto s = force_density_solve(sq, w, std::vector<int>{0, 1, 2});
  CHECK(s.residual <= 1e-10);

  // with diagonals at -1 the solution is the square and w a self-stress of it
  w << 1, 1, 1, 1, -1, -1;
  auto t = force_density_solve(sq, w, std::vector<int>{0, 1, 2});
  CHECK(t.p(6) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(t.p(7) == doctest::Approx(1.0));
  auto rep = analyze(sq.with_coords(t.p));
  REQUIRE(rep.num_stresses() == 1);
  Vec proj = rep.self_stresses * (rep.self_stresses.transpose() * w);
  CHECK((proj - w).norm() <= 1e-8 * w.norm());

  try {
    force_density_solve(path, Vec::Zero(2), std::vector<int>{0, 2});
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
}
