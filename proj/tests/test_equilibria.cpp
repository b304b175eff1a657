#include "pflutter/equilibria.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace pflutter;
using testsupport::Gen;
using testsupport::max_abs;
using testsupport::SmoothClamped;

namespace {

PhysParams base(const GridSpec& g, double U = 0.0) {
  PhysParams p;
  p.U = U;
  p.loads = LoadSet::zero(g);
  return p;
}

}  // namespace

TEST(Equilibria, JacobianMatchesFiniteDifference) {
  Gen gen(1);
  const GridSpec g = GridSpec::make(1, 1, 13, 13);
  PhysParams p = base(g, 0.5);
  p.loads = LoadSet::radial_beta(g, 5.0);
  const StationaryProblem prob(g, p, {16, 32});
  const PlateField u = 0.3 * SmoothClamped(gen).sample(g), h = SmoothClamped(gen).sample(g);
  const double eps = 1e-6;
  const PlateField fd = (prob.residual(u + eps * h) - prob.residual(u - eps * h)) / (2 * eps);
  const PlateField j = prob.jacobian_apply(u, airy_solve(u, g).v, h);
  EXPECT_LT((j - fd).norm(), 1e-6 * fd.norm());
}

TEST(Equilibria, NewtonSolvesLoadedPlate) {
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  for (double U : {0.0, 0.5}) {
    PhysParams p = base(g, U);
    p.loads.p0 = 200.0 * clamped_bump(g);
    const EquilibriumResult r = newton_solve(zeros(g), p, g, {16, 32});
    ASSERT_TRUE(r.converged) << r.message;
    EXPECT_TRUE(is_clamped(r.u_bar, g));
    // residual recomputed through the free function
    const double res = norm_l2(stationary_residual(r.u_bar, p, g, {16, 32}), g) / (1 + norm_l2(p.loads.p0, g));
    EXPECT_LE(res, std::max(1e-10, r.residual_norm * 1.01));
    EXPECT_GT(seminorm_h2(r.u_bar, g), 0.0);
  }
}

// at U = 0 an equilibrium is a critical point of 1/2||lap u||^2 + Pi_d; the
// discrete bracket is trilinear-symmetric only to O(h^2), so the directional
// derivative vanishes at that rate
TEST(Equilibria, VariationalAtZeroSpeed) {
  Gen gen(2);
  const SmoothClamped H(gen);
  double prev = 0.0;
  for (int n : {17, 33, 65}) {
    const GridSpec g = GridSpec::make(1, 1, n, n);
    PhysParams p = base(g);
    p.loads = LoadSet::radial_beta(g, 10.0);
    p.loads.p0 = 100.0 * clamped_bump(g);
    const EquilibriumResult r = newton_solve(zeros(g), p, g, {16, 32});
    ASSERT_TRUE(r.converged);
    const VonKarman vk(g, p.loads);
    auto energy = [&](const PlateField& w) { return 0.5 * std::pow(seminorm_h2(w, g), 2) + vk.potential_energy(w); };
    const PlateField h = H.sample(g);
    const double eps = 1e-4;
    const double d = (energy(r.u_bar + eps * h) - energy(r.u_bar - eps * h)) / (2 * eps);
    const double rel = std::abs(d) / (seminorm_h2(r.u_bar, g) * seminorm_h2(h, g));
    if (prev > 0.0) EXPECT_GE(prev / rel, 3.0) << n;
    prev = rel;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Equilibria, BucklingMatchesDenseEigen) {
  const GridSpec g = GridSpec::make(1, 1, 11, 11);
  const Eigen::MatrixXd K = testsupport::dense_biharmonic(g);
  const Eigen::MatrixXd L = -Eigen::MatrixXd(laplacian_matrix(g));
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, L);
  const double lam = es.eigenvalues().minCoeff();
  const BucklingResult b = buckling_critical_load(g);
  EXPECT_NEAR(b.lambda1, lam, 1e-9 * lam);
  EXPECT_DOUBLE_EQ(b.beta0, b.lambda1 / 2);
  EXPECT_TRUE(is_clamped(b.mode, g));
}

TEST(Equilibria, PitchforkAboveCriticalLoad) {
  const GridSpec g = GridSpec::make(1, 1, 13, 13);
  const QuadratureSpec q{16, 32};
  const double beta0 = buckling_critical_load(g).beta0;
  EXPECT_FALSE(nontrivial_branch_exists(0.8 * beta0, g, q));
  EXPECT_TRUE(nontrivial_branch_exists(1.2 * beta0, g, q));

  PhysParams p = base(g);
  p.loads = LoadSet::radial_beta(g, 1.5 * beta0);
  const StationaryProblem prob(g, p, q);
  NewtonOptions opt;
  opt.deflate_zero = true;
  const EquilibriumResult plus = prob.newton(0.1 * clamped_bump(g), opt);
  const EquilibriumResult minus = prob.newton(-0.1 * clamped_bump(g), opt);
  ASSERT_TRUE(plus.converged && minus.converged);
  EXPECT_GT(seminorm_h2(plus.u_bar, g), 1e-3);
  EXPECT_LT(seminorm_h2(plus.u_bar + minus.u_bar, g), 1e-10 * seminorm_h2(plus.u_bar, g));
  // zero is still an equilibrium and now unstable
  EXPECT_LT(prob.leftmost_eig(zeros(g)).value, 0.0);
  EXPECT_GT(prob.leftmost_eig(plus.u_bar).value, 0.0);
}

TEST(Equilibria, ContinuationOrderedAndSplits) {
  const GridSpec g = GridSpec::make(1, 1, 11, 11);
  const double beta0 = buckling_critical_load(g).beta0;
  const auto pts = continuation_sweep(SweepFamily::Beta, 0.0, 1.6 * beta0, 16, base(g), g, {8, 16});
  double last = -1.0;
  bool split = false;
  for (const auto& bp : pts) {
    if (bp.branch == 0) {
      EXPECT_GT(bp.param, last);
      last = bp.param;
      EXPECT_LT(bp.norm_u2, 1e-8);
    } else {
      split = true;
      EXPECT_GT(bp.param, 0.95 * beta0);
      EXPECT_GT(bp.norm_u2, 0.0);
    }
  }
  EXPECT_TRUE(split);
  EXPECT_THROW(continuation_sweep(SweepFamily::U, 0.0, 1.0, 4, base(g), g, {8, 16}), std::invalid_argument);
}

TEST(Equilibria, RejectsUnclampedGuess) {
  const GridSpec g = GridSpec::make(1, 1, 9, 9);
  PlateField u = zeros(g);
  u[0] = 1.0;
  EXPECT_THROW(newton_solve(u, base(g), g, {8, 16}), GridError);
}

TEST(Equilibria, ContinuationHasOnePointPerBranchAndParam) {
  const GridSpec g = GridSpec::make(1, 1, 11, 11);
  const double beta0 = buckling_critical_load(g).beta0;
  PhysParams p;
  p.loads = LoadSet::zero(g);
  const auto pts = continuation_sweep(SweepFamily::Beta, 0.0, 1.6 * beta0, 16, p, g, {8, 16});
  std::set<std::pair<double, int>> seen;
  for (const auto& bp : pts) EXPECT_TRUE(seen.insert({bp.param, bp.branch}).second) << bp.param << " " << bp.branch;
}
