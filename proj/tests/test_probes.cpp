#include "pflutter/probes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace pflutter;
using testsupport::Gen;

TEST(Probes, LipschitzFitOnExponential) {
  PairSeries s;
  for (int k = 0; k <= 50; ++k) {
    s.t.push_back(0.1 * k);
    s.Ez.push_back(2.0 * std::exp(0.3 * 0.1 * k) * (1 + 0.05 * std::sin(k)));
  }
  const LipschitzFit f = fit_lipschitz(s);
  EXPECT_NEAR(f.a, 0.3, 0.02);
  EXPECT_LE(lipschitz_ratio(f, s), 1.0 + 1e-12);
  // decaying data clips the rate at zero
  PairSeries d = s;
  for (size_t k = 0; k < d.Ez.size(); ++k) d.Ez[k] = std::exp(-d.t[k]);
  EXPECT_EQ(fit_lipschitz(d).a, 0.0);
}

// vertex enumeration versus a dense grid search of the same LP
TEST(Probes, QuasiFitMatchesGridSearch) {
  Gen gen(1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<QuasiWindow> w;
    for (int i = 0; i < 6; ++i) {
      QuasiWindow q;
      q.A = gen.uniform(0.5, 2.0);
      q.S = gen.uniform(0.01, 0.5);
      q.lhs = gen.uniform(0.1, 0.6) * q.A + gen.uniform(0.0, 2.0) * q.S;
      w.push_back(q);
    }
    const QuasiFit f = fit_quasi(w);
    EXPECT_LE(quasi_ratio(f, w), 1.0 + 1e-9);
    auto cost = [&](double b, double c) {
      double s = 0;
      for (const auto& q : w) s += b * q.A + c * q.S;
      return s;
    };
    double best = 1e300;
    for (int i = 0; i <= 400; ++i)
      for (int j = 0; j <= 400; ++j) {
        const double b = 2.0 * i / 400, c = 20.0 * j / 400;
        bool ok = true;
        for (const auto& q : w) ok = ok && q.lhs <= b * q.A + c * q.S + 1e-12;
        if (ok) best = std::min(best, cost(b, c));
      }
    EXPECT_LE(cost(f.beta, f.Cq), best * (1 + 1e-9));
    EXPECT_GE(cost(f.beta, f.Cq), best * (1 - 0.02));
  }
}

TEST(Probes, LyapunovFitRecoversRate) {
  const double d = 0.4, C = 0.2, V0 = 5.0;
  std::vector<double> t, V;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(0.05 * k);
    V.push_back(V0 * std::exp(-d * t.back()) + C / d * (1 - std::exp(-d * t.back())));
  }
  const LyapunovFit f = fit_lyapunov(t, V);
  ASSERT_TRUE(f.found);
  EXPECT_GT(f.delta, 0.0);
  EXPECT_LE(lyapunov_ratio(f, t, V), 1.0 + 1e-9);
  EXPECT_NEAR(f.delta, d, 0.1 * d);
}

TEST(Probes, ReportConstantLookup) {
  ProbeReport r;
  r.constants = {{"C", 2.0}, {"a", 0.1}};
  EXPECT_EQ(r.constant("a"), 0.1);
  EXPECT_THROW(r.constant("zz"), std::out_of_range);
}

TEST(Probes, QuasiWindowsStartEveryHalfTstar) {
  PairSeries s;
  s.t_star = 1.0;
  for (int k = 0; k <= 100; ++k) {
    s.t.push_back(0.05 * k);
    s.Ez.push_back(1.0);
    s.h2sq.push_back(1.0);
    s.low.push_back(0.1);
  }
  const auto w = quasi_windows(s, 2.0);
  ASSERT_FALSE(w.empty());
  for (size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i].t0, 0.5 * i, 1e-12);
  EXPECT_LE(w.back().t0 + 2.0, 5.0 + 1e-12);
}
