#include "qmean/apps.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmean/parallel.hpp"

namespace qmean {
namespace {

constexpr double kBar200 = 2.0 / 3.0 - 3.0 * 0.03333;

double success_rate(std::uint64_t seed, int trials,
                    const std::function<bool(int, Rng&, QueryLedger&)>& body) {
  auto results = run_trials<char>(
      seed, trials, [&](int t, Rng& rng, QueryLedger& led) -> char {
        return body(t, rng, led) ? 1 : 0;
      });
  int good = 0;
  for (char c : results) good += c;
  return static_cast<double>(good) / trials;
}

TEST(ClassicalEstimate, ConstantNeedsOneDraw) {
  RandVar rv = make_rand_var({1.0}, {1.25});
  Rng rng(401);
  QueryLedger led;
  EXPECT_EQ(classical_estimate(rv, 1, rng, led), 1.25);
  EXPECT_EQ(led.count(), 1u);
}

TEST(ClassicalEstimate, FigAaChebyshevBand) {
  RandVar rv = fig_aa();
  double mu = rv.mean(), sigma = rv.stddev();
  double band = 10.0 * sigma / 100.0;  // 1e4 samples
  double rate = success_rate(402, 400, [&](int, Rng& rng, QueryLedger& led) {
    return std::abs(classical_estimate(rv, 10000, rng, led) - mu) <= band;
  });
  EXPECT_GE(rate, 0.97);
}

TEST(ClassicalEstimate, FairCoinBand) {
  RandVar rv = bernoulli_instance(0.5);
  double rate = success_rate(403, 200, [&](int, Rng& rng, QueryLedger& led) {
    double est = classical_estimate(rv, 400, rng, led);
    return std::abs(est - 0.5) <= 0.05;
  });
  EXPECT_GE(rate, 0.90);
}

TEST(DistPair, EqualDistributionsHaveZeroDistance) {
  DistPair pair({0.3, 0.7}, {0.3, 0.7});
  EXPECT_EQ(pair.hellinger_squared(), 0.0);
  auto y = hellinger_values(pair);
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(DistPair, DisjointSupportsSaturate) {
  DistPair pair({1.0, 0.0}, {0.0, 1.0});
  EXPECT_NEAR(pair.hellinger_squared(), 2.0, 1e-15);
  auto y = hellinger_values(pair);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], -1.0);
}

TEST(DistPair, SixtyFortyIdentities) {
  DistPair pair({0.6, 0.4}, {0.4, 0.6});
  double h2 = pair.hellinger_squared();
  EXPECT_NEAR(h2, 2.0 * (1.0 - 2.0 * std::sqrt(0.24)), 1e-15);
  auto y = hellinger_values(pair);
  double mu_q = weighted_sum(pair.q, y), mu_r = weighted_sum(pair.r, y);
  EXPECT_NEAR(mu_q - mu_r, h2, 1e-12);
  double sq2 = 0.0, sr2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sq2 += pair.q[i] * y[i] * y[i];
    sr2 += pair.r[i] * y[i] * y[i];
  }
  EXPECT_LE((sq2 - mu_q * mu_q) + (sr2 - mu_r * mu_r), h2 + 1e-12);
}

TEST(DistPair, RandomPairIdentities) {
  Rng rng(404);
  for (int rep = 0; rep < 40; ++rep) {
    std::size_t dim = 2 + rng.below(1023);
    std::vector<double> q(dim), r(dim);
    double sq = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      q[i] = rng.uniform01();
      r[i] = rng.uniform01();
      if (rng.below(8) == 0) q[i] = 0.0;  // exercise the 0/0 convention
      if (rng.below(8) == 0) r[i] = 0.0;
      sq += q[i];
      sr += r[i];
    }
    for (auto& w : q) w /= sq;
    for (auto& w : r) w /= sr;
    DistPair pair(q, r);
    auto y = hellinger_values(pair);
    double h2 = pair.hellinger_squared();
    double mu_q = weighted_sum(pair.q, y), mu_r = weighted_sum(pair.r, y);
    ASSERT_NEAR(mu_q - mu_r, h2, 1e-12);
    double eq2 = 0.0, er2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      eq2 += pair.q[i] * y[i] * y[i];
      er2 += pair.r[i] * y[i] * y[i];
    }
    ASSERT_LE((eq2 - mu_q * mu_q) + (er2 - mu_r * mu_r), h2 + 1e-12);
    // Half the squared distance is one minus the Bhattacharyya overlap.
    ASSERT_NEAR(0.5 * h2, 1.0 - pair.bhattacharyya(), 1e-12);
  }
}

TEST(DistPair, BhattacharyyaTensorizes) {
  Rng rng(405);
  for (int rep = 0; rep < 10; ++rep) {
    std::size_t dim = 2 + rng.below(31);
    std::vector<double> q(dim), r(dim);
    double sq = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      q[i] = 0.05 + rng.uniform01();
      r[i] = 0.05 + rng.uniform01();
      sq += q[i];
      sr += r[i];
    }
    for (auto& w : q) w /= sq;
    for (auto& w : r) w /= sr;
    DistPair pair(q, r);
    std::vector<double> qq(dim * dim), rr(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        qq[i * dim + j] = q[i] * q[j];
        rr[i * dim + j] = r[i] * r[j];
      }
    DistPair squared(qq, rr);
    ASSERT_NEAR(squared.bhattacharyya(),
                pair.bhattacharyya() * pair.bhattacharyya(), 1e-12);
  }
}

TEST(Distinguish, DisjointPairAlwaysCorrect) {
  DistPair pair({1.0, 0.0}, {0.0, 1.0});
  for (PairSide truth : {PairSide::kQ, PairSide::kR}) {
    double rate = success_rate(406, 50, [&](int, Rng& rng, QueryLedger& led) {
      return distinguish_distributions(pair, truth, rng, led) == truth;
    });
    EXPECT_EQ(rate, 1.0);
  }
}

DistPair coin_pair(double h_target) {
  // Two-outcome pair (1/2 + d, 1/2 - d) vs mirrored; solves for d so the
  // Hellinger distance hits the target.
  double c = 1.0 - h_target * h_target / 2.0;  // BC = 2 sqrt(1/4 - d^2)
  double d = std::sqrt(0.25 - c * c / 4.0);
  return DistPair({0.5 + d, 0.5 - d}, {0.5 - d, 0.5 + d});
}

TEST(Distinguish, TenthDistancePair) {
  DistPair pair = coin_pair(0.1);
  ASSERT_NEAR(pair.hellinger(), 0.1, 1e-12);
  double rate = success_rate(407, 200, [&](int t, Rng& rng, QueryLedger& led) {
    PairSide truth = t % 2 == 0 ? PairSide::kQ : PairSide::kR;
    return distinguish_distributions(pair, truth, rng, led) == truth;
  });
  EXPECT_GE(rate, kBar200);
}

TEST(Distinguish, ClassicalNeedsQuadraticallyMoreSamples) {
  DistPair pair = coin_pair(0.1);
  Rng rng(408);
  QueryLedger q_led, c_led;
  distinguish_distributions(pair, PairSide::kQ, rng, q_led);
  distinguish_distributions_classical(pair, PairSide::kQ, rng, c_led);
  // 16/H^2 * 9 draws classically vs O(1/H) quantum ledger scale factor.
  EXPECT_GE(c_led.count(), 9u * 1600u);
}

TEST(Distinguish, QueryScalingAcrossDistances) {
  // Quantum queries grow like 1/H, classical like 1/H^2.
  std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> logh, logq, logc;
  for (double h : hs) {
    DistPair pair = coin_pair(h);
    std::vector<std::uint64_t> qq, cc;
    for (int t = 0; t < 15; ++t) {
      Rng rng(409, static_cast<std::uint64_t>(t));
      QueryLedger q_led, c_led;
      distinguish_distributions(pair, PairSide::kQ, rng, q_led);
      distinguish_distributions_classical(pair, PairSide::kQ, rng, c_led);
      qq.push_back(q_led.count());
      cc.push_back(c_led.count());
    }
    std::nth_element(qq.begin(), qq.begin() + 7, qq.end());
    std::nth_element(cc.begin(), cc.begin() + 7, cc.end());
    logh.push_back(std::log10(1.0 / h));
    logq.push_back(std::log10(static_cast<double>(qq[7])));
    logc.push_back(std::log10(static_cast<double>(cc[7])));
  }
  auto slope = [&](const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < logh.size(); ++i) {
      mx += logh[i];
      my += ys[i];
    }
    mx /= logh.size();
    my /= ys.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < logh.size(); ++i) {
      num += (logh[i] - mx) * (ys[i] - my);
      den += (logh[i] - mx) * (logh[i] - mx);
    }
    return num / den;
  };
  EXPECT_NEAR(slope(logq), 1.0, 0.1);
  EXPECT_NEAR(slope(logc), 2.0, 0.2);
}

TEST(Distinguish, RejectsEqualDistributions) {
  DistPair pair({0.5, 0.5}, {0.5, 0.5});
  Rng rng(410);
  QueryLedger led;
  EXPECT_THROW(distinguish_distributions(pair, PairSide::kQ, rng, led),
               std::invalid_argument);
}

TEST(Grover, MarkedInstanceHasUnitSecondMoment) {
  RandVar rv = grover_instance(1024, true);
  EXPECT_NEAR(rv.second_moment(), 1.0, 1e-12);
  EXPECT_NEAR(rv.mean(), 1.0 / 32.0, 1e-12);
}

TEST(Grover, DistinguishesMarkedFromUnmarked) {
  double marked_rate =
      success_rate(411, 200, [&](int, Rng& rng, QueryLedger& led) {
        return grover_demo(1024, true, rng, led) == GroverVerdict::kOne;
      });
  EXPECT_GE(marked_rate, kBar200);
  double empty_rate =
      success_rate(412, 200, [&](int, Rng& rng, QueryLedger& led) {
        return grover_demo(1024, false, rng, led) == GroverVerdict::kZero;
      });
  EXPECT_GE(empty_rate, kBar200);
}

TEST(Grover, QueryBudgetScalesWithRootN) {
  Rng rng(413);
  QueryLedger led;
  grover_demo(1024, true, rng, led);
  EXPECT_LE(static_cast<double>(led.count()),
            kQpeRouteQueryFactor * std::sqrt(1024.0) + 8.0);
}

TEST(BernoulliSeparation, QuantumRootNClassicalLinear) {
  std::vector<double> logn, logq, logc;
  for (std::uint64_t big_n : {64ull, 256ull, 1024ull}) {
    std::vector<std::uint64_t> qq, cc;
    for (int t = 0; t < 9; ++t) {
      Rng rng(414, static_cast<std::uint64_t>(t));
      QueryLedger q_led, c_led;
      quantum_bernoulli_is_nonzero(big_n, t % 2 == 0, rng, q_led);
      classical_bernoulli_is_nonzero(big_n, t % 2 == 0, rng, c_led);
      qq.push_back(q_led.count());
      cc.push_back(c_led.count());
    }
    std::nth_element(qq.begin(), qq.begin() + 4, qq.end());
    std::nth_element(cc.begin(), cc.begin() + 4, cc.end());
    logn.push_back(std::log10(static_cast<double>(big_n)));
    logq.push_back(std::log10(static_cast<double>(qq[4])));
    logc.push_back(std::log10(static_cast<double>(cc[4])));
  }
  auto slope = [&](const std::vector<double>& ys) {
    double mx = (logn[0] + logn[1] + logn[2]) / 3.0;
    double my = (ys[0] + ys[1] + ys[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
      num += (logn[i] - mx) * (ys[i] - my);
      den += (logn[i] - mx) * (logn[i] - mx);
    }
    return num / den;
  };
  EXPECT_NEAR(slope(logq), 0.5, 0.1);
  EXPECT_NEAR(slope(logc), 1.0, 0.1);
}

TEST(BernoulliSeparation, VerdictsAreCorrect) {
  double rate = success_rate(415, 200, [&](int t, Rng& rng, QueryLedger& led) {
    bool truth = t % 2 == 0;
    return quantum_bernoulli_is_nonzero(256, truth, rng, led) == truth;
  });
  EXPECT_GE(rate, kBar200);
}

}  // namespace
}  // namespace qmean
