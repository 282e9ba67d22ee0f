#include "qmean/maintask.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qmean/instances.hpp"
#include "qmean/parallel.hpp"

namespace qmean {
namespace {

double success_rate(std::uint64_t seed, int trials,
                    const std::function<bool(int, Rng&, QueryLedger&)>& body) {
  auto results = run_trials<char>(
      seed, trials,
      [&](int t, Rng& rng, QueryLedger& ledger) -> char {
        return body(t, rng, ledger) ? 1 : 0;
      });
  int good = 0;
  for (char c : results) good += c;
  return static_cast<double>(good) / trials;
}

// 2/3 minus three binomial standard errors at 200 trials.
constexpr double kEmpiricalBar = 2.0 / 3.0 - 3.0 * 0.03333;

TEST(QpeRoute, GroverCaseTwoAtSixtyFour) {
  // One marked item out of 64, prescaled by 1/16: values {0, 8/16},
  // eps = (1/8)/16, promise case (ii) with |mu| = eps.
  RandVar rv = make_rand_var({63.0 / 64.0, 1.0 / 64.0}, {0.0, 0.5});
  double eps = 0.125 / 16.0;
  double rate = success_rate(101, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_qpe(rv, eps, rng, led).verdict == Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(QpeRoute, GroverNoMarkedItem) {
  RandVar rv = make_rand_var({1.0}, {0.0});
  double eps = 0.125 / 16.0;
  double rate = success_rate(102, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_qpe(rv, eps, rng, led).verdict == Verdict::kSmall;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(QpeRoute, FigAaScaledCaseTwo) {
  RandVar base = fig_aa();
  RandVar rv = scale(base, 1.0 / 16.0);
  double eps = rv.mean();  // |mu| = eps exactly
  double rate = success_rate(103, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_qpe(rv, eps, rng, led).verdict == Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(QpeRoute, ExactVerdictLawMeetsTwoThirds) {
  // The verdict probability is computed exactly inside the distinguisher;
  // the 2/3 guarantee can be checked deterministically on a grid.
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    for (int dim : {2, 7, 64}) {
      Rng gen(200 + dim);
      RandVar base = dim == 7 ? fig_aa() : random_instance(gen, dim, 0.5);
      if (std::abs(base.mean()) < 1e-6) base = shift(base, 0.05);
      RandVar big = with_mean(base, eps);
      if (big.second_moment_sqrt() > 1.0) continue;
      detail::QpeDistinguisher d_large(big, eps);
      EXPECT_LE(d_large.p_small(), 1.0 / 3.0)
          << "eps=" << eps << " dim=" << dim;
      RandVar small = with_mean(base, eps / 2.0);
      detail::QpeDistinguisher d_small(small, eps);
      EXPECT_GE(d_small.p_small(), 2.0 / 3.0)
          << "eps=" << eps << " dim=" << dim;
      RandVar centered = shift(base, -base.mean());
      detail::QpeDistinguisher d_zero(centered, eps);
      EXPECT_GE(d_zero.p_small(), 2.0 / 3.0);
    }
  }
}

TEST(QpeRoute, QueryCountScalesInverselyWithEps) {
  RandVar base = fig_aa();
  std::vector<double> logq, loge;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    RandVar rv = with_mean(base, eps);
    Rng rng(104);
    QueryLedger ledger;
    MainTaskVerdict v = main_task_qpe(rv, eps, rng, ledger);
    EXPECT_LE(static_cast<double>(v.queries_used),
              kQpeRouteQueryFactor / eps + 8.0);
    logq.push_back(std::log10(static_cast<double>(v.queries_used)));
    loge.push_back(std::log10(1.0 / eps));
  }
  double mx = (loge[0] + loge[1] + loge[2]) / 3.0;
  double my = (logq[0] + logq[1] + logq[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (loge[i] - mx) * (logq[i] - my);
    den += (loge[i] - mx) * (loge[i] - mx);
  }
  double slope = num / den;
  EXPECT_NEAR(slope, 1.0, 0.05);
}

TEST(QpeRoute, PreconditionViolations) {
  Rng rng(105);
  QueryLedger ledger;
  RandVar rv = heavy_tail();  // s ~ 3.1 > 1
  EXPECT_THROW(main_task_qpe(rv, 0.1, rng, ledger), std::invalid_argument);
  EXPECT_THROW(main_task_qpe(fig_aa(), 0.0, rng, ledger),
               std::invalid_argument);
  EXPECT_THROW(main_task_qpe(fig_aa(), 1.5, rng, ledger),
               std::invalid_argument);
}

RandVar elementary_case_two(double eps) {
  // Rescaled fig-aa with |mu| = eps and s = 1.611 eps <= 1/4000.
  return with_mean(fig_aa(), eps);
}

TEST(ElementaryRoute, ZeroMeanAcceptsSmall) {
  RandVar base = with_mean(fig_aa(), 1e-4);
  RandVar rv = shift(base, -base.mean());
  double rate = success_rate(106, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_elementary(rv, 1.5e-4, rng, led).verdict ==
           Verdict::kSmall;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ElementaryRoute, MeanEqualToEpsRejects) {
  double eps = 1.5e-4;
  RandVar rv = elementary_case_two(eps);
  ASSERT_LE(rv.second_moment_sqrt(), 1.0 / 4000.0);
  // cos(tau) <= -.46 on the case (ii) window, so acceptance <= .27 + .003.
  auto t = static_cast<std::uint64_t>(std::floor(kPi / (3.0 * eps)));
  PhasedGroverUnitary u(rv);
  double pp = hadamard_accept_probability(u, ket_one(rv.space_ptr()), t);
  EXPECT_LE(pp, 0.5 + 0.5 * (-0.46) + 0.003);
  double rate = success_rate(107, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_elementary(rv, eps, rng, led).verdict == Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ElementaryRoute, MeanTwiceEpsStillRejects) {
  double eps = 1e-4;
  RandVar rv = make_rand_var({0.5, 0.5}, {2e-4 + 1.2e-4, 2e-4 - 1.2e-4});
  ASSERT_LE(rv.second_moment_sqrt(), 1.0 / 4000.0);
  auto t = static_cast<std::uint64_t>(std::floor(kPi / (3.0 * eps)));
  PhasedGroverUnitary u(rv);
  double pp = hadamard_accept_probability(u, ket_one(rv.space_ptr()), t);
  EXPECT_LE(pp, 0.27 + 0.003);
  double rate = success_rate(108, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_elementary(rv, eps, rng, led).verdict == Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ElementaryRoute, QueryCeiling) {
  double eps = 2e-4;
  RandVar rv = make_rand_var({0.5, 0.5}, {3e-4, 1e-4});
  Rng rng(109);
  QueryLedger ledger;
  MainTaskVerdict v = main_task_elementary(rv, eps, rng, ledger);
  EXPECT_LE(static_cast<double>(v.queries_used),
            kElementaryRouteQueryFactor / eps);
  EXPECT_EQ(v.votes_total, kElementaryVotes);
}

RandVar two_point(double mu, double spread) {
  return make_rand_var({0.5, 0.5}, {mu + spread, mu - spread});
}

TEST(ElevenIntervals, TinyMeanComesUpAllHeads) {
  RandVar rv = two_point(0.0, 5e-4);
  double rate = success_rate(110, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_eleven_intervals(rv, 5e-4, rng, led).verdict ==
           Verdict::kSmall;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ElevenIntervals, MeanEqualToEpsTripsSomeCoin) {
  double eps = 5e-4;
  RandVar rv = two_point(eps, 5e-4);
  ASSERT_LE(rv.second_moment_sqrt(), 1e-3);
  double rate = success_rate(111, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_eleven_intervals(rv, eps, rng, led).verdict ==
           Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ElevenIntervals, QueryCeiling) {
  double eps = 5e-4;
  RandVar rv = two_point(0.0, 5e-4);
  Rng rng(112);
  QueryLedger ledger;
  MainTaskVerdict v = main_task_eleven_intervals(rv, eps, rng, ledger);
  EXPECT_LE(static_cast<double>(v.queries_used),
            kElevenRouteQueryFactor / eps);
}

TEST(ShiftedRoute, ExactTargetIsSmall) {
  RandVar rv = fig_aa();
  double mu = rv.mean();
  double rate = success_rate(113, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_shifted(rv, 0.05, mu, rng, led).verdict ==
           Verdict::kSmall;
  });
  EXPECT_GE(rate, kEmpiricalBar);
  Rng rng(120);
  QueryLedger led;
  MainTaskVerdict v = main_task_shifted(rv, 0.05, mu, rng, led);
  EXPECT_LE(static_cast<double>(v.queries_used),
            kShiftedRouteQueryFactor / 0.05 + 8.0);
}

TEST(ShiftedRoute, OffsetTargetInCaseTwoIsLarge) {
  RandVar rv = fig_aa();
  double eps = 0.04;
  double mu_hat = rv.mean() - 1.5 * eps;
  double rate = success_rate(114, 200, [&](int, Rng& rng, QueryLedger& led) {
    return main_task_shifted(rv, eps, mu_hat, rng, led).verdict ==
           Verdict::kLarge;
  });
  EXPECT_GE(rate, kEmpiricalBar);
}

TEST(ShiftedRoute, SecondMomentBookkeeping) {
  // (s')^2 <= 2 s^2 + 2 mu_hat^2 <= 4, so the halved variable has
  // second moment at most 1 for any mu_hat in [-1, 1].
  Rng rng(115);
  for (int rep = 0; rep < 20; ++rep) {
    RandVar rv = random_instance(rng, 1 + rng.below(32), rng.uniform01());
    double mu_hat = 2.0 * rng.uniform01() - 1.0;
    RandVar halved = detail::shifted_halved(rv, mu_hat);
    double s2 = rv.second_moment();
    ASSERT_LE(halved.second_moment(),
              (2.0 * s2 + 2.0 * mu_hat * mu_hat) / 4.0 + 1e-12);
    ASSERT_LE(halved.second_moment(), 1.0 + 1e-12);
  }
}

TEST(ShiftedRoute, RejectsTargetOutsideUnitInterval) {
  Rng rng(116);
  QueryLedger ledger;
  EXPECT_THROW(main_task_shifted(fig_aa(), 0.1, 1.5, rng, ledger),
               std::invalid_argument);
}

TEST(QpeRoute, FastAndSampledPathsShareTheVerdictLaw) {
  // The batched (exact-probability) path and the phase-sampling path must
  // draw from the same verdict distribution.
  RandVar rv = with_mean(fig_aa(), 0.02);
  detail::QpeDistinguisher dist(rv, 0.02);
  Rng rng(119);
  QueryLedger ledger;
  const int n = 4000;
  int fast_small = 0, sampled_small = 0;
  for (int i = 0; i < n; ++i) {
    if (dist.run_fast(rng, ledger) == Verdict::kSmall) ++fast_small;
    if (dist.run(rng, ledger, nullptr) == Verdict::kSmall) ++sampled_small;
  }
  double p = dist.p_small();
  double se = std::sqrt(p * (1.0 - p) / n);
  EXPECT_NEAR(fast_small / static_cast<double>(n), p, 4.0 * se + 1e-3);
  EXPECT_NEAR(sampled_small / static_cast<double>(n), p, 4.0 * se + 1e-3);
}

TEST(RoutesAgree, QpeAndElementaryOnACommonInstance) {
  double eps = 1.5e-4;
  RandVar large = elementary_case_two(eps);
  RandVar small = shift(large, -large.mean());
  for (bool case_two : {false, true}) {
    const RandVar& rv = case_two ? large : small;
    Verdict want = case_two ? Verdict::kLarge : Verdict::kSmall;
    double qpe = success_rate(117, 200, [&](int, Rng& rng, QueryLedger& led) {
      return main_task_qpe(rv, eps, rng, led).verdict == want;
    });
    double elem = success_rate(118, 200, [&](int, Rng& rng, QueryLedger& led) {
      return main_task_elementary(rv, eps, rng, led).verdict == want;
    });
    EXPECT_GE(qpe, kEmpiricalBar);
    EXPECT_GE(elem, kEmpiricalBar);
  }
}

}  // namespace
}  // namespace qmean
