#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "kl_oracle.hpp"
#include "rtlpsc/metrics.hpp"

using namespace rtlpsc;
using namespace rtlpsc::metrics;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

TEST(FitGaussian, Examples) {
    const auto a = fit_gaussian(std::vector<int>{4, 4, 4, 4});
    EXPECT_DOUBLE_EQ(a.mu, 4.0);
    EXPECT_DOUBLE_EQ(a.sigma2, kVarianceFloor);
    const auto b = fit_gaussian(std::vector<int>{0, 2});
    EXPECT_DOUBLE_EQ(b.mu, 1.0);
    EXPECT_DOUBLE_EQ(b.sigma2, 2.0);
    const auto c = fit_gaussian(std::vector<int>{1, 2, 3});
    EXPECT_DOUBLE_EQ(c.mu, 2.0);
    EXPECT_DOUBLE_EQ(c.sigma2, 1.0);
    EXPECT_THROW(fit_gaussian(std::vector<int>{1}), InsufficientSamples);
    EXPECT_THROW(fit_gaussian(std::vector<int>{}), InsufficientSamples);
}

TEST(KlDivergence, Examples) {
    const GaussianModel n01{0, 1}, n11{1, 1}, n04{0, 4};
    EXPECT_EQ(kl_divergence(n01, n01), 0.0);
    EXPECT_NEAR(kl_divergence(n01, n11), 0.5, 1e-15);
    EXPECT_NEAR(kl_divergence(n01, n04), std::log(2.0) + 0.125 - 0.5, 1e-15);
    EXPECT_NEAR(oracle::kl_numeric(0, 1, 1, 1), 0.5, 1e-9);
    EXPECT_NEAR(oracle::kl_numeric(0, 1, 0, 4), 0.318147180559945, 1e-9);
    EXPECT_NE(kl_divergence(n01, n04), kl_divergence(n04, n01));
    EXPECT_DOUBLE_EQ(symmetric_kl(n01, n04), 0.5 * (kl_divergence(n01, n04) + kl_divergence(n04, n01)));
}

TEST(KlDivergence, MatchesNumericalIntegration) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mu(0.0, 100.0), sd(0.5, 20.0);
    for (int i = 0; i < 200; ++i) {
        const GaussianModel a{mu(rng), std::pow(sd(rng), 2)};
        const GaussianModel b{a.mu + std::uniform_real_distribution<double>(-10, 10)(rng), std::pow(sd(rng), 2)};
        const double closed = kl_divergence(a, b);
        const double numeric = oracle::kl_numeric(a.mu, a.sigma2, b.mu, b.sigma2);
        ASSERT_NEAR(closed, numeric, 1e-6 * std::abs(numeric)) << a.mu << " " << a.sigma2 << " " << b.mu << " " << b.sigma2;
    }
}

TEST(KlDivergence, NonNegativeAndZeroOnlyWhenEqual) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> mu(-5, 5), var(1e-3, 10);
    for (int i = 0; i < 10000; ++i) {
        const GaussianModel a{mu(rng), var(rng)}, b{mu(rng), var(rng)};
        EXPECT_GE(kl_divergence(a, b), 0.0);
        EXPECT_GT(kl_divergence(a, b), 0.0);
        EXPECT_EQ(kl_divergence(a, a), 0.0);
    }
}

TEST(LogLikelihood, Examples) {
    const GaussianModel m{3.0, 1.0};
    EXPECT_NEAR(log_likelihood(m, std::vector<double>{3.0}), -0.5 * std::log(2 * std::numbers::pi), 1e-15);
    const double la = log_likelihood(m, std::vector<double>{1.0});
    const double lb = log_likelihood(m, std::vector<double>{6.0});
    EXPECT_NEAR(log_likelihood(m, std::vector<double>{1.0, 6.0}), 0.5 * (la + lb), 1e-14);
    double prev = 0.0;
    for (double d = 0.0; d < 50.0; d += 1.0) {
        const double l = log_likelihood(m, std::vector<double>{3.0 + d});
        if (d > 0) {
            EXPECT_LT(l, prev);
        }
        prev = l;
    }
    EXPECT_LT(prev, -1000.0);
}

TEST(MlGuess, Examples) {
    const std::vector<GaussianModel> far{{10, 1}, {100, 1}};
    EXPECT_EQ(ml_guess(far, std::vector<double>{10, 10, 10}), 0u);
    const std::vector<GaussianModel> same{{10, 1}, {10, 1}};
    EXPECT_EQ(ml_guess(same, std::vector<double>{10, 11}), 1u);
    EXPECT_EQ(ml_guess(same, std::vector<double>{10, 11}, 1), 0u);
    const std::vector<GaussianModel> sym{{-1, 1}, {1, 1}};
    EXPECT_EQ(ml_guess(sym, std::vector<double>{0.0}), 1u);
    EXPECT_THROW(ml_guess(std::vector<GaussianModel>{{0, 1}}, std::vector<double>{0.0}), InsufficientData);
}

TEST(MlGuess, ArgmaxShiftInvariant) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> ll(2 + i % 5);
        for (auto& v : ll) v = std::round(u(rng));  // rounding creates ties
        const std::size_t correct = i % ll.size();
        const auto g = ml_argmax(ll, correct);
        const double shift = std::round(u(rng) * 8);
        for (auto& v : ll) v += shift;
        EXPECT_EQ(ml_argmax(ll, correct), g);
    }
}

TEST(SuccessRate, IdenticalModelsAlwaysTie) {
    const GaussianModel f{5, 2};
    const auto p = success_rate(f, f, 25, 10000, 1);
    EXPECT_EQ(p.sr, 0.0);
}

TEST(SuccessRate, NearIdenticalIsChanceLevel) {
    const auto [f0, f1] = canonical_pair(1e-12);
    for (std::size_t n : {1u, 10u, 100u}) {
        const auto p = success_rate(f0, f1, n, 10000, 2);
        const double ci = 1.96 * std::sqrt(0.25 / 10000);
        EXPECT_NEAR(p.sr, 0.5, 3 * ci) << n;
    }
}

TEST(SuccessRate, SeparatedModels) {
    const GaussianModel a{0, 1}, b{10, 1};
    EXPECT_GE(success_rate(a, b, 25, 10000, 3).sr, 0.99);
    EXPECT_EQ(success_rate(a, b, 1, 10000, 3).sr, 1.0);
}

TEST(SuccessRate, MonotoneInPlaintexts) {
    const auto [f0, f1] = canonical_pair(0.05);
    const auto p10 = success_rate(f0, f1, 10, 10000, 4);
    const auto p100 = success_rate(f0, f1, 100, 10000, 4);
    EXPECT_GE(p100.sr, p10.sr - 3 * std::max(p10.ci_halfwidth, p100.ci_halfwidth));
    EXPECT_GT(p100.sr, p10.sr);
}

TEST(SuccessRate, MonotoneInSeparation) {
    double prev = 0.0, prev_ci = 0.0;
    for (double d = 0.0; d <= 2.0; d += 0.1) {
        const auto p = success_rate({0, 1}, {d, 1}, 10, 10000, 5);
        EXPECT_GE(p.sr, prev - 3 * std::max(prev_ci, p.ci_halfwidth)) << d;
        prev = p.sr;
        prev_ci = p.ci_halfwidth;
    }
}

TEST(SuccessRate, MatchesAnalyticEqualVariance) {
    // Equal variances: L(correct) > L(wrong) iff the sample mean falls on the
    // correct side of the midpoint, so SR = Phi(d sqrt(n) / 2).
    for (double kl : {0.02, 0.1, 0.28, 0.47}) {
        const auto [f0, f1] = canonical_pair(kl);
        const double d = f1.mu - f0.mu;
        for (std::size_t n : {1u, 5u, 12u, 25u}) {
            const auto p = success_rate(f0, f1, n, 10000, 6);
            const double expect = phi(d * std::sqrt(static_cast<double>(n)) / 2.0);
            const double ci = 1.96 * std::sqrt(expect * (1 - expect) / 10000) + 1e-4;
            EXPECT_NEAR(p.sr, expect, 3 * ci) << kl << " " << n;
        }
    }
}

TEST(SuccessRate, ReproducibleAndJobIndependent) {
    const GaussianModel a{0, 1}, b{0.3, 1.5};
    const auto p1 = success_rate(a, b, 17, 10000, 99, 1);
    const auto p2 = success_rate(a, b, 17, 10000, 99, 1);
    const auto p3 = success_rate(a, b, 17, 10000, 99, 4);
    EXPECT_EQ(p1, p2);
    EXPECT_EQ(p1, p3);
    EXPECT_NE(success_rate(a, b, 17, 10000, 100).sr, p1.sr);
    EXPECT_LE(p1.ci_halfwidth, 0.01);
}

TEST(SuccessRate, Errors) {
    EXPECT_THROW(success_rate({0, 1}, {1, 1}, 0, 10, 1), InsufficientData);
    EXPECT_THROW(success_rate({0, 1}, {1, 1}, 1, 0, 1), InsufficientData);
    EXPECT_THROW(canonical_pair(0.0), InsufficientData);
}

TEST(SuccessRate, ExpectedLikelihoodGapIsKl) {
    // E[L(correct; t) - L(wrong; t)] over t ~ f_correct equals D(f_correct || f_wrong).
    const GaussianModel a{3, 2}, b{4, 5};
    std::mt19937_64 rng(7);
    std::normal_distribution<double> draw(a.mu, a.sigma());
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = draw(rng);
        s += a.log_pdf(x) - b.log_pdf(x);
    }
    EXPECT_NEAR(s / n, kl_divergence(a, b), 0.01);
}

TEST(SrCurve, OperatingPoints) {
    std::vector<std::size_t> grid;
    for (std::size_t n = 1; n <= 100; ++n) grid.push_back(n);
    const auto c47 = sr_vs_kl_curve(0.47, grid, 10000, 8);
    const auto c28 = sr_vs_kl_curve(0.28, grid, 10000, 8);
    const auto n47 = c47.first_crossing(0.95);
    const auto n28 = c28.first_crossing(0.95);
    EXPECT_GT(n47, 0u);
    EXPECT_LE(n47, 50u);
    EXPECT_GT(n28, 0u);
    EXPECT_LE(n28, 70u);
    EXPECT_LT(n47, n28);
    for (const auto& p : c47.points) EXPECT_LE(p.ci_halfwidth, 0.01);
    const auto big = sr_vs_kl_curve(1e4, grid, 10000, 8);
    EXPECT_EQ(big.first_crossing(0.95), 1u);
    EXPECT_THROW(sr_vs_kl_curve(0.1, std::vector<std::size_t>{5, 5}, 100, 1), InsufficientData);
}

TEST(SrCurve, DerivedKlThreshold) {
    const double kl = kl_for_success_rate(0.95, 25, 10000, 9);
    // Analytic value: d sqrt(25) / 2 = z_0.95, kl = d^2 / 2.
    const double z = 1.6448536269514722;
    const double analytic = std::pow(2 * z / 5.0, 2) / 2.0;
    EXPECT_NEAR(kl, analytic, 0.15 * analytic);
    const auto [f0, f1] = canonical_pair(kl);
    EXPECT_GE(success_rate(f0, f1, 25, 10000, derive_seed(9, 25)).sr, 0.95);
}

TEST(Pearson, Examples) {
    const std::vector<double> x{1, 2, 3, 7, 11}, y{2, 4, 6, 14, 22};
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    EXPECT_NEAR(pearson(x, x), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
    EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0, 1e-12);
    EXPECT_THROW(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), ConstantVector);
    EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), LengthMismatch);
}

TEST(Pearson, AffineInvariant) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(50), y(50);
        for (std::size_t k = 0; k < 50; ++k) {
            x[k] = g(rng);
            y[k] = x[k] + g(rng);
        }
        const double r = pearson(x, y);
        const double a = std::exp(g(rng)), b = 10 * g(rng);
        std::vector<double> y2(y);
        for (auto& v : y2) v = a * v + b;
        EXPECT_NEAR(pearson(x, y2), r, 1e-9);
    }
}

TEST(Pearson, NoisyCopy) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0, 5);
    std::vector<double> x(200);
    for (auto& v : x) v = u(rng);
    const double range = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
    std::normal_distribution<double> noise(0, 0.01 * range);
    std::vector<double> y(x);
    for (auto& v : y) v += noise(rng);
    EXPECT_GE(pearson(x, y), 0.99);
}

TEST(Spearman, TiesAndMonotone) {
    EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 8, 27}), 1.0);
    EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}), 0.0);
    const auto r = average_ranks(std::vector<double>{10, 20, 20, 5});
    EXPECT_EQ(r, (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Bootstrap, CoversPointEstimate) {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> a(50, 5), b(52, 5);
    std::vector<double> s0(1000), s1(1000);
    for (auto& v : s0) v = a(rng);
    for (auto& v : s1) v = b(rng);
    const double kl = kl_divergence(fit_gaussian(s0), fit_gaussian(s1));
    const auto iv = bootstrap_kl_interval(std::span<const double>(s0), std::span<const double>(s1), 1000, 1);
    EXPECT_LE(iv.lo, kl);
    EXPECT_GE(iv.hi, kl);
    EXPECT_LT(iv.lo, iv.hi);
    const auto again = bootstrap_kl_interval(std::span<const double>(s0), std::span<const double>(s1), 1000, 1);
    EXPECT_EQ(again.lo, iv.lo);
    EXPECT_EQ(again.hi, iv.hi);
}
