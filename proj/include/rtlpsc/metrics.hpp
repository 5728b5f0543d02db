#pragma once

// Gaussian leakage model, KL divergence, maximum-likelihood key guessing and
// success-rate estimation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "rtlpsc/error.hpp"
#include "rtlpsc/parallel.hpp"

namespace rtlpsc::metrics {

// Toggle-count^2 units. Keeps KL finite for constant sample sets.
inline constexpr double kVarianceFloor = 1e-6;

struct GaussianModel {
    double mu = 0.0;
    double sigma2 = 1.0;

    double sigma() const { return std::sqrt(sigma2); }

    double log_pdf(double t) const {
        const double d = t - mu;
        return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - d * d / (2.0 * sigma2);
    }

    friend bool operator==(const GaussianModel&, const GaussianModel&) = default;
};

// Sample mean and floored unbiased variance. Accumulates in index order.
template <class T>
GaussianModel fit_gaussian(std::span<const T> samples) {
    if (samples.size() < 2) throw InsufficientSamples(samples.size());
    double sum = 0.0;
    for (const T& v : samples) sum += static_cast<double>(v);
    const double mu = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (const T& v : samples) {
        const double d = static_cast<double>(v) - mu;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(samples.size() - 1);
    return {mu, std::max(var, kVarianceFloor)};
}

template <class T>
GaussianModel fit_gaussian(const std::vector<T>& samples) {
    return fit_gaussian(std::span<const T>(samples));
}

// D(f0 || f1), f0 being the reference distribution.
inline double kl_divergence(const GaussianModel& f0, const GaussianModel& f1) {
    const double d = f0.mu - f1.mu;
    const double kl = 0.5 * std::log(f1.sigma2 / f0.sigma2) + (f0.sigma2 + d * d) / (2.0 * f1.sigma2) - 0.5;
    return std::max(kl, 0.0);
}

inline double symmetric_kl(const GaussianModel& f0, const GaussianModel& f1) {
    return 0.5 * (kl_divergence(f0, f1) + kl_divergence(f1, f0));
}

// Mean Gaussian log-density of the samples.
template <class T>
double log_likelihood(const GaussianModel& model, std::span<const T> samples) {
    if (samples.empty()) throw InsufficientSamples(0);
    double s = 0.0;
    for (const T& v : samples) s += model.log_pdf(static_cast<double>(v));
    return s / static_cast<double>(samples.size());
}

template <class T>
double log_likelihood(const GaussianModel& model, const std::vector<T>& samples) {
    return log_likelihood(model, std::span<const T>(samples));
}

// Index of the largest log-likelihood. A tie with the correct key is resolved
// against it, so success rates built on this are pessimistic.
inline std::size_t ml_argmax(std::span<const double> likelihoods, std::size_t correct = 0) {
    if (likelihoods.size() < 2) throw InsufficientData("ml_guess needs at least 2 candidate models");
    std::size_t best = 0;
    double best_l = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < likelihoods.size(); ++k) {
        const double l = likelihoods[k];
        if (l > best_l || (l == best_l && best == correct)) {
            best = k;
            best_l = l;
        }
    }
    return best;
}

template <class T>
std::size_t ml_guess(std::span<const GaussianModel> models, std::span<const T> samples, std::size_t correct = 0) {
    if (models.size() < 2) throw InsufficientData("ml_guess needs at least 2 candidate models");
    std::vector<double> ll(models.size());
    for (std::size_t k = 0; k < models.size(); ++k) ll[k] = log_likelihood(models[k], samples);
    return ml_argmax(ll, correct);
}

template <class T>
std::size_t ml_guess(const std::vector<GaussianModel>& models, const std::vector<T>& samples, std::size_t correct = 0) {
    return ml_guess(std::span<const GaussianModel>(models), std::span<const T>(samples), correct);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

struct SrPoint {
    std::size_t n = 0;
    double sr = 0.0;
    double ci_halfwidth = 0.0;

    friend bool operator==(const SrPoint&, const SrPoint&) = default;
};

struct SrCurve {
    std::vector<SrPoint> points;
    double kl = 0.0;

    // Smallest n whose estimate reaches `threshold`; 0 when none does.
    std::size_t first_crossing(double threshold) const {
        for (const auto& p : points)
            if (p.sr >= threshold) return p.n;
        return 0;
    }
};

inline constexpr std::size_t kTrialsPerShard = 1000;

// Monte-Carlo estimate of Pr[L(correct; t) > L(wrong; t)] with t drawn from the
// correct model. Trials are grouped into fixed shards with derived seeds, so the
// result is identical for any `jobs`.
inline SrPoint success_rate(const GaussianModel& f_correct, const GaussianModel& f_wrong, std::size_t n,
                            std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
    if (n < 1 || trials < 1) throw InsufficientData("success_rate needs n >= 1 and trials >= 1");
    const std::size_t shards = (trials + kTrialsPerShard - 1) / kTrialsPerShard;
    std::vector<std::size_t> wins(shards, 0);
    const double inv_n = 1.0 / static_cast<double>(n);
    parallel_for(shards, jobs, [&](std::size_t shard) {
        std::mt19937_64 rng(derive_seed(seed, shard));
        std::normal_distribution<double> draw(f_correct.mu, f_correct.sigma());
        const std::size_t begin = shard * kTrialsPerShard;
        const std::size_t end = std::min(trials, begin + kTrialsPerShard);
        std::size_t w = 0;
        for (std::size_t t = begin; t < end; ++t) {
            double l_correct = 0.0;
            double l_wrong = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = draw(rng);
                l_correct += f_correct.log_pdf(x);
                l_wrong += f_wrong.log_pdf(x);
            }
            if (l_correct * inv_n > l_wrong * inv_n) ++w;
        }
        wins[shard] = w;
    });
    const std::size_t total = std::accumulate(wins.begin(), wins.end(), std::size_t{0});
    const double sr = static_cast<double>(total) / static_cast<double>(trials);
    return {n, sr, 1.96 * std::sqrt(sr * (1.0 - sr) / static_cast<double>(trials))};
}

// Equal-variance pair N(0,1), N(sqrt(2 kl), 1), whose KL is exactly kl.
inline std::pair<GaussianModel, GaussianModel> canonical_pair(double kl) {
    if (!(kl > 0.0)) throw InsufficientData("KL target must be positive");
    return {{0.0, 1.0}, {std::sqrt(2.0 * kl), 1.0}};
}

inline SrCurve sr_vs_kl_curve(double kl_target, std::span<const std::size_t> n_grid, std::size_t trials,
                              std::uint64_t seed, unsigned jobs = 1) {
    const auto [f0, f1] = canonical_pair(kl_target);
    SrCurve curve;
    curve.kl = kl_target;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw InsufficientData("n grid must be strictly increasing");
        curve.points.push_back(success_rate(f0, f1, n_grid[i], trials, derive_seed(seed, n_grid[i]), jobs));
    }
    return curve;
}

// Smallest KL (bisection in log space) whose canonical pair reaches `sr_target`
// with `n` plaintexts.
inline double kl_for_success_rate(double sr_target, std::size_t n, std::size_t trials, std::uint64_t seed,
                                  unsigned jobs = 1) {
    auto sr_at = [&](double kl) {
        const auto [f0, f1] = canonical_pair(kl);
        return success_rate(f0, f1, n, trials, derive_seed(seed, n), jobs).sr;
    };
    double lo = 1e-6;
    double hi = 1.0;
    while (sr_at(hi) < sr_target && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 40; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (sr_at(mid) >= sr_target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
    if (x.size() < 2) throw InsufficientData("pearson needs at least 2 points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConstantVector();
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(std::span<const double>(x), std::span<const double>(y));
}

// 1-based ranks, ties get the average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// Spearman rank correlation; 0 when either side is entirely tied.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    try {
        return pearson(rx, ry);
    } catch (const ConstantVector&) {
        return 0.0;
    }
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap interval for D(f0 || f1), resampling each key's samples
// independently.
template <class T>
Interval bootstrap_kl_interval(std::span<const T> s0, std::span<const T> s1, std::size_t resamples,
                               std::uint64_t seed, double level = 0.95) {
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_int_distribution<std::size_t> pick0(0, s0.size() - 1);
    std::uniform_int_distribution<std::size_t> pick1(0, s1.size() - 1);
    std::vector<double> kls(resamples);
    std::vector<double> b0(s0.size());
    std::vector<double> b1(s1.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& v : b0) v = static_cast<double>(s0[pick0(rng)]);
        for (auto& v : b1) v = static_cast<double>(s1[pick1(rng)]);
        kls[r] = kl_divergence(fit_gaussian(std::span<const double>(b0)), fit_gaussian(std::span<const double>(b1)));
    }
    std::sort(kls.begin(), kls.end());
    const double alpha = (1.0 - level) / 2.0;
    auto at = [&](double q) {
        const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
        return kls[std::min(i, resamples - 1)];
    };
    return {at(alpha), at(1.0 - alpha)};
}

}  // namespace rtlpsc::metrics
