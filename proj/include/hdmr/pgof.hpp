#pragma once

#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace hdmr {
namespace pgof {

struct CategoricalSample {
    std::vector<int> values;  // categories in 1..k
    const DiscreteLaw* law = nullptr;
};

namespace detail {

struct CountScratch {
    std::vector<double> counts;
    std::vector<int> touched;

    explicit CountScratch(int k) : counts(static_cast<std::size_t>(k), 0.0) {}

    void tally(const std::vector<int>& values, int k) {
        for (int v : values) {
            if (v < 1 || v > k) throw DomainError("pgof: category outside the law's support");
            if (counts[static_cast<std::size_t>(v - 1)] == 0.0) touched.push_back(v - 1);
            counts[static_cast<std::size_t>(v - 1)] += 1.0;
        }
    }
    void reset() {
        for (int t : touched) counts[static_cast<std::size_t>(t)] = 0.0;
        touched.clear();
    }
};

}  // namespace detail

struct Chi2Decomposition {
    double f0 = 0.0;            // k_n - 1
    double first_order = 0.0;   // sum_i f_i
    double second_order = 0.0;  // sum_{i<j} f_ij
    double chi2 = 0.0;
    double chi2_hdmr = 0.0;     // f0 + sum_{i<j} f_ij
};

// Both statistics in one O(n + #occupied) pass over category counts:
//   S_n = sum_i 1/mu{x_i},  U_n = sum_k c_k (c_k - 1) / mu{k},
//   chi2 = (S_n + U_n)/n - n,  sum f_i = S_n/n - k,  sum f_ij = (U_n - n(n-1))/n.
inline Chi2Decomposition chi2_decompose(const std::vector<int>& values, const DiscreteLaw& law) {
    if (values.empty()) throw InputError("pgof: empty sample");
    int k = law.support_size();
    double n = static_cast<double>(values.size());
    detail::CountScratch scratch(k);
    scratch.tally(values, k);
    double s_n = 0.0, u_n = 0.0;
    for (int idx : scratch.touched) {
        double c = scratch.counts[static_cast<std::size_t>(idx)];
        double inv_mu = 1.0 / law.prob(idx + 1);
        s_n += c * inv_mu;
        u_n += c * (c - 1.0) * inv_mu;
    }
    Chi2Decomposition d;
    d.f0 = k - 1.0;
    d.first_order = s_n / n - k;
    d.second_order = (u_n - n * (n - 1.0)) / n;
    d.chi2 = d.f0 + d.first_order + d.second_order;
    d.chi2_hdmr = d.f0 + d.second_order;
    return d;
}

inline double pearson_chi2(const std::vector<int>& values, const DiscreteLaw& law) {
    return chi2_decompose(values, law).chi2;
}

inline Chi2Decomposition chi2_decompose(const CategoricalSample& sample) {
    if (!sample.law) throw InputError("pgof: sample without a law");
    return chi2_decompose(sample.values, *sample.law);
}

// Var chi2 = (Var mu^{-1}{X} + 2(n-1)(k-1)) / n with the first term exact.
inline double variance_formula(int n, const DiscreteLaw& law) {
    int k = law.support_size();
    double inv_sum = 0.0;
    for (int c = 1; c <= k; ++c) inv_sum += 1.0 / law.prob(c);
    double var_inv = inv_sum - static_cast<double>(k) * static_cast<double>(k);
    return (var_inv + 2.0 * (n - 1.0) * (k - 1.0)) / n;
}

enum class LimitRegime { Degenerate, Poisson, Gaussian };

struct RegimeInfo {
    double lambda = 0.0;
    LimitRegime regime = LimitRegime::Gaussian;
    double poisson_rate = 0.0;  // lambda^2 / 2, Poisson regime only
};

inline RegimeInfo limit_regime(double n, double k_n, double gaussian_threshold = 30.0,
                               double degenerate_threshold = 0.05) {
    if (n < 1 || k_n < 1) throw InputError("limit_regime: need n, k_n >= 1");
    RegimeInfo info;
    info.lambda = n / std::sqrt(k_n);
    if (info.lambda >= gaussian_threshold) {
        info.regime = LimitRegime::Gaussian;
    } else if (info.lambda <= degenerate_threshold) {
        info.regime = LimitRegime::Degenerate;
    } else {
        info.regime = LimitRegime::Poisson;
        info.poisson_rate = info.lambda * info.lambda / 2.0;
    }
    return info;
}

inline const char* regime_name(LimitRegime r) {
    switch (r) {
        case LimitRegime::Degenerate: return "degenerate";
        case LimitRegime::Poisson: return "poisson";
        case LimitRegime::Gaussian: return "gaussian";
    }
    return "?";
}

struct PgofRecord {
    double chi2 = 0.0;
    double chi2_hdmr = 0.0;
};

struct PgofSummary {
    int n = 0;
    int k_n = 0;
    int replicates = 0;
    uint64_t seed = 0;
    double lambda = 0.0;
    double mean_chi2 = 0.0, var_chi2 = 0.0;
    double mean_hdmr = 0.0, var_hdmr = 0.0;
    std::vector<PgofRecord> records;
};

// Replicates are independent; each derives its own seed so the partition
// across threads cannot change the stream.
inline PgofSummary simulate(int n, const DiscreteLaw& law, int replicates, uint64_t seed) {
    if (replicates < 1) throw InputError("pgof simulate: replicates >= 1");
    PgofSummary out;
    out.n = n;
    out.k_n = law.support_size();
    out.replicates = replicates;
    out.seed = seed;
    out.lambda = static_cast<double>(n) / std::sqrt(static_cast<double>(law.support_size()));
    out.records.resize(static_cast<std::size_t>(replicates));

    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t lo, std::size_t hi) {
        std::vector<int> values(static_cast<std::size_t>(n));
        for (std::size_t r = lo; r < hi; ++r) {
            std::mt19937_64 rng(derive_seed(seed, r));
            for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = law.draw(rng);
            auto d = chi2_decompose(values, law);
            out.records[r] = {d.chi2, d.chi2_hdmr};
        }
    });

    double m1 = 0.0, m2 = 0.0;
    for (const auto& rec : out.records) {
        m1 += rec.chi2;
        m2 += rec.chi2_hdmr;
    }
    m1 /= replicates;
    m2 /= replicates;
    double v1 = 0.0, v2 = 0.0;
    for (const auto& rec : out.records) {
        v1 += (rec.chi2 - m1) * (rec.chi2 - m1);
        v2 += (rec.chi2_hdmr - m2) * (rec.chi2_hdmr - m2);
    }
    out.mean_chi2 = m1;
    out.mean_hdmr = m2;
    out.var_chi2 = replicates > 1 ? v1 / (replicates - 1.0) : 0.0;
    out.var_hdmr = replicates > 1 ? v2 / (replicates - 1.0) : 0.0;
    return out;
}

// (x - (k-1)) / sqrt(2(k-1)), the classical standardization.
inline std::vector<double> standardize(const std::vector<PgofRecord>& records, int k_n,
                                       bool hdmr_variant) {
    std::vector<double> out;
    out.reserve(records.size());
    double center = k_n - 1.0;
    double scale = std::sqrt(2.0 * (k_n - 1.0));
    for (const auto& r : records) out.push_back(((hdmr_variant ? r.chi2_hdmr : r.chi2) - center) / scale);
    return out;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double ks_to_standard_normal(std::vector<double> sample) {
    if (sample.empty()) throw InputError("ks: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double cdf = standard_normal_cdf(sample[i]);
        ks = std::max(ks, std::abs((i + 1.0) / n - cdf));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    }
    return ks;
}

// Theorem comparison in the lambda in (0, inf) regime: the standardized
// statistic against (sqrt(2)/lambda) Z - lambda/sqrt(2), Z ~ Poisson(l^2/2).
// The empirical power-law tails undersample, so only the region above the
// given lower percentile is compared.
inline double ks_to_poisson_limit(std::vector<double> standardized, double lambda,
                                  double lower_percentile = 0.05) {
    if (standardized.empty()) throw InputError("ks: empty sample");
    std::sort(standardized.begin(), standardized.end());
    double rate = lambda * lambda / 2.0;
    // Poisson CDF table far enough into the tail.
    int zmax = static_cast<int>(rate + 12.0 * std::sqrt(rate) + 12.0);
    std::vector<double> cdf(static_cast<std::size_t>(zmax) + 1);
    double p = std::exp(-rate), acc = 0.0;
    for (int z = 0; z <= zmax; ++z) {
        acc += p;
        cdf[static_cast<std::size_t>(z)] = std::min(acc, 1.0);
        p *= rate / (z + 1.0);
    }
    auto limit_cdf = [&](double t) {
        // P((sqrt(2)/l) Z - l/sqrt(2) <= t) = P(Z <= floor(l t/sqrt(2) + l^2/2));
        // the epsilon keeps atoms that land exactly on a jump on its closed side
        double zf = std::floor(lambda * t / std::sqrt(2.0) + rate + 1e-9);
        if (zf < 0.0) return 0.0;
        int z = static_cast<int>(std::min(zf, static_cast<double>(zmax)));
        return cdf[static_cast<std::size_t>(z)];
    };
    double n = static_cast<double>(standardized.size());
    std::size_t start = static_cast<std::size_t>(lower_percentile * n);
    double ks = 0.0;
    // The limit law is atomic: group ties and compare against the cdf and its
    // left limit at each distinct value.
    std::size_t i = start;
    while (i < standardized.size()) {
        std::size_t j = i;
        while (j + 1 < standardized.size() && standardized[j + 1] == standardized[i]) ++j;
        double x = standardized[i];
        double c = limit_cdf(x);
        double c_left = limit_cdf(x - 1e-6);
        ks = std::max(ks, std::abs((j + 1.0) / n - c));
        ks = std::max(ks, std::abs(c_left - static_cast<double>(i) / n));
        i = j + 1;
    }
    return ks;
}

struct Histogram {
    std::vector<double> edges;   // size bins+1
    std::vector<double> counts;  // size bins, normalized to densities
};

inline Histogram make_histogram(const std::vector<double>& sample, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw InputError("histogram: bad layout");
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    h.counts.assign(static_cast<std::size_t>(bins), 0.0);
    double width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + b * width;
    for (double x : sample) {
        if (x < lo || x >= hi) continue;
        int b = static_cast<int>((x - lo) / width);
        h.counts[static_cast<std::size_t>(std::min(b, bins - 1))] += 1.0;
    }
    double total = static_cast<double>(sample.size()) * width;
    if (total > 0.0)
        for (double& c : h.counts) c /= total;
    return h;
}

}  // namespace pgof
}  // namespace hdmr
