#pragma once

#include "hdmr/common.hpp"
#include "hdmr/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace hdmr {

inline std::vector<std::string> default_names(int n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

// ---------------------------------------------------------------------------
// Empirical measure: weighted samples standing in for the input law.
// ---------------------------------------------------------------------------

class EmpiricalMeasure {
  public:
    EmpiricalMeasure(Matrix samples, Vector weights, std::vector<std::string> names = {})
        : samples_(std::move(samples)), weights_(std::move(weights)), names_(std::move(names)) {
        if (samples_.rows() < 1 || samples_.cols() < 1)
            throw InputError("EmpiricalMeasure: need at least one point and one variable");
        if (weights_.size() != samples_.rows())
            throw ShapeError("EmpiricalMeasure: weight count != sample count");
        if (!samples_.allFinite() || !weights_.allFinite())
            throw InputError("EmpiricalMeasure: non-finite entries");
        if (weights_.minCoeff() < 0.0) throw InputError("EmpiricalMeasure: negative weight");
        double s = weights_.sum();
        if (std::abs(s - 1.0) > 1e-12 * std::max(1.0, std::abs(s)))
            throw InputError("EmpiricalMeasure: weights must sum to 1");
        if (names_.empty()) names_ = default_names(static_cast<int>(samples_.cols()));
        if (static_cast<Eigen::Index>(names_.size()) != samples_.cols())
            throw ShapeError("EmpiricalMeasure: name count != variable count");
    }

    static EmpiricalMeasure equal_weights(Matrix samples, std::vector<std::string> names = {}) {
        Eigen::Index n = samples.rows();
        Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
        return EmpiricalMeasure(std::move(samples), std::move(w), std::move(names));
    }

    const Matrix& samples() const { return samples_; }
    const Vector& weights() const { return weights_; }
    const std::vector<std::string>& variable_names() const { return names_; }
    int point_count() const { return static_cast<int>(samples_.rows()); }
    int dimension() const { return static_cast<int>(samples_.cols()); }

    double moment(const std::vector<int>& index) const {
        if (static_cast<int>(index.size()) != dimension())
            throw ShapeError("EmpiricalMeasure::moment: index length");
        double acc = 0.0;
        for (Eigen::Index r = 0; r < samples_.rows(); ++r) {
            double t = weights_[r];
            for (std::size_t j = 0; j < index.size(); ++j)
                for (int p = 0; p < index[j]; ++p) t *= samples_(r, static_cast<Eigen::Index>(j));
            acc += t;
        }
        return acc;
    }

    double mean_of(const std::function<double(const Vector&)>& f) const {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < samples_.rows(); ++r) acc += weights_[r] * f(samples_.row(r));
        return acc;
    }

  private:
    Matrix samples_;
    Vector weights_;
    std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Gaussian measure with full correlation structure.
// ---------------------------------------------------------------------------

namespace detail {

// E[x^a] for x ~ N(mean, cov) through the Stein recurrence
//   E[x_j x^b] = mean_j E[x^b] + sum_k cov(j,k) b_k E[x^(b - e_k)].
inline double gaussian_moment_rec(const Vector& mean, const Matrix& cov, std::vector<int>& a,
                                  std::map<std::vector<int>, double>& memo) {
    bool all_zero = true;
    for (int p : a)
        if (p != 0) {
            all_zero = false;
            break;
        }
    if (all_zero) return 1.0;
    auto it = memo.find(a);
    if (it != memo.end()) return it->second;

    std::size_t j = 0;
    while (a[j] == 0) ++j;
    --a[j];
    double val = mean[static_cast<Eigen::Index>(j)] * gaussian_moment_rec(mean, cov, a, memo);
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == 0) continue;
        double c = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        if (c == 0.0) continue;
        --a[k];
        val += c * static_cast<double>(a[k] + 1) * gaussian_moment_rec(mean, cov, a, memo);
        ++a[k];
    }
    ++a[j];
    memo[a] = val;
    return val;
}

inline void check_analytic_order(const std::vector<int>& index) {
    int total = 0;
    for (int p : index) {
        if (p < 0) throw InputError("moment: negative exponent");
        total += p;
    }
    if (total > kMaxAnalyticMomentOrder)
        throw MomentOrderError("analytic moment order " + std::to_string(total) +
                               " above cap " + std::to_string(kMaxAnalyticMomentOrder) +
                               "; use an empirical measure");
}

}  // namespace detail

// Conditional law of the complement block given x_u:
//   x_rest | x_given = offset + coef * x_given + noise, noise ~ N(0, cov).
struct GaussianConditional {
    std::vector<int> given;
    std::vector<int> rest;
    Vector offset;
    Matrix coef;
    Matrix cov;
};

class GaussianMeasure {
  public:
    GaussianMeasure(Vector mean, Vector stdev, Matrix correlation)
        : mean_(std::move(mean)), stdev_(std::move(stdev)), corr_(std::move(correlation)) {
        Eigen::Index n = mean_.size();
        if (n < 1) throw InputError("GaussianMeasure: empty mean");
        if (stdev_.size() != n || corr_.rows() != n || corr_.cols() != n)
            throw ShapeError("GaussianMeasure: inconsistent dimensions");
        if (stdev_.minCoeff() <= 0.0) throw InputError("GaussianMeasure: stdev must be positive");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(corr_(i, i) - 1.0) > 1e-12)
                throw InputError("GaussianMeasure: correlation diagonal must be 1");
            for (Eigen::Index j = 0; j < n; ++j) {
                if (std::abs(corr_(i, j) - corr_(j, i)) > 1e-12)
                    throw InputError("GaussianMeasure: correlation must be symmetric");
                if (std::abs(corr_(i, j)) > 1.0 + 1e-12)
                    throw InputError("GaussianMeasure: correlation entries must lie in [-1,1]");
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(corr_);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw InputError("GaussianMeasure: correlation is not positive semi-definite");
    }

    // Bivariate shorthand used all over the analytic examples.
    static GaussianMeasure bivariate(double mu1, double mu2, double s1, double s2, double rho) {
        Vector m(2), s(2);
        m << mu1, mu2;
        s << s1, s2;
        Matrix c(2, 2);
        c << 1.0, rho, rho, 1.0;
        return GaussianMeasure(std::move(m), std::move(s), std::move(c));
    }

    static GaussianMeasure standard(int n, double rho = 0.0) {
        Matrix c = Matrix::Identity(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) c(i, j) = rho;
        return GaussianMeasure(Vector::Zero(n), Vector::Ones(n), std::move(c));
    }

    const Vector& mean() const { return mean_; }
    const Vector& stdev() const { return stdev_; }
    const Matrix& correlation() const { return corr_; }
    int dimension() const { return static_cast<int>(mean_.size()); }

    Matrix covariance() const {
        return stdev_.asDiagonal() * corr_ * stdev_.asDiagonal();
    }

    // Square root factor with eigenvalue clipping at 0 (PSD within 1e-10), so
    // rho = +/-1 degeneracies sample exactly on the collapsed subspace.
    Matrix factor() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(covariance());
        if (es.info() != Eigen::Success) throw Error("GaussianMeasure: eigenfactorization failed");
        Vector lam = es.eigenvalues();
        if (lam.minCoeff() < -1e-10 * std::max(1.0, lam.maxCoeff()))
            throw InputError("GaussianMeasure: covariance factorization found negative eigenvalue");
        for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::sqrt(std::max(lam[i], 0.0));
        return es.eigenvectors() * lam.asDiagonal();
    }

    double moment(const std::vector<int>& index) const {
        if (static_cast<int>(index.size()) != dimension())
            throw ShapeError("GaussianMeasure::moment: index length");
        detail::check_analytic_order(index);
        std::map<std::vector<int>, double> memo;
        std::vector<int> a = index;
        return detail::gaussian_moment_rec(mean_, covariance(), a, memo);
    }

    GaussianConditional conditional(const std::vector<int>& given) const {
        int n = dimension();
        std::vector<char> is_given(static_cast<std::size_t>(n), 0);
        for (int g : given) is_given[static_cast<std::size_t>(g)] = 1;
        std::vector<int> rest;
        for (int i = 0; i < n; ++i)
            if (!is_given[static_cast<std::size_t>(i)]) rest.push_back(i);

        Matrix sigma = covariance();
        auto block = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
            Matrix b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < cols.size(); ++j)
                    b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        sigma(rows[i], cols[j]);
            return b;
        };
        Matrix s_gg = block(given, given);
        Matrix s_rg = block(rest, given);
        Matrix s_rr = block(rest, rest);
        // Pseudo-inverse through the eigendecomposition keeps |rho| = 1 legal.
        Eigen::SelfAdjointEigenSolver<Matrix> es(s_gg);
        Vector lam = es.eigenvalues();
        Vector inv = lam;
        double lmax = lam.maxCoeff();
        for (Eigen::Index i = 0; i < inv.size(); ++i)
            inv[i] = lam[i] > 1e-12 * std::max(1.0, lmax) ? 1.0 / lam[i] : 0.0;
        Matrix s_gg_inv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

        GaussianConditional out;
        out.given = given;
        out.rest = rest;
        out.coef = s_rg * s_gg_inv;
        Vector mu_g(static_cast<Eigen::Index>(given.size()));
        Vector mu_r(static_cast<Eigen::Index>(rest.size()));
        for (std::size_t i = 0; i < given.size(); ++i) mu_g[static_cast<Eigen::Index>(i)] = mean_[given[i]];
        for (std::size_t i = 0; i < rest.size(); ++i) mu_r[static_cast<Eigen::Index>(i)] = mean_[rest[i]];
        out.offset = mu_r - out.coef * mu_g;
        out.cov = s_rr - out.coef * s_rg.transpose();
        return out;
    }

  private:
    Vector mean_;
    Vector stdev_;
    Matrix corr_;
};

// ---------------------------------------------------------------------------
// Product measures from one-dimensional marginals.
// ---------------------------------------------------------------------------

struct Uniform1D {
    double a, b;
};

struct Beta1D {
    double a, b;
};

// Point-mass list: finite support with explicit probabilities.
struct Discrete1D {
    std::vector<double> values;
    std::vector<double> probs;
};

using Marginal = std::variant<Uniform1D, Beta1D, Discrete1D>;

inline void validate_marginal(const Marginal& m) {
    if (const auto* u = std::get_if<Uniform1D>(&m)) {
        if (!(u->a < u->b)) throw InputError("uniform marginal: requires a < b");
    } else if (const auto* be = std::get_if<Beta1D>(&m)) {
        if (!(be->a > 0.0 && be->b > 0.0)) throw InputError("beta marginal: requires a, b > 0");
    } else {
        const auto& d = std::get<Discrete1D>(m);
        if (d.values.empty() || d.values.size() != d.probs.size())
            throw InputError("point-mass marginal: values/probs mismatch");
        double s = 0.0;
        for (double p : d.probs) {
            if (p < 0.0) throw InputError("point-mass marginal: negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw InputError("point-mass marginal: probabilities must sum to 1");
    }
}

inline double marginal_moment(const Marginal& m, int p) {
    if (p == 0) return 1.0;
    if (const auto* u = std::get_if<Uniform1D>(&m)) {
        // (b^{p+1} - a^{p+1}) / ((p+1)(b-a))
        double num = std::pow(u->b, p + 1) - std::pow(u->a, p + 1);
        return num / (static_cast<double>(p + 1) * (u->b - u->a));
    }
    if (const auto* be = std::get_if<Beta1D>(&m)) {
        double acc = 1.0;
        for (int r = 0; r < p; ++r) acc *= (be->a + r) / (be->a + be->b + r);
        return acc;
    }
    const auto& d = std::get<Discrete1D>(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) acc += d.probs[i] * std::pow(d.values[i], p);
    return acc;
}

inline double marginal_mean(const Marginal& m) { return marginal_moment(m, 1); }

inline double marginal_stdev(const Marginal& m) {
    double m1 = marginal_moment(m, 1), m2 = marginal_moment(m, 2);
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

class ProductMeasure {
  public:
    explicit ProductMeasure(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
        if (marginals_.empty()) throw InputError("ProductMeasure: no marginals");
        for (const auto& m : marginals_) validate_marginal(m);
    }

    static ProductMeasure iid(const Marginal& m, int n) {
        return ProductMeasure(std::vector<Marginal>(static_cast<std::size_t>(n), m));
    }

    const std::vector<Marginal>& marginals() const { return marginals_; }
    int dimension() const { return static_cast<int>(marginals_.size()); }

    double moment(const std::vector<int>& index) const {
        if (index.size() != marginals_.size()) throw ShapeError("ProductMeasure::moment: index length");
        detail::check_analytic_order(index);
        double acc = 1.0;
        for (std::size_t i = 0; i < index.size(); ++i) acc *= marginal_moment(marginals_[i], index[i]);
        return acc;
    }

  private:
    std::vector<Marginal> marginals_;
};

// ---------------------------------------------------------------------------
// Discrete categorical law on {1..k_n}.
// ---------------------------------------------------------------------------

class DiscreteLaw {
  public:
    explicit DiscreteLaw(std::vector<double> probabilities)
        : probs_(std::move(probabilities)) {
        if (probs_.empty()) throw InputError("DiscreteLaw: empty support");
        double s = 0.0;
        for (double p : probs_) {
            if (p <= 0.0) throw InputError("DiscreteLaw: probabilities must be positive");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw InputError("DiscreteLaw: probabilities must sum to 1");
        cum_.resize(probs_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            acc += probs_[i];
            cum_[i] = acc;
        }
        cum_.back() = 1.0;
    }

    int support_size() const { return static_cast<int>(probs_.size()); }
    const std::vector<double>& probabilities() const { return probs_; }
    double prob(int k) const { return probs_[static_cast<std::size_t>(k - 1)]; }

    // Inverse-CDF draw, O(log k) per call.
    int draw(std::mt19937_64& rng) const {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) --it;
        return static_cast<int>(it - cum_.begin()) + 1;
    }

  private:
    std::vector<double> probs_;
    std::vector<double> cum_;
};

// mu{k} proportional to k^-alpha on {1..k_n}, normalized by the exact sum
// (not the kn^{1-alpha}/(1-alpha) approximation).
inline DiscreteLaw power_law(int k_n, double alpha) {
    if (k_n < 1) throw InputError("power_law: k_n must be >= 1");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("power_law: alpha must lie in [0,1)");
    std::vector<double> p(static_cast<std::size_t>(k_n));
    double c = 0.0;
    for (int k = 1; k <= k_n; ++k) c += std::pow(static_cast<double>(k), -alpha);
    for (int k = 1; k <= k_n; ++k)
        p[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -alpha) / c;
    return DiscreteLaw(std::move(p));
}

// ---------------------------------------------------------------------------
// Sampling. Deterministic per seed on a given platform.
// ---------------------------------------------------------------------------

inline EmpiricalMeasure sample(const GaussianMeasure& g, int count, uint64_t seed) {
    if (count < 1) throw InputError("sample: count must be >= 1");
    Matrix factor = g.factor();
    int n = g.dimension();
    Matrix out(count, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (int r = 0; r < count; ++r) {
        for (int j = 0; j < n; ++j) z[j] = normal(rng);
        out.row(r) = (g.mean() + factor * z).transpose();
    }
    return EmpiricalMeasure::equal_weights(std::move(out));
}

namespace detail {

inline double draw_marginal(const Marginal& m, std::mt19937_64& rng) {
    if (const auto* u = std::get_if<Uniform1D>(&m))
        return std::uniform_real_distribution<double>(u->a, u->b)(rng);
    if (const auto* be = std::get_if<Beta1D>(&m)) {
        double g1 = std::gamma_distribution<double>(be->a, 1.0)(rng);
        double g2 = std::gamma_distribution<double>(be->b, 1.0)(rng);
        return g1 / (g1 + g2);
    }
    const auto& d = std::get<Discrete1D>(m);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        acc += d.probs[i];
        if (u <= acc) return d.values[i];
    }
    return d.values.back();
}

}  // namespace detail

inline EmpiricalMeasure sample(const ProductMeasure& pm, int count, uint64_t seed) {
    if (count < 1) throw InputError("sample: count must be >= 1");
    int n = pm.dimension();
    Matrix out(count, n);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < count; ++r)
        for (int j = 0; j < n; ++j)
            out(r, j) = detail::draw_marginal(pm.marginals()[static_cast<std::size_t>(j)], rng);
    return EmpiricalMeasure::equal_weights(std::move(out));
}

inline EmpiricalMeasure sample(const DiscreteLaw& law, int count, uint64_t seed) {
    if (count < 1) throw InputError("sample: count must be >= 1");
    Matrix out(count, 1);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < count; ++r) out(r, 0) = static_cast<double>(law.draw(rng));
    return EmpiricalMeasure::equal_weights(std::move(out));
}

// ---------------------------------------------------------------------------
// Variant wrapper used by the generic basis / fitting paths.
// ---------------------------------------------------------------------------

using Measure = std::variant<EmpiricalMeasure, GaussianMeasure, ProductMeasure>;

inline int dimension(const Measure& m) {
    return std::visit([](const auto& v) { return v.dimension(); }, m);
}

inline double moment(const Measure& m, const std::vector<int>& index) {
    return std::visit([&](const auto& v) { return v.moment(index); }, m);
}

inline EmpiricalMeasure sample(const Measure& m, int count, uint64_t seed) {
    if (const auto* e = std::get_if<EmpiricalMeasure>(&m)) {
        // Resample rows by weight.
        std::mt19937_64 rng(seed);
        std::discrete_distribution<int> pick(e->weights().data(),
                                             e->weights().data() + e->weights().size());
        Matrix out(count, e->dimension());
        for (int r = 0; r < count; ++r) out.row(r) = e->samples().row(pick(rng));
        return EmpiricalMeasure::equal_weights(std::move(out), e->variable_names());
    }
    if (const auto* g = std::get_if<GaussianMeasure>(&m)) return sample(*g, count, seed);
    return sample(std::get<ProductMeasure>(m), count, seed);
}

// Expectation of a polynomial under any measure with exact moments.
inline double expectation(const Measure& m, const Polynomial& p) {
    return p.expectation([&](const std::vector<int>& e) { return moment(m, e); });
}

inline double variance_of(const Measure& m, const Polynomial& p) {
    double mean = expectation(m, p);
    return expectation(m, p * p) - mean * mean;
}

}  // namespace hdmr
