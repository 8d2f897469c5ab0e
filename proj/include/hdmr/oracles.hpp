#pragma once

#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"
#include "hdmr/model.hpp"
#include "hdmr/polynomial.hpp"
#include "hdmr/sensitivity.hpp"

#include <cmath>
#include <numbers>

namespace hdmr {
namespace oracles {

// ---------------------------------------------------------------------------
// Bivariate correlated-Gaussian polynomial f = b0 + b1 x1 + b2 x2 + b12 x1 x2.
// ---------------------------------------------------------------------------

struct GaussPolyParams {
    double beta0 = 1.0, beta1 = 1.0, beta2 = 1.0, beta12 = 1.0;
    double mu1 = 0.0, mu2 = 0.0;
    double s1 = 1.0, s2 = 1.0;
    double rho = 0.0;

    GaussianMeasure measure() const {
        if (std::abs(rho) > 1.0) throw DomainError("gauss poly: |rho| must be <= 1");
        return GaussianMeasure::bivariate(mu1, mu2, s1, s2, rho);
    }
};

inline Polynomial gauss_poly_target(const GaussPolyParams& p) {
    Polynomial f = Polynomial::constant(2, p.beta0);
    f += Polynomial::variable(2, 0, p.beta1);
    f += Polynomial::variable(2, 1, p.beta2);
    f += Polynomial::monomial(2, {1, 1}, p.beta12);
    return f;
}

struct GaussPolyComponents {
    double f0 = 0.0;
    Polynomial f1{2}, f2{2}, f12{2};
};

inline GaussPolyComponents gauss_poly_components(const GaussPolyParams& p) {
    if (std::abs(p.rho) > 1.0) throw DomainError("gauss poly: |rho| must be <= 1");
    const double r = p.rho, s1 = p.s1, s2 = p.s2;
    const double c1 = p.beta1 + p.beta12 * p.mu2;
    const double c2 = p.beta2 + p.beta12 * p.mu1;
    const double q = r / (r * r + 1.0);

    Polynomial d1 = Polynomial::variable(2, 0) - Polynomial::constant(2, p.mu1);
    Polynomial d2 = Polynomial::variable(2, 1) - Polynomial::constant(2, p.mu2);

    GaussPolyComponents out;
    out.f0 = p.beta0 + p.beta1 * p.mu1 + p.beta2 * p.mu2 + p.beta12 * p.mu1 * p.mu2 +
             p.beta12 * r * s1 * s2;
    out.f1 = d1 * c1 + (d1 * d1 - Polynomial::constant(2, s1 * s1)) * (q * p.beta12 * s2 / s1);
    out.f2 = d2 * c2 + (d2 * d2 - Polynomial::constant(2, s2 * s2)) * (q * p.beta12 * s1 / s2);
    // f12 = b12 [ -r s2^2 ((r^2-1) s1^2 + d1^2) + (r^2+1) s1 s2 d1 d2 - r s1^2 d2^2 ]
    //       / ((r^2+1) s1 s2)
    Polynomial bracket =
        (Polynomial::constant(2, (r * r - 1.0) * s1 * s1) + d1 * d1) * (-r * s2 * s2) +
        d1 * d2 * ((r * r + 1.0) * s1 * s2) + d2 * d2 * (-r * s1 * s1);
    out.f12 = bracket * (p.beta12 / ((r * r + 1.0) * s1 * s2));
    return out;
}

struct GaussPolyIndices {
    ScsaTriple s1, s2, s12;
    double variance = 0.0;
};

inline GaussPolyIndices gauss_poly_indices(const GaussPolyParams& p) {
    const double r = p.rho, s1 = p.s1, s2 = p.s2, b12 = p.beta12;
    const double c1 = p.beta1 + b12 * p.mu2;
    const double c2 = p.beta2 + b12 * p.mu1;
    const double r2p1 = r * r + 1.0;
    const double D = 2.0 * r * s1 * s2 * c1 * c2 + s1 * s1 * c1 * c1 +
                     s2 * s2 * (c2 * c2 + b12 * b12 * r2p1 * s1 * s1);
    if (!(D > 0.0)) throw DegenerateError("gauss poly indices: zero target variance");

    GaussPolyIndices out;
    out.variance = D;
    out.s1.structural = s1 * s1 * (c1 * c1 + 2.0 * b12 * b12 * r * r * s2 * s2 / (r2p1 * r2p1)) / D;
    out.s2.structural = s2 * s2 * (c2 * c2 + 2.0 * b12 * b12 * r * r * s1 * s1 / (r2p1 * r2p1)) / D;
    out.s1.correlative =
        r * s1 * s2 * (r2p1 * r2p1 * c1 * c2 + 2.0 * b12 * b12 * r * r * r * s1 * s2) /
        (r2p1 * r2p1 * D);
    out.s2.correlative =
        r * s2 * s1 * (r2p1 * r2p1 * c2 * c1 + 2.0 * b12 * b12 * r * r * r * s2 * s1) /
        (r2p1 * r2p1 * D);
    out.s12.structural = b12 * b12 * (r * r - 1.0) * (r * r - 1.0) * s1 * s1 * s2 * s2 / (r2p1 * D);
    out.s12.correlative = 0.0;  // hierarchical orthogonality of f12, any rho
    out.s1.overall = out.s1.structural + out.s1.correlative;
    out.s2.overall = out.s2.structural + out.s2.correlative;
    out.s12.overall = out.s12.structural + out.s12.correlative;
    return out;
}

struct GaussPolyBasis {
    std::vector<Polynomial> phi1, phi2, phi12;  // zero-mean, unit-norm blocks
    double gamma0 = 0.0;
    Vector gamma1, gamma2, gamma12;
};

// Appendix expansion with the quadratic element in its normalized Hermite
// form ((x-mu)^2 - sigma^2)/(sqrt(2) sigma^2), which is the zero-mean version
// of the printed one.
inline GaussPolyBasis gauss_poly_correlated_basis(const GaussPolyParams& p) {
    const double r = p.rho, s1 = p.s1, s2 = p.s2;
    const double r2p1 = r * r + 1.0;
    const double ann = r * r + 4.0 / r2p1 - 3.0;  // = (r^2-1)^2/(r^2+1)
    if (std::abs(r) >= 1.0)
        throw DegenerateError("correlated basis: pair subspace annihilated at |rho| = 1");

    Polynomial d1 = Polynomial::variable(2, 0) - Polynomial::constant(2, p.mu1);
    Polynomial d2 = Polynomial::variable(2, 1) - Polynomial::constant(2, p.mu2);

    GaussPolyBasis out;
    out.phi1 = {d1 * (1.0 / s1),
                (d1 * d1 - Polynomial::constant(2, s1 * s1)) * (1.0 / (std::sqrt(2.0) * s1 * s1))};
    out.phi2 = {d2 * (1.0 / s2),
                (d2 * d2 - Polynomial::constant(2, s2 * s2)) * (1.0 / (std::sqrt(2.0) * s2 * s2))};
    Polynomial bracket =
        (Polynomial::constant(2, (r * r - 1.0) * s1 * s1) + d1 * d1) * (-r * s2 * s2) +
        d1 * d2 * (r2p1 * s1 * s2) + d2 * d2 * (-r * s1 * s1);
    out.phi12 = {bracket * (1.0 / (r2p1 * std::sqrt(ann) * s1 * s1 * s2 * s2))};

    out.gamma0 = p.beta0 + p.beta1 * p.mu1 + p.beta2 * p.mu2 + p.beta12 * p.mu1 * p.mu2 +
                 p.beta12 * r * s1 * s2;
    out.gamma1 = Vector(2);
    out.gamma1 << s1 * (p.beta1 + p.beta12 * p.mu2), std::sqrt(2.0) * p.beta12 * r * s1 * s2 / r2p1;
    out.gamma2 = Vector(2);
    out.gamma2 << s2 * (p.beta2 + p.beta12 * p.mu1), std::sqrt(2.0) * p.beta12 * r * s1 * s2 / r2p1;
    out.gamma12 = Vector(1);
    out.gamma12 << p.beta12 * std::sqrt(ann) * s1 * s2;
    return out;
}

// Exact HdmrModel over the closed forms; feeds scsa and the comparators.
inline HdmrModel gauss_poly_model(const GaussPolyParams& p) {
    auto comps = gauss_poly_components(p);
    Measure m = p.measure();

    HdmrModel model;
    model.constant = comps.f0;
    model.order = 2;
    model.input_dimension = 2;
    model.fitting_measure_id = "gaussian(rho=" + std::to_string(p.rho) + ")";
    model.total_variance = variance_of(m, gauss_poly_target(p));

    auto add = [&](const VariableSubset& u, const Polynomial& poly) {
        ComponentFunction c;
        c.subset = u;
        c.evaluator = [poly](const Vector& x) { return poly.evaluate(x); };
        model.components.emplace(u, std::move(c));
    };
    add(VariableSubset({0}), comps.f1);
    add(VariableSubset({1}), comps.f2);
    add(VariableSubset({0, 1}), comps.f12);

    std::vector<Polynomial> polys = {comps.f1, comps.f2, comps.f12};
    model.covariance.subsets = {VariableSubset({0}), VariableSubset({1}), VariableSubset({0, 1})};
    model.covariance.values.resize(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double cov = expectation(m, polys[static_cast<std::size_t>(i)] * polys[static_cast<std::size_t>(j)]) -
                         expectation(m, polys[static_cast<std::size_t>(i)]) * expectation(m, polys[static_cast<std::size_t>(j)]);
            model.covariance.values(i, j) = cov;
            model.covariance.values(j, i) = cov;
        }
    return model;
}

// ---------------------------------------------------------------------------
// Ishigami on Uniform[-pi,pi]^3.
// ---------------------------------------------------------------------------

struct IshigamiParams {
    double a = 7.0;
    double b = 0.1;
};

inline double ishigami(const IshigamiParams& p, const Vector& x) {
    if (x.size() != 3) throw ShapeError("ishigami: needs a 3-vector");
    double s1 = std::sin(x[0]);
    return s1 + p.a * std::sin(x[1]) * std::sin(x[1]) + p.b * std::pow(x[2], 4) * s1;
}

struct IshigamiComponents {
    double f0;
    std::function<double(double)> f1, f2;
    std::function<double(double, double)> f13;
};

inline IshigamiComponents ishigami_components(const IshigamiParams& p) {
    const double pi4 = std::pow(std::numbers::pi, 4);
    IshigamiComponents out;
    out.f0 = p.a / 2.0;
    out.f1 = [=](double x1) { return (1.0 + p.b * pi4 / 5.0) * std::sin(x1); };
    out.f2 = [=](double x2) { return -(p.a / 2.0) * std::cos(2.0 * x2); };
    out.f13 = [=](double x1, double x3) {
        return p.b * (std::pow(x3, 4) - pi4 / 5.0) * std::sin(x1);
    };
    return out;
}

struct IshigamiIndices {
    double s1, s2, s13;
    double variance;
};

inline IshigamiIndices ishigami_indices(const IshigamiParams& p) {
    const double pi4 = std::pow(std::numbers::pi, 4);
    const double pi8 = pi4 * pi4;
    const double denom = 45.0 * (p.a * p.a + 4.0) + 20.0 * pi8 * p.b * p.b + 72.0 * pi4 * p.b;
    IshigamiIndices out;
    out.s1 = 36.0 * (pi4 * p.b + 5.0) * (pi4 * p.b + 5.0) / (5.0 * denom);
    out.s2 = 45.0 * p.a * p.a / denom;
    out.s13 = 64.0 * pi8 * p.b * p.b / (5.0 * denom);
    out.variance = denom / 360.0;
    return out;
}

inline HdmrModel ishigami_model(const IshigamiParams& p) {
    auto comps = ishigami_components(p);
    const double pi4 = std::pow(std::numbers::pi, 4);
    const double pi8 = pi4 * pi4;

    HdmrModel model;
    model.constant = comps.f0;
    model.order = 3;
    model.input_dimension = 3;
    model.fitting_measure_id = "uniform(-pi,pi)^3";

    double var1 = 0.5 * std::pow(1.0 + p.b * pi4 / 5.0, 2);
    double var2 = p.a * p.a / 8.0;
    double var13 = 8.0 * p.b * p.b * pi8 / 225.0;
    model.total_variance = var1 + var2 + var13;

    struct Entry {
        VariableSubset u;
        std::function<double(const Vector&)> fn;
        double var;
    };
    std::vector<Entry> entries = {
        {VariableSubset({0}), [comps](const Vector& x) { return comps.f1(x[0]); }, var1},
        {VariableSubset({1}), [comps](const Vector& x) { return comps.f2(x[1]); }, var2},
        {VariableSubset({2}), [](const Vector&) { return 0.0; }, 0.0},
        {VariableSubset({0, 1}), [](const Vector&) { return 0.0; }, 0.0},
        {VariableSubset({0, 2}), [comps](const Vector& x) { return comps.f13(x[0], x[2]); }, var13},
        {VariableSubset({1, 2}), [](const Vector&) { return 0.0; }, 0.0},
        {VariableSubset({0, 1, 2}), [](const Vector&) { return 0.0; }, 0.0},
    };
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.u < b.u; });

    model.covariance.values = Matrix::Zero(static_cast<Eigen::Index>(entries.size()),
                                           static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (auto& e : entries) {
        ComponentFunction c;
        c.subset = e.u;
        c.evaluator = e.fn;
        model.components.emplace(e.u, std::move(c));
        model.covariance.subsets.push_back(e.u);
        model.covariance.values(i, i) = e.var;
        ++i;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Product function prod_i x_i with iid inputs, rho = sigma/mu.
// ---------------------------------------------------------------------------

namespace detail {

inline double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log((1+t)^n - 1) evaluated stably for small and large n t.
inline double log_pow_minus_one(double t, int n) {
    double L = n * std::log1p(t);
    return L + std::log1p(-std::exp(-L));
}

}  // namespace detail

// p{k}: total share of variance carried by the order-k subspaces.
inline double product_pk(int n, int k, double rho) {
    if (rho == 0.0) throw DegenerateError("product_pk: rho must be nonzero");
    if (k < 1 || k > n) throw InputError("product_pk: need 1 <= k <= n");
    double lp = detail::log_choose(n, k) + 2.0 * k * std::log(std::abs(rho)) -
                detail::log_pow_minus_one(rho * rho, n);
    return std::exp(lp);
}

// T_i = rho^2/(rho^2+1) * (rho^2+1)^n / ((rho^2+1)^n - 1); independent of i.
inline double product_total_importance(int n, double rho) {
    if (rho == 0.0) throw DegenerateError("product_total_importance: rho must be nonzero");
    double L = n * std::log1p(rho * rho);
    return rho * rho / (rho * rho + 1.0) / (-std::expm1(-L));
}

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials, tau = sigma/(mu+1).
// ---------------------------------------------------------------------------

inline double esp_tau(double mu, double sigma) { return sigma / (mu + 1.0); }

inline double esp_qk(int n, int k, double tau) {
    if (tau == 0.0) throw DegenerateError("esp_qk: tau must be nonzero");
    if (k < 1 || k > n) throw InputError("esp_qk: need 1 <= k <= n");
    double lq = detail::log_choose(n, k) + 2.0 * k * std::log(std::abs(tau)) -
                detail::log_pow_minus_one(tau * tau, n);
    return std::exp(lq);
}

// Conditional-expectation coefficients a_{rs} = sum_{k <= T-s} C(n-r, k) mu^k
// for the recursive ESP construction.
inline double esp_cond_coeff(int n, int T, int r, int s, double mu) {
    double acc = 0.0;
    double choose = 1.0, mupow = 1.0;
    for (int k = 0; k <= T - s && k <= n - r; ++k) {
        acc += choose * mupow;
        choose *= static_cast<double>(n - r - k) / static_cast<double>(k + 1);
        mupow *= mu;
    }
    return acc;
}

}  // namespace oracles
}  // namespace hdmr
