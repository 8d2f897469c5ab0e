#pragma once

#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"
#include "hdmr/oracles.hpp"
#include "hdmr/polynomial.hpp"
#include "hdmr/sensitivity.hpp"
#include "hdmr/subset.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hdmr {

using Predictor = std::function<double(const Vector&)>;

// ---------------------------------------------------------------------------
// Partial dependence profiles.
//
// Centering conventions matter here. Raw profile values are stored
// uncentered; centered() subtracts the profile's own mean under mu_u (this is
// what the printed f~_1^PD = x_1 display corresponds to), while the
// importance functional subtracts the model constant f0 = E_mu[f] and takes
// uncentered second moments, which is the convention that reproduces the
// closed-form variable-importance table.
// ---------------------------------------------------------------------------

struct PdProfile {
    enum class Variant { Marginal, Conditional };
    VariableSubset subset;
    Variant variant = Variant::Marginal;
    Matrix grid;             // (#points x |u|), strictly increasing per axis
    Vector values;           // raw profile values
    std::vector<bool> mask;  // true = starved neighborhood, value still emitted
    double profile_mean = 0.0;  // integral of the profile under mu_u
    double f0 = 0.0;            // E_mu[f]

    Vector centered() const { return values.array() - profile_mean; }

    // Piecewise-linear evaluation (singleton profiles), clamped at the ends.
    double interpolate(double x) const {
        if (grid.cols() != 1) throw InputError("PdProfile::interpolate: singleton profiles only");
        Eigen::Index n = grid.rows();
        if (x <= grid(0, 0)) return values[0];
        if (x >= grid(n - 1, 0)) return values[n - 1];
        Eigen::Index lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            Eigen::Index mid = (lo + hi) / 2;
            (grid(mid, 0) <= x ? lo : hi) = mid;
        }
        double t = (x - grid(lo, 0)) / (grid(hi, 0) - grid(lo, 0));
        return (1.0 - t) * values[lo] + t * values[hi];
    }
};

// Default grid: 64 points spanning the 1st-99th percentile of each column.
inline Matrix pd_default_grid(const EmpiricalMeasure& m, const VariableSubset& u, int points = 64) {
    Matrix grid(points, u.size());
    for (int c = 0; c < u.size(); ++c) {
        int var = u.indices()[static_cast<std::size_t>(c)];
        std::vector<double> col(m.samples().col(var).data(),
                                m.samples().col(var).data() + m.point_count());
        std::sort(col.begin(), col.end());
        auto pct = [&](double q) {
            double pos = q * (static_cast<double>(col.size()) - 1.0);
            std::size_t i = static_cast<std::size_t>(pos);
            double t = pos - static_cast<double>(i);
            return i + 1 < col.size() ? (1.0 - t) * col[i] + t * col[i + 1] : col.back();
        };
        double lo = pct(0.01), hi = pct(0.99);
        for (int g = 0; g < points; ++g)
            grid(g, c) = lo + (hi - lo) * g / (points - 1.0);
    }
    return grid;
}

// Marginal partial dependence: average the predictor over the complement
// sample with the slice pinned to each grid point.
inline PdProfile pd_marginal(const Predictor& f, const EmpiricalMeasure& m, const VariableSubset& u,
                             const Matrix& grid) {
    if (grid.rows() == 0) throw DomainError("pd_marginal: empty grid");
    if (grid.cols() != u.size()) throw ShapeError("pd_marginal: grid width != subset size");
    PdProfile out;
    out.subset = u;
    out.variant = PdProfile::Variant::Marginal;
    out.grid = grid;
    out.values.resize(grid.rows());
    out.mask.assign(static_cast<std::size_t>(grid.rows()), false);

    Vector point(m.dimension());
    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
        double acc = 0.0;
        for (int r = 0; r < m.point_count(); ++r) {
            point = m.samples().row(r);
            for (int c = 0; c < u.size(); ++c) point[u.indices()[static_cast<std::size_t>(c)]] = grid(g, c);
            acc += m.weights()[r] * f(point);
        }
        out.values[g] = acc;
    }

    double f0 = 0.0;
    for (int r = 0; r < m.point_count(); ++r) f0 += m.weights()[r] * f(m.samples().row(r));
    out.f0 = f0;
    if (u.size() == 1) {
        double mean = 0.0;
        for (int r = 0; r < m.point_count(); ++r)
            mean += m.weights()[r] * out.interpolate(m.samples()(r, u.indices()[0]));
        out.profile_mean = mean;
    } else {
        out.profile_mean = out.values.mean();
    }
    return out;
}

// Conditional partial dependence through a Gaussian product smoother with
// Silverman bandwidths; points with fewer than `min_neighbors` effective
// neighbors are flagged, not dropped.
inline PdProfile pd_conditional(const Predictor& f, const EmpiricalMeasure& m,
                                const VariableSubset& u, const Matrix& grid,
                                double bandwidth = 0.0, double min_neighbors = 30.0) {
    if (grid.rows() == 0) throw DomainError("pd_conditional: empty grid");
    if (grid.cols() != u.size()) throw ShapeError("pd_conditional: grid width != subset size");
    PdProfile out;
    out.subset = u;
    out.variant = PdProfile::Variant::Conditional;
    out.grid = grid;
    out.values.resize(grid.rows());
    out.mask.assign(static_cast<std::size_t>(grid.rows()), false);

    Vector h(u.size());
    for (int c = 0; c < u.size(); ++c) {
        if (bandwidth > 0.0) {
            h[c] = bandwidth;
        } else {
            int var = u.indices()[static_cast<std::size_t>(c)];
            double mean = m.samples().col(var).mean();
            double sd = std::sqrt((m.samples().col(var).array() - mean).square().mean());
            h[c] = 1.06 * sd * std::pow(static_cast<double>(m.point_count()), -0.2);
        }
    }

    Vector fx(m.point_count());
    for (int r = 0; r < m.point_count(); ++r) fx[r] = f(m.samples().row(r));
    out.f0 = m.weights().dot(fx);

    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
        double wsum = 0.0, w2sum = 0.0, acc = 0.0;
        for (int r = 0; r < m.point_count(); ++r) {
            double q = 0.0;
            for (int c = 0; c < u.size(); ++c) {
                double d = (m.samples()(r, u.indices()[static_cast<std::size_t>(c)]) - grid(g, c)) / h[c];
                q += d * d;
            }
            double k = m.weights()[r] * std::exp(-0.5 * q);
            wsum += k;
            w2sum += k * k;
            acc += k * fx[r];
        }
        // (sum w K)^2 / sum (w K)^2 reduces to the plain neighbor count for
        // equal weights and a boxcar kernel
        double ess = w2sum > 0.0 ? wsum * wsum / w2sum : 0.0;
        if (ess < min_neighbors || wsum <= 0.0) out.mask[static_cast<std::size_t>(g)] = true;
        out.values[g] = wsum > 0.0 ? acc / wsum : 0.0;
    }

    if (u.size() == 1) {
        double mean = 0.0;
        for (int r = 0; r < m.point_count(); ++r)
            mean += m.weights()[r] * out.interpolate(m.samples()(r, u.indices()[0]));
        out.profile_mean = mean;
    } else {
        out.profile_mean = out.values.mean();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact polynomial paths for analytic measures.
// ---------------------------------------------------------------------------

// M^u f: integrate the complement against its marginal law.
inline Polynomial pd_marginal_poly(const Polynomial& f, const Measure& m, const VariableSubset& u) {
    int n = f.n_vars();
    Polynomial out(n);
    for (const auto& [e, c] : f.terms()) {
        std::vector<int> kept(e.size(), 0), complement(e.size(), 0);
        for (std::size_t v = 0; v < e.size(); ++v)
            (u.contains(static_cast<int>(v)) ? kept[v] : complement[v]) = e[v];
        double scale = moment(m, complement);
        out.add_term(kept, c * scale);
    }
    return out;
}

// E[f | x_u] for a Gaussian measure: substitute the conditional affine map
// x_rest = offset + coef x_u + L z and average the z's out exactly.
inline Polynomial pd_conditional_poly(const Polynomial& f, const GaussianMeasure& g,
                                      const VariableSubset& u) {
    int n = f.n_vars();
    auto cond = g.conditional(u.indices());
    int nz = static_cast<int>(cond.rest.size());
    int ext = n + nz;  // variables [0..n) are x, [n..n+nz) are z

    std::vector<Polynomial> images;
    images.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        auto it = std::find(cond.rest.begin(), cond.rest.end(), v);
        if (it == cond.rest.end()) {
            images.push_back(Polynomial::variable(ext, v));
            continue;
        }
        int r = static_cast<int>(it - cond.rest.begin());
        Polynomial img = Polynomial::constant(ext, cond.offset[r]);
        for (std::size_t gidx = 0; gidx < cond.given.size(); ++gidx)
            img += Polynomial::variable(ext, cond.given[gidx], cond.coef(r, static_cast<Eigen::Index>(gidx)));
        img += Polynomial::variable(ext, n + r);  // noise slot
        images.push_back(std::move(img));
    }
    Polynomial substituted = f.substitute(images);

    // Average out the noise block under N(0, cond.cov).
    Polynomial reduced(ext);
    Vector zero_mean = Vector::Zero(nz);
    for (const auto& [e, c] : substituted.terms()) {
        std::vector<int> zpart(e.begin() + n, e.end());
        std::vector<int> xpart = e;
        for (int z = 0; z < nz; ++z) xpart[static_cast<std::size_t>(n + z)] = 0;
        std::map<std::vector<int>, double> memo;
        double zmoment = nz == 0 ? 1.0 : detail::gaussian_moment_rec(zero_mean, cond.cov, zpart, memo);
        reduced.add_term(xpart, c * zmoment);
    }
    std::vector<int> keep(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) keep[static_cast<std::size_t>(v)] = v;
    return reduced.restrict_to(keep);
}

// Evaluate an exact profile polynomial into the PdProfile container.
inline PdProfile pd_profile_from_poly(const Polynomial& profile, const Measure& m,
                                      const VariableSubset& u, const Matrix& grid, double f0,
                                      PdProfile::Variant variant) {
    PdProfile out;
    out.subset = u;
    out.variant = variant;
    out.grid = grid;
    out.values.resize(grid.rows());
    out.mask.assign(static_cast<std::size_t>(grid.rows()), false);
    out.f0 = f0;
    out.profile_mean = expectation(m, profile);
    Vector x = Vector::Zero(dimension(m));
    for (Eigen::Index g = 0; g < grid.rows(); ++g) {
        for (int c = 0; c < u.size(); ++c) x[u.indices()[static_cast<std::size_t>(c)]] = grid(g, c);
        out.values[g] = profile.evaluate(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PD importance: uncentered L2 moments of (profile - f0), singleton family.
// ---------------------------------------------------------------------------

struct PdIndices {
    std::map<int, ScsaTriple> per_variable;

    ScsaTriple sum() const {
        ScsaTriple out;
        for (const auto& [i, t] : per_variable) {
            out.structural += t.structural;
            out.correlative += t.correlative;
            out.overall += t.overall;
        }
        return out;
    }
};

inline PdIndices pd_sensitivity(const std::vector<PdProfile>& profiles, const EmpiricalMeasure& m,
                                double var_f) {
    if (!(var_f > 0.0)) throw DegenerateError("pd_sensitivity: zero target variance");
    for (const auto& p : profiles)
        if (p.subset.size() != 1) throw InputError("pd_sensitivity: profiles must be singletons");
    Eigen::Index k = static_cast<Eigen::Index>(profiles.size());
    Matrix vals(m.point_count(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& p = profiles[static_cast<std::size_t>(j)];
        int var = p.subset.indices()[0];
        for (int r = 0; r < m.point_count(); ++r)
            vals(r, j) = p.interpolate(m.samples()(r, var)) - p.f0;
    }
    Matrix second = vals.transpose() * m.weights().asDiagonal() * vals;
    PdIndices out;
    for (Eigen::Index j = 0; j < k; ++j) {
        ScsaTriple t;
        t.structural = second(j, j) / var_f;
        for (Eigen::Index i = 0; i < k; ++i)
            if (i != j) t.correlative += second(j, i) / var_f;
        t.overall = t.structural + t.correlative;
        out.per_variable[profiles[static_cast<std::size_t>(j)].subset.indices()[0]] = t;
    }
    return out;
}

inline PdIndices pd_sensitivity_poly(const std::vector<std::pair<int, Polynomial>>& profiles,
                                     const Measure& m, double f0, double var_f) {
    if (!(var_f > 0.0)) throw DegenerateError("pd_sensitivity: zero target variance");
    PdIndices out;
    std::vector<Polynomial> centered;
    for (const auto& [var, p] : profiles) centered.push_back(p - Polynomial::constant(p.n_vars(), f0));
    for (std::size_t j = 0; j < profiles.size(); ++j) {
        ScsaTriple t;
        t.structural = expectation(m, centered[j] * centered[j]) / var_f;
        for (std::size_t i = 0; i < profiles.size(); ++i)
            if (i != j) t.correlative += expectation(m, centered[j] * centered[i]) / var_f;
        t.overall = t.structural + t.correlative;
        out.per_variable[profiles[j].first] = t;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Derivative-based global sensitivity measures, w_u = 1.
// ---------------------------------------------------------------------------

// Exact path: mixed partial of a polynomial, second moment under the measure.
inline double dgsm_raw(const Polynomial& f, const Measure& m, const std::vector<int>& alpha) {
    Polynomial d = f.derivative(alpha);
    return expectation(m, d * d);
}

namespace detail {

inline Predictor mixed_partial(const Predictor& f, const std::vector<int>& alpha, double h) {
    Predictor cur = f;
    for (std::size_t v = 0; v < alpha.size(); ++v) {
        for (int k = 0; k < alpha[v]; ++k) {
            Predictor prev = cur;
            int var = static_cast<int>(v);
            cur = [prev, var, h](const Vector& x) {
                Vector xp = x, xm = x;
                xp[var] += h;
                xm[var] -= h;
                return (prev(xp) - prev(xm)) / (2.0 * h);
            };
        }
    }
    return cur;
}

}  // namespace detail

// Finite-difference path over an arbitrary predictor and empirical measure.
inline double dgsm_raw(const Predictor& f, const EmpiricalMeasure& m, const std::vector<int>& alpha,
                       double h = 1e-4) {
    if (static_cast<int>(alpha.size()) != m.dimension())
        throw ShapeError("dgsm_raw: multi-index length != dimension");
    Predictor d = detail::mixed_partial(f, alpha, h);
    double acc = 0.0;
    for (int r = 0; r < m.point_count(); ++r) {
        double v = d(m.samples().row(r));
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "dgsm: non-finite derivative at sample row " << r;
            throw Error(os.str());
        }
        acc += m.weights()[r] * v * v;
    }
    return acc;
}

// Normalized family: each requested multi-index divided by the family total.
template <typename F, typename M>
inline std::vector<double> dgsm(const F& f, const M& m, const std::vector<std::vector<int>>& family,
                                bool normalized) {
    std::vector<double> vals;
    vals.reserve(family.size());
    for (const auto& alpha : family) vals.push_back(dgsm_raw(f, m, alpha));
    if (normalized) {
        double total = 0.0;
        for (double v : vals) total += v;
        if (total <= 0.0) throw DegenerateError("dgsm: zero derivative norm");
        for (double& v : vals) v /= total;
    }
    return vals;
}

// ---------------------------------------------------------------------------
// The analytic comparison table for the bivariate polynomial at beta = 1,
// mu = 0, sigma = 1 (summed over the two variables).
// ---------------------------------------------------------------------------

struct ComparisonRow {
    double structural = 0.0, correlative = 0.0, overall = 0.0;
};

struct ComparisonTable {
    double rho = 0.0;
    ComparisonRow hdmr, pd_marginal, pd_conditional;
    double dgsm_f = 0.0;         // normalized, first-order sum, target f
    double dgsm_variance = 0.0;  // normalized, first-order sum, target sigma_f^2(beta) at beta=1
};

inline ComparisonTable comparison_table(double rho) {
    oracles::GaussPolyParams p;
    p.rho = rho;
    Measure m = p.measure();
    Polynomial f = oracles::gauss_poly_target(p);
    double var_f = variance_of(m, f);
    double f0 = expectation(m, f);

    ComparisonTable out;
    out.rho = rho;

    auto ix = oracles::gauss_poly_indices(p);
    out.hdmr = {ix.s1.structural + ix.s2.structural, ix.s1.correlative + ix.s2.correlative,
                ix.s1.overall + ix.s2.overall};

    std::vector<std::pair<int, Polynomial>> marg = {{0, pd_marginal_poly(f, m, VariableSubset({0}))},
                                                    {1, pd_marginal_poly(f, m, VariableSubset({1}))}};
    auto marg_ix = pd_sensitivity_poly(marg, m, f0, var_f).sum();
    out.pd_marginal = {marg_ix.structural, marg_ix.correlative, marg_ix.overall};

    const auto& g = std::get<GaussianMeasure>(m);
    std::vector<std::pair<int, Polynomial>> cond = {{0, pd_conditional_poly(f, g, VariableSubset({0}))},
                                                    {1, pd_conditional_poly(f, g, VariableSubset({1}))}};
    auto cond_ix = pd_sensitivity_poly(cond, m, f0, var_f).sum();
    out.pd_conditional = {cond_ix.structural, cond_ix.correlative, cond_ix.overall};

    std::vector<std::vector<int>> family = {{1, 0}, {0, 1}, {1, 1}};
    auto dg = dgsm(f, m, family, true);
    out.dgsm_f = dg[0] + dg[1];

    // sigma_f^2 as a function of beta = (b1, b2, b12), evaluated at beta = 1.
    Polynomial var_poly(3);
    var_poly += Polynomial::monomial(3, {2, 0, 0}, 1.0);
    var_poly += Polynomial::monomial(3, {0, 2, 0}, 1.0);
    var_poly += Polynomial::monomial(3, {1, 1, 0}, 2.0 * rho);
    var_poly += Polynomial::monomial(3, {0, 0, 2}, rho * rho + 1.0);
    Matrix beta_point(1, 3);
    beta_point << 1.0, 1.0, 1.0;
    Measure point_mass = EmpiricalMeasure::equal_weights(beta_point);
    std::vector<std::vector<int>> bfamily = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    auto dgb = dgsm(var_poly, point_mass, bfamily, true);
    out.dgsm_variance = dgb[0] + dgb[1];
    return out;
}

}  // namespace hdmr
