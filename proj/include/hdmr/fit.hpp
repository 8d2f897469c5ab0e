#pragma once

#include "hdmr/basis.hpp"
#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"
#include "hdmr/model.hpp"
#include "hdmr/quadrature.hpp"
#include "hdmr/subset.hpp"

#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

namespace hdmr {

using Predictor = std::function<double(const Vector&)>;

// ---------------------------------------------------------------------------
// Variational fit: one global weighted least-squares solve over all subspace
// blocks. Hierarchical (not mutual) orthogonality is what emerges for
// correlated measures, so per-block fitting would be wrong here.
// ---------------------------------------------------------------------------

inline HdmrModel fit(const Vector& response, const EmpiricalMeasure& measure, const BasisSpec& spec,
                     double ridge = 0.0, const std::string& measure_id = "empirical") {
    if (response.size() != measure.point_count())
        throw ShapeError("fit: response length != sample count");
    if (spec.max_order > measure.dimension())
        throw InputError("fit: max_order exceeds input dimension");
    if (ridge < 0.0) throw InputError("fit: ridge must be >= 0");

    Measure m = measure;
    std::map<VariableSubset, std::vector<RawElement>> blocks;
    for (const auto& u : subsets_up_to_order(measure.dimension(), spec.max_order))
        blocks[u] = raw_block(spec, u, m);
    auto bases = orthogonalize_system(blocks, m);

    Matrix phi = assemble_feature_matrix(bases, measure);
    Vector sqrt_w = measure.weights().array().sqrt();
    Matrix A = sqrt_w.asDiagonal() * phi;
    Vector y = sqrt_w.asDiagonal() * response;

    Vector gamma;
    bool fallback = false;
    if (ridge > 0.0) {
        Matrix normal = A.transpose() * A;
        normal.diagonal().array() += ridge;
        gamma = normal.ldlt().solve(A.transpose() * y);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
        cod.setThreshold(1e-10);
        gamma = cod.solve(y);
        fallback = cod.rank() < A.cols();
    }

    HdmrModel model;
    model.order = spec.max_order;
    model.input_dimension = measure.dimension();
    model.family = spec.family;
    model.degree = spec.degree;
    model.fitting_measure_id = measure_id;
    model.min_norm_fallback = fallback;
    if (fallback) model.notes.push_back("rank-deficient normal system; least-norm solution used");

    Eigen::Index at = 0;
    for (const auto& [u, basis] : bases) {
        Vector g = gamma.segment(at, basis.dim());
        at += basis.dim();
        if (u.is_empty()) {
            Vector one = Vector::Zero(measure.dimension());
            model.constant = basis.dim() > 0 ? g.dot(basis.evaluate(one)) : 0.0;
            continue;
        }
        for (const auto& name : basis.dropped())
            model.notes.push_back("dropped basis element " + name + " in block " + u.label());
        auto shared = std::make_shared<OrthogonalBasis>(basis);
        model.components.emplace(u, ComponentFunction::from_basis(shared, std::move(g)));
    }

    model.covariance = component_covariance(model.components, measure);
    double mean_y = measure.weights().dot(response);
    model.total_variance =
        (measure.weights().array() * (response.array() - mean_y).square()).sum();
    return model;
}

inline HdmrModel fit(const Predictor& target, const EmpiricalMeasure& measure, const BasisSpec& spec,
                     double ridge = 0.0, const std::string& measure_id = "empirical") {
    Vector response(measure.point_count());
    for (Eigen::Index r = 0; r < measure.samples().rows(); ++r)
        response[r] = target(measure.samples().row(r));
    return fit(response, measure, spec, ridge, measure_id);
}

// ---------------------------------------------------------------------------
// Recursive construction for product measures: tensor-quadrature conditional
// means minus all lower-order terms. Exact mutual orthogonality, no fitting.
// ---------------------------------------------------------------------------

namespace detail {

struct RecursiveState {
    Predictor predictor;
    std::vector<QuadratureRule> rules;
    double f0 = 0.0;
    // Component values on the subset grids, keyed by subset; used for
    // variance computation and reused by the arbitrary-point closures.
    std::map<VariableSubset, std::vector<double>> grid_values;

    int dims() const { return static_cast<int>(rules.size()); }

    // Conditional mean M^u f at an arbitrary slice x_u: quadrature over the
    // complement grid.
    double conditional_mean(const VariableSubset& u, const Vector& x) const {
        std::vector<int> comp;
        for (int j = 0; j < dims(); ++j)
            if (!u.contains(j)) comp.push_back(j);
        Vector point = x;
        double acc = 0.0;
        std::vector<int> idx(comp.size(), 0);
        while (true) {
            double w = 1.0;
            for (std::size_t c = 0; c < comp.size(); ++c) {
                const auto& rule = rules[static_cast<std::size_t>(comp[c])];
                point[comp[c]] = rule.nodes[idx[c]];
                w *= rule.weights[idx[c]];
            }
            acc += w * predictor(point);
            std::size_t c = 0;
            for (; c < comp.size(); ++c) {
                if (++idx[c] < rules[static_cast<std::size_t>(comp[c])].nodes.size()) break;
                idx[c] = 0;
            }
            if (c == comp.size()) break;
        }
        return acc;
    }

    double component(const VariableSubset& u, const Vector& x) const {
        double val = conditional_mean(u, x) - f0;
        for (const auto& w : power_set(u)) {
            if (w.is_empty() || w == u) continue;
            val -= component(w, x);
        }
        return val;
    }
};

}  // namespace detail

inline HdmrModel fit_recursive(const Predictor& predictor, const ProductMeasure& measure,
                               const BasisSpec& spec, int quadrature_points = 64) {
    int n = measure.dimension();
    int T = std::min(spec.max_order, n);
    if (quadrature_points < 1) throw InputError("fit_recursive: quadrature_points >= 1");

    auto state = std::make_shared<detail::RecursiveState>();
    state->predictor = predictor;
    for (const auto& marg : measure.marginals())
        state->rules.push_back(marginal_quadrature(marg, quadrature_points));

    std::size_t grid_size = 1;
    for (const auto& r : state->rules) {
        grid_size *= static_cast<std::size_t>(r.nodes.size());
        if (grid_size > (1u << 27))
            throw CapacityError("fit_recursive: full tensor grid too large; lower quadrature_points");
    }

    // Full tensor pass: predictor values over the product grid. Weights are
    // separable, so they are recomputed on the fly instead of stored.
    std::vector<double> f_grid(grid_size);
    double f0 = 0.0, total_var = 0.0;
    {
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        Vector x(n);
        for (std::size_t flat = 0; flat < grid_size; ++flat) {
            double w = 1.0;
            for (int j = 0; j < n; ++j) {
                const auto& rule = state->rules[static_cast<std::size_t>(j)];
                x[j] = rule.nodes[idx[static_cast<std::size_t>(j)]];
                w *= rule.weights[idx[static_cast<std::size_t>(j)]];
            }
            f_grid[flat] = predictor(x);
            f0 += w * f_grid[flat];
            total_var += w * f_grid[flat] * f_grid[flat];
            for (int j = 0; j < n; ++j) {
                if (++idx[static_cast<std::size_t>(j)] < state->rules[static_cast<std::size_t>(j)].nodes.size()) break;
                idx[static_cast<std::size_t>(j)] = 0;
            }
        }
    }
    total_var -= f0 * f0;
    state->f0 = f0;

    auto subsets = subsets_up_to_order(n, T);

    // Contract the full tensor down to each subset grid, then peel off the
    // lower-order terms. Everything stays on grids until closure time.
    std::map<VariableSubset, Vector> subset_weights;
    for (const auto& u : subsets) {
        if (u.is_empty()) continue;
        std::size_t u_size = 1;
        for (int j : u.indices()) u_size *= static_cast<std::size_t>(state->rules[static_cast<std::size_t>(j)].nodes.size());
        std::vector<double> m_u(u_size, 0.0);
        std::vector<double> w_u(u_size, 0.0);

        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        for (std::size_t flat = 0; flat < grid_size; ++flat) {
            std::size_t uflat = 0;
            double wu = 1.0, w = 1.0;
            for (int j = 0; j < n; ++j)
                w *= state->rules[static_cast<std::size_t>(j)].weights[idx[static_cast<std::size_t>(j)]];
            for (int j : u.indices()) {
                uflat = uflat * static_cast<std::size_t>(state->rules[static_cast<std::size_t>(j)].nodes.size()) +
                        static_cast<std::size_t>(idx[static_cast<std::size_t>(j)]);
                wu *= state->rules[static_cast<std::size_t>(j)].weights[idx[static_cast<std::size_t>(j)]];
            }
            m_u[uflat] += w * f_grid[flat];
            w_u[uflat] = wu;
            for (int j = 0; j < n; ++j) {
                if (++idx[static_cast<std::size_t>(j)] < state->rules[static_cast<std::size_t>(j)].nodes.size()) break;
                idx[static_cast<std::size_t>(j)] = 0;
            }
        }
        // m_u currently holds weight-included sums over the complement times
        // the subset weight; normalize to the conditional mean.
        for (std::size_t i = 0; i < u_size; ++i) m_u[i] = w_u[i] > 0.0 ? m_u[i] / w_u[i] : 0.0;

        // Subtract f0 and every strict-subset component (broadcast on grids).
        std::vector<double> comp = m_u;
        for (double& v : comp) v -= f0;
        for (const auto& w : power_set(u)) {
            if (w.is_empty() || w == u) continue;
            const auto& lower = state->grid_values.at(w);
            // Position of w's variables inside u's odometer.
            std::vector<int> pos;
            for (int wv : w.indices())
                for (int i = 0; i < u.size(); ++i)
                    if (u.indices()[static_cast<std::size_t>(i)] == wv) pos.push_back(i);
            std::vector<int> uidx(static_cast<std::size_t>(u.size()), 0);
            for (std::size_t flat = 0; flat < u_size; ++flat) {
                std::size_t wflat = 0;
                for (std::size_t c = 0; c < pos.size(); ++c) {
                    int var = w.indices()[c];
                    wflat = wflat * static_cast<std::size_t>(state->rules[static_cast<std::size_t>(var)].nodes.size()) +
                            static_cast<std::size_t>(uidx[static_cast<std::size_t>(pos[c])]);
                }
                comp[flat] -= lower[wflat];
                for (int j = u.size() - 1; j >= 0; --j) {
                    int var = u.indices()[static_cast<std::size_t>(j)];
                    if (++uidx[static_cast<std::size_t>(j)] <
                        state->rules[static_cast<std::size_t>(var)].nodes.size())
                        break;
                    uidx[static_cast<std::size_t>(j)] = 0;
                }
            }
        }
        state->grid_values[u] = std::move(comp);
        Vector wv(static_cast<Eigen::Index>(u_size));
        for (std::size_t i = 0; i < u_size; ++i) wv[static_cast<Eigen::Index>(i)] = w_u[i];
        subset_weights[u] = std::move(wv);
    }

    HdmrModel model;
    model.constant = f0;
    model.order = T;
    model.input_dimension = n;
    model.total_variance = total_var;
    model.fitting_measure_id = "product-quadrature";
    model.family = spec.family;
    model.degree = spec.degree;

    for (const auto& u : subsets) {
        if (u.is_empty()) continue;
        ComponentFunction c;
        c.subset = u;
        c.evaluator = [state, u](const Vector& x) { return state->component(u, x); };
        model.components.emplace(u, std::move(c));
    }

    // Mutual orthogonality is exact under a product measure: the covariance
    // table is diagonal with quadrature variances.
    model.covariance.subsets.clear();
    for (const auto& [u, c] : model.components) model.covariance.subsets.push_back(u);
    Eigen::Index m = static_cast<Eigen::Index>(model.covariance.subsets.size());
    model.covariance.values = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& u = model.covariance.subsets[static_cast<std::size_t>(i)];
        const auto& vals = state->grid_values.at(u);
        const auto& wv = subset_weights.at(u);
        double var = 0.0;
        for (std::size_t g = 0; g < vals.size(); ++g)
            var += wv[static_cast<Eigen::Index>(g)] * vals[g] * vals[g];
        model.covariance.values(i, i) = var;
    }
    return model;
}

// The recursion in fit_recursive requires mutual orthogonality of the
// conditional means, which fails under correlation; guard explicitly.
inline HdmrModel fit_recursive(const Predictor&, const GaussianMeasure& measure, const BasisSpec&,
                               int = 64) {
    (void)measure;
    throw InputError(
        "fit_recursive requires a product measure; the recursive construction does not hold for "
        "correlated inputs");
}

}  // namespace hdmr
