#pragma once

#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"
#include "hdmr/polynomial.hpp"
#include "hdmr/subset.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hdmr {

enum class BasisFamily { Monomial, Fourier, TreeIndicator };

inline std::string family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::Monomial: return "monomial";
        case BasisFamily::Fourier: return "fourier";
        case BasisFamily::TreeIndicator: return "tree-indicator";
    }
    return "?";
}

inline BasisFamily family_from_name(const std::string& s) {
    if (s == "monomial") return BasisFamily::Monomial;
    if (s == "fourier") return BasisFamily::Fourier;
    if (s == "tree-indicator") return BasisFamily::TreeIndicator;
    throw InputError("unknown basis family: " + s);
}

struct BasisSpec {
    BasisFamily family = BasisFamily::Monomial;
    int degree = 2;     // per-variable degree d
    int max_order = 2;  // largest subset size T
    // Box domain for the Fourier family; when empty it is derived from the
    // measure (uniform marginals, or per-column sample range).
    std::vector<std::pair<double, double>> box;
};

struct TrigFactor {
    int var = 0;
    int k = 1;
    bool is_sin = true;
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;
};

// One raw (pre-orthogonalization) basis function. Monomials and trig tensors
// carry enough structure for exact moments; everything else evaluates through
// a callable (aggregated tree functions).
struct RawElement {
    VariableSubset subset;
    std::string name;
    std::optional<std::vector<int>> powers;        // full-length exponent vector
    std::optional<std::vector<TrigFactor>> trig;   // product of sin/cos factors
    std::function<double(const Vector&)> callable;

    bool is_monomial() const { return powers.has_value(); }
    bool is_trig() const { return trig.has_value(); }

    double eval(const Vector& x) const {
        if (powers) {
            double t = 1.0;
            for (std::size_t v = 0; v < powers->size(); ++v)
                for (int p = 0; p < (*powers)[v]; ++p) t *= x[static_cast<Eigen::Index>(v)];
            return t;
        }
        if (trig) {
            double t = 1.0;
            for (const auto& f : *trig) {
                double s = -std::numbers::pi +
                           2.0 * std::numbers::pi * (x[f.var] - f.lo) / (f.hi - f.lo);
                t *= f.is_sin ? std::sin(f.k * s) : std::cos(f.k * s);
            }
            return t;
        }
        return callable(x);
    }
};

inline RawElement constant_element(int n_vars) {
    RawElement e;
    e.subset = VariableSubset::empty();
    e.name = "1";
    e.powers = std::vector<int>(static_cast<std::size_t>(n_vars), 0);
    return e;
}

namespace detail {

inline std::vector<std::pair<double, double>> resolve_box(const BasisSpec& spec,
                                                          const Measure& measure) {
    int n = dimension(measure);
    if (!spec.box.empty()) {
        if (static_cast<int>(spec.box.size()) != n) throw ShapeError("BasisSpec box size != n");
        return spec.box;
    }
    std::vector<std::pair<double, double>> box(static_cast<std::size_t>(n));
    if (const auto* pm = std::get_if<ProductMeasure>(&measure)) {
        for (int j = 0; j < n; ++j) {
            const auto& marg = pm->marginals()[static_cast<std::size_t>(j)];
            if (const auto* u = std::get_if<Uniform1D>(&marg))
                box[static_cast<std::size_t>(j)] = {u->a, u->b};
            else if (const auto* be = std::get_if<Beta1D>(&marg)) {
                (void)be;
                box[static_cast<std::size_t>(j)] = {0.0, 1.0};
            } else
                throw InputError("Fourier basis: point-mass marginal has no box domain");
        }
        return box;
    }
    if (const auto* em = std::get_if<EmpiricalMeasure>(&measure)) {
        for (int j = 0; j < n; ++j)
            box[static_cast<std::size_t>(j)] = {em->samples().col(j).minCoeff(),
                                                em->samples().col(j).maxCoeff()};
        return box;
    }
    throw InputError("Fourier basis requires a box domain; Gaussian measures are unbounded");
}

}  // namespace detail

// Raw basis block owned by one subset: tensor products over exactly the
// subset's variables. Lower-order terms live in the ancestor blocks.
inline std::vector<RawElement> raw_block(const BasisSpec& spec, const VariableSubset& subset,
                                         const Measure& measure) {
    int n = dimension(measure);
    for (int i : subset.indices())
        if (i >= n) throw ShapeError("raw_block: subset index out of range");
    if (subset.size() > spec.max_order)
        throw InputError("raw_block: subset larger than basis max_order");
    if (subset.is_empty()) return {constant_element(n)};
    if (spec.degree < 1) throw InputError("raw_block: degree must be >= 1");

    std::vector<RawElement> out;
    int k = subset.size();
    if (spec.family == BasisFamily::Monomial) {
        std::vector<int> p(static_cast<std::size_t>(k), 1);
        while (true) {
            RawElement e;
            e.subset = subset;
            e.powers = std::vector<int>(static_cast<std::size_t>(n), 0);
            std::string nm;
            for (int i = 0; i < k; ++i) {
                int var = subset.indices()[static_cast<std::size_t>(i)];
                (*e.powers)[static_cast<std::size_t>(var)] = p[static_cast<std::size_t>(i)];
                nm += (i ? "*" : "") + std::string("x") + std::to_string(var + 1);
                if (p[static_cast<std::size_t>(i)] > 1) nm += "^" + std::to_string(p[static_cast<std::size_t>(i)]);
            }
            e.name = nm;
            out.push_back(std::move(e));
            int i = k - 1;
            while (i >= 0 && p[static_cast<std::size_t>(i)] == spec.degree) {
                p[static_cast<std::size_t>(i)] = 1;
                --i;
            }
            if (i < 0) break;
            ++p[static_cast<std::size_t>(i)];
        }
        return out;
    }
    if (spec.family == BasisFamily::Fourier) {
        auto box = detail::resolve_box(spec, measure);
        // Per variable: sin(k t), cos(k t) for k = 1..d, t mapped onto the
        // period; all zero-mean under the uniform law on the box.
        int options = 2 * spec.degree;
        std::vector<int> pick(static_cast<std::size_t>(k), 0);
        while (true) {
            RawElement e;
            e.subset = subset;
            e.trig = std::vector<TrigFactor>();
            std::string nm;
            for (int i = 0; i < k; ++i) {
                int var = subset.indices()[static_cast<std::size_t>(i)];
                int opt = pick[static_cast<std::size_t>(i)];
                TrigFactor f;
                f.var = var;
                f.k = opt / 2 + 1;
                f.is_sin = (opt % 2 == 0);
                f.lo = box[static_cast<std::size_t>(var)].first;
                f.hi = box[static_cast<std::size_t>(var)].second;
                e.trig->push_back(f);
                nm += (i ? "*" : "") + std::string(f.is_sin ? "sin" : "cos") + "(" +
                      std::to_string(f.k) + "t" + std::to_string(var + 1) + ")";
            }
            e.name = nm;
            out.push_back(std::move(e));
            int i = k - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == options - 1) {
                pick[static_cast<std::size_t>(i)] = 0;
                --i;
            }
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
        }
        return out;
    }
    throw InputError("tree-indicator raw blocks are supplied by the extraction pipeline");
}

namespace detail {

inline double trig_pair_expectation(const std::vector<const TrigFactor*>& fs) {
    // Expectation over one full period of a product of at most two factors.
    if (fs.empty()) return 1.0;
    if (fs.size() == 1) return 0.0;
    const TrigFactor& a = *fs[0];
    const TrigFactor& b = *fs[1];
    if (a.is_sin != b.is_sin) return 0.0;
    return a.k == b.k ? 0.5 : 0.0;
}

inline double analytic_inner(const RawElement& a, const RawElement& b, const Measure& measure) {
    if (a.is_monomial() && b.is_monomial()) {
        std::vector<int> sum = *a.powers;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*b.powers)[i];
        return moment(measure, sum);
    }
    auto trig_ok = [&](const RawElement& e) {
        return e.is_trig() || (e.is_monomial() && e.subset.is_empty());
    };
    if (trig_ok(a) && trig_ok(b)) {
        const auto* pm = std::get_if<ProductMeasure>(&measure);
        if (!pm) throw InputError("analytic Fourier Gram requires a uniform product measure");
        std::map<int, std::vector<const TrigFactor*>> per_var;
        for (const RawElement* e : {&a, &b})
            if (e->is_trig())
                for (const auto& f : *e->trig) per_var[f.var].push_back(&f);
        double acc = 1.0;
        for (auto& [var, fs] : per_var) {
            const auto* u = std::get_if<Uniform1D>(&pm->marginals()[static_cast<std::size_t>(var)]);
            if (!u) throw InputError("analytic Fourier Gram requires uniform marginals");
            double lo = fs[0]->lo, hi = fs[0]->hi;
            if (std::abs(u->a - lo) > 1e-12 * (hi - lo) || std::abs(u->b - hi) > 1e-12 * (hi - lo))
                throw InputError("Fourier basis box must match the uniform marginal support");
            acc *= trig_pair_expectation(fs);
            if (acc == 0.0) return 0.0;
        }
        return acc;
    }
    throw InputError("analytic Gram unavailable for this element family; use an empirical measure");
}

}  // namespace detail

// Hierarchically-orthogonal basis for one subset. Stores the local raw stack
// (ancestors first) and the triangular transform picking out this subset's
// zero-mean, unit-norm block.
class OrthogonalBasis {
  public:
    OrthogonalBasis() = default;
    OrthogonalBasis(VariableSubset subset, std::vector<RawElement> stacked, Matrix transform,
                    int raw_dim, std::vector<std::string> dropped, std::vector<int> stacked_ids = {})
        : subset_(std::move(subset)), stacked_(std::move(stacked)), transform_(std::move(transform)),
          raw_dim_(raw_dim), dropped_(std::move(dropped)), stacked_ids_(std::move(stacked_ids)) {}

    const VariableSubset& subset() const { return subset_; }
    int dim() const { return static_cast<int>(transform_.cols()); }
    int raw_dim() const { return raw_dim_; }
    const std::vector<std::string>& dropped() const { return dropped_; }
    const std::vector<RawElement>& stacked() const { return stacked_; }
    const Matrix& transform() const { return transform_; }
    // Registry ids assigned by orthogonalize_system, aligned with stacked().
    const std::vector<int>& stacked_ids() const { return stacked_ids_; }

    Vector evaluate(const Vector& x) const {
        Vector raw(static_cast<Eigen::Index>(stacked_.size()));
        for (std::size_t i = 0; i < stacked_.size(); ++i)
            raw[static_cast<Eigen::Index>(i)] = stacked_[i].eval(x);
        return transform_.transpose() * raw;
    }

    // Evaluations at many points, rows = points, cols = retained elements.
    Matrix columns(const Matrix& points) const {
        Matrix raw(points.rows(), static_cast<Eigen::Index>(stacked_.size()));
        for (std::size_t j = 0; j < stacked_.size(); ++j)
            for (Eigen::Index r = 0; r < points.rows(); ++r)
                raw(r, static_cast<Eigen::Index>(j)) = stacked_[j].eval(points.row(r));
        return raw * transform_;
    }

    // Retained elements as explicit polynomials (monomial stacks only).
    std::vector<Polynomial> element_polynomials() const {
        for (const auto& e : stacked_)
            if (!e.is_monomial())
                throw InputError("element_polynomials: stack is not monomial");
        int n = static_cast<int>(stacked_.front().powers->size());
        std::vector<Polynomial> out;
        for (int j = 0; j < dim(); ++j) {
            Polynomial p(n);
            for (std::size_t k = 0; k < stacked_.size(); ++k) {
                double c = transform_(static_cast<Eigen::Index>(k), j);
                if (c != 0.0) p += Polynomial::monomial(n, *stacked_[k].powers, c);
            }
            out.push_back(std::move(p));
        }
        return out;
    }

  private:
    VariableSubset subset_;
    std::vector<RawElement> stacked_;
    Matrix transform_;
    int raw_dim_ = 0;
    std::vector<std::string> dropped_;
    std::vector<int> stacked_ids_;
};

struct OrthogonalizeOptions {
    double drop_tol = 1e-10;  // relative to the leading pivot
};

namespace detail {

struct QrResult {
    std::vector<int> kept;  // indices into the provided stack
    Matrix transform;       // kept-size square, column j = coefficients of q_j
};

// Householder QR on the weighted sample matrix with iterative removal of
// rank-deficient columns (pivot below tol * leading pivot).
inline QrResult empirical_qr(const Matrix& weighted_cols, double tol) {
    int m = static_cast<int>(weighted_cols.cols());
    std::vector<int> kept(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) kept[static_cast<std::size_t>(i)] = i;
    Matrix R;
    while (true) {
        Matrix B(weighted_cols.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t j = 0; j < kept.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = weighted_cols.col(kept[j]);
        Eigen::HouseholderQR<Matrix> qr(B);
        Matrix RR = qr.matrixQR()
                        .topRows(static_cast<Eigen::Index>(kept.size()))
                        .template triangularView<Eigen::Upper>();
        double lead = std::abs(RR(0, 0));
        int drop = -1;
        for (std::size_t j = 1; j < kept.size(); ++j)
            if (std::abs(RR(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))) < tol * lead) {
                drop = static_cast<int>(j);
                break;
            }
        if (drop < 0) {
            R = std::move(RR);
            break;
        }
        kept.erase(kept.begin() + drop);
    }
    Eigen::Index mk = static_cast<Eigen::Index>(kept.size());
    Matrix T = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(mk, mk));
    for (Eigen::Index j = 0; j < mk; ++j)
        if (R(j, j) < 0.0) T.col(j) = -T.col(j);
    return {std::move(kept), std::move(T)};
}

// Gram-Schmidt in coefficient space under the exact moment Gram matrix
// (re-orthogonalized once for stability).
inline QrResult gram_qr(const Matrix& gram, double tol) {
    int m = static_cast<int>(gram.rows());
    double lead = std::sqrt(std::max(gram(0, 0), 0.0));
    std::vector<int> kept;
    std::vector<Vector> cols;
    for (int j = 0; j < m; ++j) {
        Vector v = Vector::Zero(m);
        v[j] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : cols) v -= q * (q.dot(gram * v));
        double norm2 = v.dot(gram * v);
        if (j > 0 && std::sqrt(std::max(norm2, 0.0)) < tol * lead) continue;
        if (norm2 <= 0.0) continue;
        v /= std::sqrt(norm2);
        if (v[j] < 0.0) v = -v;
        cols.push_back(v);
        kept.push_back(j);
    }
    Matrix T(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) T.col(static_cast<Eigen::Index>(j)) = cols[j];
    // Compress rows to the kept stack.
    Matrix Tk(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) Tk.row(static_cast<Eigen::Index>(i)) = T.row(kept[i]);
    return {std::move(kept), std::move(Tk)};
}

}  // namespace detail

// Build hierarchically-orthogonal bases for a whole family of raw blocks.
// Blocks are processed in graded-lex order; each subset's stack holds the
// surviving raw elements of every ancestor followed by its own block.
inline std::map<VariableSubset, OrthogonalBasis> orthogonalize_system(
    const std::map<VariableSubset, std::vector<RawElement>>& blocks, const Measure& measure,
    const OrthogonalizeOptions& opts = {}) {
    int n = dimension(measure);
    const auto* em = std::get_if<EmpiricalMeasure>(&measure);

    // Flat registry so empirical columns are evaluated at most once.
    std::vector<RawElement> registry;
    std::map<VariableSubset, std::pair<int, int>> ranges;  // subset -> (start, count)
    {
        auto all = blocks;
        if (!all.count(VariableSubset::empty()))
            all[VariableSubset::empty()] = {constant_element(n)};
        for (const auto& [u, elems] : all) {
            ranges[u] = {static_cast<int>(registry.size()), static_cast<int>(elems.size())};
            for (const auto& e : elems) registry.push_back(e);
        }
    }

    std::vector<Vector> column_cache(registry.size());
    Vector sqrt_w;
    if (em) {
        sqrt_w = em->weights().array().sqrt();
    }
    auto column = [&](int idx) -> const Vector& {
        Vector& c = column_cache[static_cast<std::size_t>(idx)];
        if (c.size() == 0) {
            const Matrix& pts = em->samples();
            c.resize(pts.rows());
            for (Eigen::Index r = 0; r < pts.rows(); ++r)
                c[r] = registry[static_cast<std::size_t>(idx)].eval(pts.row(r));
            c.array() *= sqrt_w.array();
        }
        return c;
    };

    std::map<VariableSubset, std::vector<int>> survivors;
    std::map<VariableSubset, OrthogonalBasis> out;

    for (const auto& [u, range] : ranges) {
        // Stack ancestors' survivors (graded-lex) then this block.
        std::vector<int> stack;
        for (const auto& w : power_set(u)) {
            if (w == u) continue;
            auto it = survivors.find(w);
            if (it != survivors.end())
                stack.insert(stack.end(), it->second.begin(), it->second.end());
        }
        int own_start = static_cast<int>(stack.size());
        for (int i = 0; i < range.second; ++i) stack.push_back(range.first + i);

        detail::QrResult qr;
        if (em) {
            Matrix B(em->point_count(), static_cast<Eigen::Index>(stack.size()));
            for (std::size_t j = 0; j < stack.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = column(stack[j]);
            qr = detail::empirical_qr(B, opts.drop_tol);
        } else {
            Matrix G(static_cast<Eigen::Index>(stack.size()), static_cast<Eigen::Index>(stack.size()));
            for (std::size_t i = 0; i < stack.size(); ++i)
                for (std::size_t j = i; j < stack.size(); ++j) {
                    double g = detail::analytic_inner(registry[static_cast<std::size_t>(stack[i])],
                                                      registry[static_cast<std::size_t>(stack[j])], measure);
                    G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
                    G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
                }
            qr = detail::gram_qr(G, opts.drop_tol);
        }

        std::vector<RawElement> kept_elems;
        std::vector<int> kept_ids;
        kept_elems.reserve(qr.kept.size());
        std::vector<int> own_cols;
        std::vector<std::string> dropped;
        std::vector<char> kept_mark(stack.size(), 0);
        for (std::size_t j = 0; j < qr.kept.size(); ++j) {
            int s = qr.kept[j];
            kept_mark[static_cast<std::size_t>(s)] = 1;
            kept_elems.push_back(registry[static_cast<std::size_t>(stack[static_cast<std::size_t>(s)])]);
            kept_ids.push_back(stack[static_cast<std::size_t>(s)]);
            if (s >= own_start) own_cols.push_back(static_cast<int>(j));
        }
        for (std::size_t s = static_cast<std::size_t>(own_start); s < stack.size(); ++s)
            if (!kept_mark[s]) dropped.push_back(registry[static_cast<std::size_t>(stack[s])].name);

        Matrix T(static_cast<Eigen::Index>(qr.kept.size()), static_cast<Eigen::Index>(own_cols.size()));
        for (std::size_t j = 0; j < own_cols.size(); ++j) T.col(static_cast<Eigen::Index>(j)) = qr.transform.col(own_cols[j]);

        std::vector<int> surv;
        for (std::size_t j = 0; j < qr.kept.size(); ++j) {
            int s = qr.kept[j];
            if (s >= own_start) surv.push_back(stack[static_cast<std::size_t>(s)]);
        }
        survivors[u] = std::move(surv);
        out.emplace(u, OrthogonalBasis(u, std::move(kept_elems), std::move(T), range.second,
                                       std::move(dropped), std::move(kept_ids)));
    }
    return out;
}

// Single-subset convenience entry point (builds the ancestor blocks itself).
inline OrthogonalBasis orthogonalize(const BasisSpec& spec, const VariableSubset& subset,
                                     const Measure& measure, const OrthogonalizeOptions& opts = {}) {
    std::map<VariableSubset, std::vector<RawElement>> blocks;
    for (const auto& w : power_set(subset)) blocks[w] = raw_block(spec, w, measure);
    auto sys = orthogonalize_system(blocks, measure, opts);
    return sys.at(subset);
}

// Column blocks concatenated in graded-lex subset order.
inline Matrix assemble_feature_matrix(const std::map<VariableSubset, OrthogonalBasis>& bases,
                                      const EmpiricalMeasure& measure) {
    Eigen::Index total = 0;
    for (const auto& [u, b] : bases) total += b.dim();
    Matrix phi(measure.point_count(), total);
    Eigen::Index at = 0;
    for (const auto& [u, b] : bases) {
        if (b.dim() == 0) continue;
        phi.middleCols(at, b.dim()) = b.columns(measure.samples());
        at += b.dim();
    }
    return phi;
}

}  // namespace hdmr
