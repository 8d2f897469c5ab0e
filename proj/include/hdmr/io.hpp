#pragma once

#include "hdmr/basis.hpp"
#include "hdmr/measure.hpp"
#include "hdmr/model.hpp"
#include "hdmr/sensitivity.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hdmr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV: header row of variable names, numeric rows after.
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

inline CsvTable parse_csv(std::istream& in) {
    CsvTable out;
    std::string line;
    if (!std::getline(in, line)) throw InputError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.header.push_back(cell);
    }
    if (out.header.empty()) throw InputError("csv: empty header");
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InputError("csv: non-numeric value '" + cell + "' at row " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(row.size() + 1));
            }
        }
        if (row.size() != out.header.size())
            throw InputError("csv: row " + std::to_string(line_no) + " has " +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(out.header.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("csv: no data rows");
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(out.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return out;
}

inline CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("csv: cannot open " + path);
    return parse_csv(in);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const Matrix& values) {
    std::ofstream out(path);
    if (!out) throw InputError("csv: cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    out.precision(17);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << values(r, c);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Parametric measures as JSON.
// ---------------------------------------------------------------------------

inline json measure_to_json(const GaussianMeasure& g) {
    json j;
    j["type"] = "gaussian";
    j["mean"] = std::vector<double>(g.mean().data(), g.mean().data() + g.mean().size());
    j["stdev"] = std::vector<double>(g.stdev().data(), g.stdev().data() + g.stdev().size());
    std::vector<std::vector<double>> corr;
    for (Eigen::Index i = 0; i < g.correlation().rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index k = 0; k < g.correlation().cols(); ++k) row.push_back(g.correlation()(i, k));
        corr.push_back(std::move(row));
    }
    j["correlation"] = corr;
    return j;
}

inline json measure_to_json(const ProductMeasure& pm) {
    json j;
    j["type"] = "product";
    json margs = json::array();
    for (const auto& m : pm.marginals()) {
        json mj;
        if (const auto* u = std::get_if<Uniform1D>(&m)) {
            mj["type"] = "uniform";
            mj["a"] = u->a;
            mj["b"] = u->b;
        } else if (const auto* be = std::get_if<Beta1D>(&m)) {
            mj["type"] = "beta";
            mj["a"] = be->a;
            mj["b"] = be->b;
        } else {
            const auto& d = std::get<Discrete1D>(m);
            mj["type"] = "pointmass";
            mj["values"] = d.values;
            mj["probs"] = d.probs;
        }
        margs.push_back(std::move(mj));
    }
    j["marginals"] = std::move(margs);
    return j;
}

inline json measure_to_json(const DiscreteLaw& law) {
    json j;
    j["type"] = "discrete";
    j["probabilities"] = law.probabilities();
    return j;
}

inline Measure measure_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") {
        auto mean_v = j.at("mean").get<std::vector<double>>();
        auto sd_v = j.at("stdev").get<std::vector<double>>();
        auto corr_v = j.at("correlation").get<std::vector<std::vector<double>>>();
        Eigen::Index n = static_cast<Eigen::Index>(mean_v.size());
        Vector mean(n), sd(n);
        Matrix corr(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mean[i] = mean_v[static_cast<std::size_t>(i)];
            sd[i] = sd_v[static_cast<std::size_t>(i)];
            for (Eigen::Index k = 0; k < n; ++k) corr(i, k) = corr_v[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
        return GaussianMeasure(std::move(mean), std::move(sd), std::move(corr));
    }
    if (type == "product") {
        std::vector<Marginal> margs;
        for (const auto& mj : j.at("marginals")) {
            std::string mt = mj.at("type").get<std::string>();
            if (mt == "uniform")
                margs.push_back(Uniform1D{mj.at("a").get<double>(), mj.at("b").get<double>()});
            else if (mt == "beta")
                margs.push_back(Beta1D{mj.at("a").get<double>(), mj.at("b").get<double>()});
            else if (mt == "pointmass")
                margs.push_back(Discrete1D{mj.at("values").get<std::vector<double>>(),
                                           mj.at("probs").get<std::vector<double>>()});
            else
                throw InputError("unknown marginal type: " + mt);
        }
        return ProductMeasure(std::move(margs));
    }
    throw InputError("unknown measure type: " + type);
}

// ---------------------------------------------------------------------------
// HdmrModel as JSON. Requires basis-backed components whose raw elements are
// monomial or trig (tree stacks live in the ensemble schema instead).
// ---------------------------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

namespace detail {

inline json element_to_json(const RawElement& e) {
    json j;
    j["subset"] = e.subset.indices();
    j["name"] = e.name;
    if (e.powers) {
        j["powers"] = *e.powers;
    } else if (e.trig) {
        json fs = json::array();
        for (const auto& f : *e.trig)
            fs.push_back({{"var", f.var}, {"k", f.k}, {"sin", f.is_sin}, {"lo", f.lo}, {"hi", f.hi}});
        j["trig"] = std::move(fs);
    } else {
        throw InputError("model serialization: callable basis element has no JSON form");
    }
    return j;
}

inline RawElement element_from_json(const json& j) {
    RawElement e;
    e.subset = VariableSubset(j.at("subset").get<std::vector<int>>());
    e.name = j.value("name", "");
    if (j.contains("powers")) {
        e.powers = j.at("powers").get<std::vector<int>>();
    } else if (j.contains("trig")) {
        std::vector<TrigFactor> fs;
        for (const auto& fj : j.at("trig")) {
            TrigFactor f;
            f.var = fj.at("var").get<int>();
            f.k = fj.at("k").get<int>();
            f.is_sin = fj.at("sin").get<bool>();
            f.lo = fj.at("lo").get<double>();
            f.hi = fj.at("hi").get<double>();
            fs.push_back(f);
        }
        e.trig = std::move(fs);
    } else {
        throw InputError("model json: element without powers or trig");
    }
    return e;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

}  // namespace detail

inline json model_to_json(const HdmrModel& model) {
    json j;
    j["version"] = kModelSchemaVersion;
    j["constant"] = model.constant;
    j["order"] = model.order;
    j["dimension"] = model.input_dimension;
    j["family"] = family_name(model.family);
    j["degree"] = model.degree;
    j["total_variance"] = model.total_variance;
    j["fitting_measure"] = model.fitting_measure_id;
    j["min_norm_fallback"] = model.min_norm_fallback;
    j["notes"] = model.notes;

    json blocks = json::array();
    for (const auto& [u, comp] : model.components) {
        if (!comp.basis_backed())
            throw InputError("model serialization: component " + u.label() +
                             " has no basis representation");
        json b;
        b["subset"] = u.indices();
        json elems = json::array();
        for (const auto& e : comp.basis->stacked()) elems.push_back(detail::element_to_json(e));
        b["elements"] = std::move(elems);
        b["transform"] = detail::matrix_to_json(comp.basis->transform());
        b["coefficients"] = std::vector<double>(comp.coefficients.data(),
                                                comp.coefficients.data() + comp.coefficients.size());
        blocks.push_back(std::move(b));
    }
    j["blocks"] = std::move(blocks);

    json cov;
    json subsets = json::array();
    for (const auto& u : model.covariance.subsets) subsets.push_back(u.indices());
    cov["subsets"] = std::move(subsets);
    cov["values"] = detail::matrix_to_json(model.covariance.values);
    j["covariance"] = std::move(cov);
    return j;
}

inline HdmrModel model_from_json(const json& j) {
    if (!j.contains("version")) throw InputError("model json: missing version field");
    if (j.at("version").get<int>() != kModelSchemaVersion)
        throw InputError("model json: unsupported version");
    HdmrModel model;
    model.constant = j.at("constant").get<double>();
    model.order = j.at("order").get<int>();
    model.input_dimension = j.at("dimension").get<int>();
    model.family = family_from_name(j.at("family").get<std::string>());
    model.degree = j.at("degree").get<int>();
    model.total_variance = j.at("total_variance").get<double>();
    model.fitting_measure_id = j.value("fitting_measure", "");
    model.min_norm_fallback = j.value("min_norm_fallback", false);
    model.notes = j.value("notes", std::vector<std::string>{});

    for (const auto& b : j.at("blocks")) {
        VariableSubset u(b.at("subset").get<std::vector<int>>());
        std::vector<RawElement> elems;
        for (const auto& ej : b.at("elements")) elems.push_back(detail::element_from_json(ej));
        Matrix transform = detail::matrix_from_json(b.at("transform"));
        auto coeffs = b.at("coefficients").get<std::vector<double>>();
        Vector gamma(static_cast<Eigen::Index>(coeffs.size()));
        for (std::size_t i = 0; i < coeffs.size(); ++i) gamma[static_cast<Eigen::Index>(i)] = coeffs[i];
        auto basis = std::make_shared<OrthogonalBasis>(u, std::move(elems), std::move(transform),
                                                       static_cast<int>(coeffs.size()),
                                                       std::vector<std::string>{});
        model.components.emplace(u, ComponentFunction::from_basis(basis, std::move(gamma)));
    }

    const auto& cov = j.at("covariance");
    for (const auto& sj : cov.at("subsets"))
        model.covariance.subsets.push_back(VariableSubset(sj.get<std::vector<int>>()));
    model.covariance.values = detail::matrix_from_json(cov.at("values"));
    return model;
}

inline json report_to_json(const SensitivityReport& report) {
    json j;
    j["total_variance"] = report.total_variance;
    j["fitting_measure"] = report.fitting_measure_id;
    json per = json::array();
    for (const auto& [u, t] : report.per_subset)
        per.push_back({{"subset", u.indices()},
                       {"label", u.label()},
                       {"Sa", t.structural},
                       {"Sb", t.correlative},
                       {"S", t.overall}});
    j["per_subset"] = std::move(per);
    json tot = json::array();
    for (const auto& [i, t] : report.total)
        tot.push_back({{"variable", i}, {"T", t}, {"R", report.relative.at(i)}});
    j["per_variable"] = std::move(tot);
    return j;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << content;
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace hdmr
