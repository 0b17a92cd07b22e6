#include "sdde/model.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace sdde {

using nlohmann::json;

void SddeSystem::validate() const {
    if (n <= 0) throw std::invalid_argument("state dimension n must be positive");
    if (k <= 0) throw std::invalid_argument("Wiener count k must be positive");
    auto check_mat = [&](const Eigen::MatrixXd& m, int rows, int cols, const char* name) {
        if (m.rows() != rows || m.cols() != cols)
            throw std::invalid_argument(std::string(name) + ": dimension mismatch");
        if (!m.allFinite())
            throw std::invalid_argument(std::string(name) + ": non-finite entry");
    };
    check_mat(drift_A, n, n, "A");
    check_mat(drift_B, n, n, "B");
    check_mat(noise_mu, n, k, "mu");
    auto check_tensor = [&](const Tensor3& t, const char* name) {
        if (t.n() != n || t.k() != k)
            throw std::invalid_argument(std::string(name) + ": dimension mismatch");
        for (double v : t.raw())
            if (!std::isfinite(v))
                throw std::invalid_argument(std::string(name) + ": non-finite entry");
    };
    check_tensor(noise_sigma, "sigma");
    check_tensor(noise_eta, "eta");
}

const char* to_string(NoiseClass c) {
    switch (c) {
        case NoiseClass::deterministic: return "deterministic";
        case NoiseClass::additive: return "additive";
        case NoiseClass::decoupled2d: return "decoupled2d";
        case NoiseClass::general: return "general";
    }
    return "?";
}

NoiseClass classify_noise(const SddeSystem& sys) {
    const bool mu_zero = sys.noise_mu.cwiseAbs().sum() == 0.0;
    const bool sigma_zero = sys.noise_sigma.is_zero();
    const bool eta_zero = sys.noise_eta.is_zero();
    if (mu_zero && sigma_zero && eta_zero) return NoiseClass::deterministic;
    if (sigma_zero && eta_zero) return NoiseClass::additive;
    if (sys.n == 2 && sys.k == 2) {
        bool decoupled = true;
        for (int i = 0; i < 2 && decoupled; ++i)
            for (int kk = 0; kk < 2 && decoupled; ++kk) {
                if (i == kk) continue;
                if (sys.noise_mu(i, kk) != 0.0) decoupled = false;
                for (int j = 0; j < 2; ++j)
                    if (sys.noise_sigma(i, j, kk) != 0.0 || sys.noise_eta(i, j, kk) != 0.0)
                        decoupled = false;
            }
        if (decoupled) return NoiseClass::decoupled2d;
    }
    return NoiseClass::general;
}

double InitialFunction::component(int i, double theta) const {
    const auto& p = params.at(static_cast<size_t>(i));
    switch (kind) {
        case Kind::constant:
            return p.at(0);
        case Kind::polynomial: {
            double v = 0.0;
            for (size_t m = p.size(); m-- > 0;) v = v * theta + p[m];
            return v;
        }
        case Kind::cosine_exponential:
            return p.at(0) * std::exp(p.at(1) * theta) * std::cos(p.at(2) * theta + p.at(3));
    }
    return 0.0;
}

Eigen::VectorXd InitialFunction::operator()(double theta) const {
    Eigen::VectorXd v(dimension());
    for (int i = 0; i < dimension(); ++i) v(i) = component(i, theta);
    return v;
}

double InitialFunction::sup_norm() const {
    double best = 0.0;
    const int samples = 512;
    for (int s = 0; s <= samples; ++s) {
        double theta = -1.0 + static_cast<double>(s) / samples;
        best = std::max(best, (*this)(theta).cwiseAbs().sum());
    }
    return best;
}

InitialFunction InitialFunction::zero(int n) {
    InitialFunction f;
    f.kind = Kind::constant;
    f.params.assign(static_cast<size_t>(n), {0.0});
    return f;
}

InitialFunction InitialFunction::constant(const Eigen::VectorXd& v) {
    InitialFunction f;
    f.kind = Kind::constant;
    for (Eigen::Index i = 0; i < v.size(); ++i) f.params.push_back({v(i)});
    return f;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(std::string("unknown field '") + it.key() + "' in " + where);
}

double as_finite(const json& v, const char* where) {
    if (!v.is_number())
        throw std::invalid_argument(std::string(where) + ": expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d))
        throw std::invalid_argument(std::string(where) + ": non-finite entry");
    return d;
}

Eigen::MatrixXd parse_matrix(const json& j, int rows, int cols, const char* name) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw std::invalid_argument(std::string(name) + ": row " + std::to_string(i) + " has wrong length");
        for (int c = 0; c < cols; ++c) m(i, c) = as_finite(row[c], name);
    }
    return m;
}

Tensor3 parse_tensor(const json& j, int n, int k, const char* name) {
    Tensor3 t(n, k);
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(n) + " outer entries");
    for (int i = 0; i < n; ++i) {
        const json& mid = j[i];
        if (!mid.is_array() || static_cast<int>(mid.size()) != n)
            throw std::invalid_argument(std::string(name) + ": bad middle dimension");
        for (int jj = 0; jj < n; ++jj) {
            const json& inner = mid[jj];
            if (!inner.is_array() || static_cast<int>(inner.size()) != k)
                throw std::invalid_argument(std::string(name) + ": bad inner dimension");
            for (int kk = 0; kk < k; ++kk) t(i, jj, kk) = as_finite(inner[kk], name);
        }
    }
    return t;
}

InitialFunction parse_phi(const json& j, int n) {
    require_keys(j, {"kind", "params"}, "phi");
    InitialFunction f;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") f.kind = InitialFunction::Kind::constant;
    else if (kind == "polynomial") f.kind = InitialFunction::Kind::polynomial;
    else if (kind == "cosine-exponential") f.kind = InitialFunction::Kind::cosine_exponential;
    else throw std::invalid_argument("phi.kind: unknown kind '" + kind + "'");
    const json& params = j.at("params");
    if (!params.is_array() || static_cast<int>(params.size()) != n)
        throw std::invalid_argument("phi.params: component count must equal n");
    for (const auto& comp : params) {
        std::vector<double> p;
        for (const auto& v : comp) p.push_back(as_finite(v, "phi.params"));
        if (f.kind == InitialFunction::Kind::constant && p.size() != 1)
            throw std::invalid_argument("phi.params: constant kind takes one parameter");
        if (f.kind == InitialFunction::Kind::cosine_exponential && p.size() != 4)
            throw std::invalid_argument("phi.params: cosine-exponential kind takes four parameters");
        if (p.empty())
            throw std::invalid_argument("phi.params: empty parameter vector");
        f.params.push_back(std::move(p));
    }
    return f;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json tensor_to_json(const Tensor3& t) {
    json out = json::array();
    for (int i = 0; i < t.n(); ++i) {
        json mid = json::array();
        for (int j = 0; j < t.n(); ++j) {
            json inner = json::array();
            for (int k = 0; k < t.k(); ++k) inner.push_back(t(i, j, k));
            mid.push_back(std::move(inner));
        }
        out.push_back(std::move(mid));
    }
    return out;
}

} // namespace

SystemConfig load_system(const std::string& json_text) {
    json doc = json::parse(json_text);
    require_keys(doc, {"n", "k", "A", "B", "mu", "sigma", "eta", "phi", "analysis"}, "config");

    SystemConfig cfg;
    SddeSystem& sys = cfg.system;
    sys.n = doc.at("n").get<int>();
    sys.k = doc.at("k").get<int>();
    if (sys.n <= 0 || sys.k <= 0)
        throw std::invalid_argument("n and k must be positive");
    sys.drift_A = parse_matrix(doc.at("A"), sys.n, sys.n, "A");
    sys.drift_B = parse_matrix(doc.at("B"), sys.n, sys.n, "B");
    sys.noise_mu = parse_matrix(doc.at("mu"), sys.n, sys.k, "mu");
    sys.noise_sigma = parse_tensor(doc.at("sigma"), sys.n, sys.k, "sigma");
    sys.noise_eta = parse_tensor(doc.at("eta"), sys.n, sys.k, "eta");
    sys.validate();

    if (doc.contains("phi"))
        cfg.phi = parse_phi(doc.at("phi"), sys.n);
    else
        cfg.phi = InitialFunction::constant(Eigen::VectorXd::Ones(sys.n));

    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        require_keys(a, {"t_max", "dt", "omega_max", "quad_tol", "root_tol", "paths", "seed"},
                     "analysis");
        AnalysisSettings& s = cfg.analysis;
        if (a.contains("t_max")) s.t_max = as_finite(a["t_max"], "analysis.t_max");
        if (a.contains("dt")) s.dt = as_finite(a["dt"], "analysis.dt");
        if (a.contains("omega_max")) s.omega_max = as_finite(a["omega_max"], "analysis.omega_max");
        if (a.contains("quad_tol")) s.quad_tol = as_finite(a["quad_tol"], "analysis.quad_tol");
        if (a.contains("root_tol")) s.root_tol = as_finite(a["root_tol"], "analysis.root_tol");
        if (a.contains("paths")) s.paths = a["paths"].get<std::int64_t>();
        if (a.contains("seed")) s.seed = a["seed"].get<std::uint64_t>();
    }
    return cfg;
}

std::string serialize(const SystemConfig& cfg) {
    const SddeSystem& sys = cfg.system;
    json doc;
    doc["n"] = sys.n;
    doc["k"] = sys.k;
    doc["A"] = matrix_to_json(sys.drift_A);
    doc["B"] = matrix_to_json(sys.drift_B);
    doc["mu"] = matrix_to_json(sys.noise_mu);
    doc["sigma"] = tensor_to_json(sys.noise_sigma);
    doc["eta"] = tensor_to_json(sys.noise_eta);

    json phi;
    switch (cfg.phi.kind) {
        case InitialFunction::Kind::constant: phi["kind"] = "constant"; break;
        case InitialFunction::Kind::polynomial: phi["kind"] = "polynomial"; break;
        case InitialFunction::Kind::cosine_exponential: phi["kind"] = "cosine-exponential"; break;
    }
    phi["params"] = cfg.phi.params;
    doc["phi"] = std::move(phi);

    json a;
    a["t_max"] = cfg.analysis.t_max;
    a["dt"] = cfg.analysis.dt;
    a["omega_max"] = cfg.analysis.omega_max;
    a["quad_tol"] = cfg.analysis.quad_tol;
    a["root_tol"] = cfg.analysis.root_tol;
    a["paths"] = cfg.analysis.paths;
    a["seed"] = cfg.analysis.seed;
    doc["analysis"] = std::move(a);

    return doc.dump(2);
}

} // namespace sdde
