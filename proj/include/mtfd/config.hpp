#ifndef MTFD_CONFIG_HPP
#define MTFD_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtfd/expression.hpp"
#include "mtfd/problem.hpp"
#include "mtfd/solvers.hpp"

namespace mtfd {

// Declarative experiment description.  Coefficient functions are given either
// as expression strings (grammar in expression.hpp) or as arrays of samples at
// uniformly spaced points spanning [x_lo, x_hi] (linear interpolation).
struct Discretization {
    int N = 256;          // interior spatial nodes
    int K = 256;          // time steps
    double grading = 3.0; // graded-mesh exponent r (1 = uniform)
    double T = 1.0;       // horizon

    void validate() const {
        if (N < 2) throw spec_error("discretization.N: need at least 2 interior nodes");
        if (K < 1) throw spec_error("discretization.K: need at least 1 time step");
        if (!(grading >= 1.0)) throw spec_error("discretization.grading: must be >= 1");
        if (!(T > 0.0)) throw spec_error("discretization.T: must be positive");
    }
};

struct CrosscheckConfig {
    std::vector<std::string> solvers;  // exactly two
    double tolerance = 1e-3;
};

struct AsymptoticsConfig {
    double t_lo = 1e2;
    double t_hi = 1e4;
    int count = 25;
};

struct InvertConfig {
    double x0 = 0.0;
    std::string observation;    // CSV path, columns t,u
    std::vector<double> init;   // initial order guess (descending)
    int max_evals = 500;
};

struct MlEvalConfig {
    std::vector<double> alphas{0.5, 0.8, 1.0};
    double beta = 1.0;
    double x_lo = -30.0;
    double x_hi = 30.0;
    int count = 121;
};

struct ExperimentConfig {
    ProblemSpec problem;
    Discretization disc;
    std::string solver = "l1";
    std::optional<CrosscheckConfig> crosscheck;
    std::optional<ContourSpec> contour;  // override of ContourSpec::standard
    AsymptoticsConfig asymptotics;
    std::optional<InvertConfig> invert;
    MlEvalConfig ml;
    std::uint64_t seed = 1;
};

namespace detail {

using nlohmann::json;

inline double number_or_expr(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get<std::string>());
    throw spec_error("config." + where + ": expected number or expression string");
}

inline ScalarField field_from_json(const json& v, double x_lo, double x_hi,
                                   const std::string& where) {
    if (v.is_number()) return ProblemSpec::constant(v.get<double>());
    if (v.is_string()) return parse_expression(v.get<std::string>());
    if (v.is_array()) {
        auto samples = v.get<std::vector<double>>();
        if (samples.size() < 2)
            throw spec_error("config." + where + ": tabulated samples need >= 2 entries");
        double span = x_hi - x_lo;
        return [samples, x_lo, span](double x) {
            double s = (x - x_lo) / span * (double)(samples.size() - 1);
            if (s <= 0.0) return samples.front();
            if (s >= (double)(samples.size() - 1)) return samples.back();
            std::size_t i = (std::size_t)s;
            double f = s - (double)i;
            return samples[i] * (1.0 - f) + samples[i + 1] * f;
        };
    }
    throw spec_error("config." + where + ": expected expression string, number, or sample array");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::number_or_expr;
    ExperimentConfig cfg;
    if (!j.is_object()) throw spec_error("config: top level must be an object");
    if (!j.contains("problem")) throw spec_error("config.problem: required");
    const auto& p = j.at("problem");

    ProblemSpec& sp = cfg.problem;
    sp.x_lo = p.contains("x_lo") ? number_or_expr(p.at("x_lo"), "problem.x_lo") : 0.0;
    sp.x_hi = p.contains("x_hi") ? number_or_expr(p.at("x_hi"), "problem.x_hi") : 1.0;
    if (!(sp.x_hi > sp.x_lo)) throw spec_error("config.problem: x_hi must exceed x_lo");
    auto field = [&](const char* key, double fallback) -> ScalarField {
        if (!p.contains(key)) return ProblemSpec::constant(fallback);
        return detail::field_from_json(p.at(key), sp.x_lo, sp.x_hi,
                                       std::string("problem.") + key);
    };
    sp.diffusion = field("diffusion", 1.0);
    sp.potential = field("potential", 0.0);
    sp.convection = field("convection", 0.0);
    if (!p.contains("initial")) throw spec_error("config.problem.initial: required");
    sp.initial = detail::field_from_json(p.at("initial"), sp.x_lo, sp.x_hi, "problem.initial");
    if (!p.contains("orders")) throw spec_error("config.problem.orders: required");
    if (!p.at("orders").is_array()) throw spec_error("config.problem.orders: expected array");
    sp.orders = OrderSet(p.at("orders").get<std::vector<double>>());
    if (p.contains("weights")) {
        if (!p.at("weights").is_array()) throw spec_error("config.problem.weights: expected array");
        int idx = 0;
        for (const auto& w : p.at("weights"))
            sp.weights.push_back(detail::field_from_json(
                w, sp.x_lo, sp.x_hi, "problem.weights[" + std::to_string(idx++) + "]"));
    } else {
        for (int jj = 0; jj < sp.orders.ell(); ++jj)
            sp.weights.push_back(ProblemSpec::constant(1.0));
    }
    sp.validate_basic();

    if (j.contains("discretization")) {
        const auto& d = j.at("discretization");
        if (d.contains("N")) cfg.disc.N = d.at("N").get<int>();
        if (d.contains("K")) cfg.disc.K = d.at("K").get<int>();
        if (d.contains("grading")) cfg.disc.grading = d.at("grading").get<double>();
        if (d.contains("T")) cfg.disc.T = number_or_expr(d.at("T"), "discretization.T");
    }
    cfg.disc.validate();

    if (j.contains("solver")) {
        cfg.solver = j.at("solver").get<std::string>();
        if (cfg.solver != "l1" && cfg.solver != "picard" && cfg.solver != "laplace" &&
            cfg.solver != "spectral")
            throw spec_error("config.solver: unknown solver '" + cfg.solver + "'");
    }

    if (j.contains("crosscheck")) {
        CrosscheckConfig cc;
        const auto& c = j.at("crosscheck");
        if (!c.contains("solvers") || !c.at("solvers").is_array() || c.at("solvers").size() != 2)
            throw spec_error("config.crosscheck.solvers: expected exactly two solver names");
        cc.solvers = c.at("solvers").get<std::vector<std::string>>();
        if (c.contains("tolerance")) cc.tolerance = c.at("tolerance").get<double>();
        if (!(cc.tolerance > 0.0)) throw spec_error("config.crosscheck.tolerance: must be positive");
        cfg.crosscheck = cc;
    }

    if (j.contains("contour")) {
        const auto& c = j.at("contour");
        ContourSpec cs = ContourSpec::standard(cfg.problem.orders.largest(),
                                               std::min(cfg.disc.T, 0.1));
        if (c.contains("theta")) cs.theta = c.at("theta").get<double>();
        if (c.contains("r_min")) cs.r_min = c.at("r_min").get<double>();
        if (c.contains("r_max")) cs.r_max = c.at("r_max").get<double>();
        if (c.contains("m")) cs.m = c.at("m").get<int>();
        cs.validate(cfg.problem.orders.largest());
        cfg.contour = cs;
    }

    if (j.contains("asymptotics")) {
        const auto& a = j.at("asymptotics");
        if (a.contains("t_lo")) cfg.asymptotics.t_lo = a.at("t_lo").get<double>();
        if (a.contains("t_hi")) cfg.asymptotics.t_hi = a.at("t_hi").get<double>();
        if (a.contains("count")) cfg.asymptotics.count = a.at("count").get<int>();
        if (!(cfg.asymptotics.t_lo > 0.0 && cfg.asymptotics.t_hi > cfg.asymptotics.t_lo))
            throw spec_error("config.asymptotics: need 0 < t_lo < t_hi");
        if (cfg.asymptotics.count < 8)
            throw spec_error("config.asymptotics.count: need at least 8 samples");
    }

    if (j.contains("invert")) {
        InvertConfig iv;
        const auto& c = j.at("invert");
        if (!c.contains("x0")) throw spec_error("config.invert.x0: required");
        iv.x0 = number_or_expr(c.at("x0"), "invert.x0");
        if (!(iv.x0 > cfg.problem.x_lo && iv.x0 < cfg.problem.x_hi))
            throw spec_error("config.invert.x0: observation point must be interior");
        if (c.contains("observation")) {
            iv.observation = c.at("observation").get<std::string>();
            if (!std::filesystem::exists(iv.observation))
                throw spec_error("config.invert.observation: file '" + iv.observation +
                                 "' does not exist");
        }
        if (c.contains("init")) iv.init = c.at("init").get<std::vector<double>>();
        if (c.contains("max_evals")) iv.max_evals = c.at("max_evals").get<int>();
        if (iv.max_evals < 10) throw spec_error("config.invert.max_evals: too small");
        cfg.invert = iv;
    }

    if (j.contains("ml")) {
        const auto& m = j.at("ml");
        if (m.contains("alpha")) cfg.ml.alphas = m.at("alpha").get<std::vector<double>>();
        if (m.contains("beta")) cfg.ml.beta = m.at("beta").get<double>();
        if (m.contains("x_lo")) cfg.ml.x_lo = m.at("x_lo").get<double>();
        if (m.contains("x_hi")) cfg.ml.x_hi = m.at("x_hi").get<double>();
        if (m.contains("count")) cfg.ml.count = m.at("count").get<int>();
        if (cfg.ml.alphas.empty()) throw spec_error("config.ml.alpha: need at least one order");
        if (!(cfg.ml.x_hi > cfg.ml.x_lo)) throw spec_error("config.ml: need x_lo < x_hi");
        if (cfg.ml.count < 2) throw spec_error("config.ml.count: need at least 2 points");
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spec_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw spec_error(std::string("config: JSON parse failure: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw spec_error(std::string("config: type error: ") + e.what());
    }
}

}  // namespace mtfd

#endif
