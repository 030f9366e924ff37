#ifndef SPLITAMG_GPR_KERNELS_HPP
#define SPLITAMG_GPR_KERNELS_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../error.hpp"

namespace splitamg::gpr {

enum class KernelBase { gauss_unsquared, squared_exponential, rational_quadratic, matern_3_2, periodic };

inline std::string to_string(KernelBase b) {
    switch (b) {
    case KernelBase::gauss_unsquared: return "gauss_unsquared";
    case KernelBase::squared_exponential: return "squared_exponential";
    case KernelBase::rational_quadratic: return "rational_quadratic";
    case KernelBase::matern_3_2: return "matern_3_2";
    case KernelBase::periodic: return "periodic";
    }
    return "?";
}

inline KernelBase parse_kernel_base(const std::string& s) {
    if (s == "gauss_unsquared" || s == "gauss-unsquared") return KernelBase::gauss_unsquared;
    if (s == "squared_exponential" || s == "se") return KernelBase::squared_exponential;
    if (s == "rational_quadratic" || s == "rq") return KernelBase::rational_quadratic;
    if (s == "matern_3_2" || s == "matern") return KernelBase::matern_3_2;
    if (s == "periodic") return KernelBase::periodic;
    throw config_error("unknown kernel '" + s + "'");
}

/// Number of hyperparameters: length scale and amplitude, plus the RQ shape
/// or the period.
inline std::size_t hyper_count(KernelBase b) {
    return (b == KernelBase::rational_quadratic || b == KernelBase::periodic) ? 3 : 2;
}

/// One base kernel. hyper = {length ι, amplitude σ_f[, rq shape | period]}.
struct KernelSpec {
    KernelBase base = KernelBase::gauss_unsquared;
    std::vector<double> hyper{1.0, 1.0};

    static KernelSpec make(KernelBase base, double length = 1.0, double amplitude = 1.0, double extra = 1.0) {
        KernelSpec k{base, {length, amplitude}};
        if (hyper_count(base) == 3) k.hyper.push_back(extra);
        k.validate();
        return k;
    }

    double length() const { return hyper[0]; }
    double amplitude() const { return hyper[1]; }

    void validate() const {
        if (hyper.size() != hyper_count(base))
            throw config_error("kernel " + to_string(base) + ": expected " + std::to_string(hyper_count(base)) +
                               " hyperparameters");
        for (double h : hyper)
            if (!(h > 0) || !std::isfinite(h)) throw config_error("kernel " + to_string(base) + ": hyperparameters must be positive");
    }

    double operator()(double x, double y) const {
        const double r = std::abs(x - y);
        const double l = hyper[0], s2 = hyper[1] * hyper[1];
        switch (base) {
        case KernelBase::gauss_unsquared: return s2 * std::exp(-r / (2 * l * l));
        case KernelBase::squared_exponential: return s2 * std::exp(-r * r / (2 * l * l));
        case KernelBase::rational_quadratic: {
            const double a = hyper[2];
            return s2 * std::pow(1 + r * r / (2 * a * l * l), -a);
        }
        case KernelBase::matern_3_2: {
            const double u = std::sqrt(3.0) * r / l;
            return s2 * (1 + u) * std::exp(-u);
        }
        case KernelBase::periodic: {
            const double sn = std::sin(std::numbers::pi * r / hyper[2]);
            return s2 * std::exp(-2 * sn * sn / (l * l));
        }
        }
        return 0;
    }

    /// Derivatives with respect to the log of each hyperparameter.
    std::vector<double> log_gradient(double x, double y) const {
        const double r = std::abs(x - y);
        const double l = hyper[0], s2 = hyper[1] * hyper[1];
        const double k = (*this)(x, y);
        std::vector<double> g(hyper.size());
        g[1] = 2 * k;
        switch (base) {
        case KernelBase::gauss_unsquared: g[0] = k * r / (l * l); break;
        case KernelBase::squared_exponential: g[0] = k * r * r / (l * l); break;
        case KernelBase::rational_quadratic: {
            const double a = hyper[2];
            const double b = 1 + r * r / (2 * a * l * l);
            g[0] = s2 * std::pow(b, -a - 1) * r * r / (l * l);
            g[2] = k * a * (-std::log(b) + r * r / (2 * a * l * l * b));
            break;
        }
        case KernelBase::matern_3_2: {
            const double u = std::sqrt(3.0) * r / l;
            g[0] = s2 * u * u * std::exp(-u);
            break;
        }
        case KernelBase::periodic: {
            const double p = hyper[2];
            const double arg = std::numbers::pi * r / p;
            const double sn = std::sin(arg), cs = std::cos(arg);
            g[0] = k * 4 * sn * sn / (l * l);
            g[2] = k * 4 * sn * cs * arg / (l * l);
            break;
        }
        }
        return g;
    }
};

/// Product of base kernels.
struct LibraryKernel {
    std::vector<KernelSpec> factors;

    double operator()(double x, double y) const {
        double v = 1.0;
        for (const auto& f : factors) v *= f(x, y);
        return v;
    }

    std::string name() const {
        std::string s;
        for (const auto& f : factors) s += (s.empty() ? "" : "*") + to_string(f.base);
        return s;
    }
};

/// Weighted sum of library kernels.
inline double kernel_combo(std::span<const LibraryKernel> library, std::span<const double> weights, double x, double y) {
    if (library.size() != weights.size()) throw dimension_error("kernel_combo: one weight per library entry");
    bool any = false;
    double v = 0;
    for (std::size_t i = 0; i < library.size(); ++i) {
        if (weights[i] < 0) throw config_error("kernel_combo: weights must be non-negative");
        if (weights[i] > 0) any = true;
        if (weights[i] != 0) v += weights[i] * library[i](x, y);
    }
    if (!any) throw config_error("kernel_combo: all weights are zero");
    return v;
}

inline double kernel_combo(std::span<const KernelSpec> library, std::span<const double> weights, double x, double y) {
    std::vector<LibraryKernel> lib;
    for (const auto& k : library) lib.push_back({{k}});
    return kernel_combo(lib, weights, x, y);
}

/// Shared shape parameters of the library: one length scale, the RQ shape and the period.
struct LibraryShape {
    double length = 1.0;
    double rq_shape = 1.0;
    double period = 1.0;
};

/// Four unit-amplitude base kernels and their six pairwise products.
inline std::vector<LibraryKernel> default_library(const LibraryShape& shape = {}) {
    const std::array<KernelSpec, 4> base{
        KernelSpec::make(KernelBase::squared_exponential, shape.length),
        KernelSpec::make(KernelBase::rational_quadratic, shape.length, 1.0, shape.rq_shape),
        KernelSpec::make(KernelBase::matern_3_2, shape.length),
        KernelSpec::make(KernelBase::periodic, shape.length, 1.0, shape.period),
    };
    std::vector<LibraryKernel> lib;
    for (const auto& k : base) lib.push_back({{k}});
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j) lib.push_back({{base[i], base[j]}});
    return lib;
}

/// Covariance function of a single-output GP: a weighted sum of products of
/// base kernels. A plain base kernel is the one-term, unit-weight case.
class Kernel {
  public:
    Kernel() : Kernel(KernelSpec{}) {}
    /* implicit */ Kernel(KernelSpec single) : terms_{{{std::move(single)}}}, weights_{1.0} { terms_[0].factors[0].validate(); }
    Kernel(std::vector<LibraryKernel> terms, std::vector<double> weights)
        : terms_(std::move(terms)), weights_(std::move(weights)) {
        if (terms_.empty()) throw config_error("kernel: no terms");
        kernel_combo(terms_, weights_, 0.0, 0.0); // validates the weights
    }

    double operator()(double x, double y) const { return kernel_combo(terms_, weights_, x, y); }

    bool is_single() const { return terms_.size() == 1 && terms_[0].factors.size() == 1 && weights_[0] == 1.0; }
    const KernelSpec& single() const {
        if (!is_single()) throw config_error("kernel: not a single base kernel");
        return terms_[0].factors[0];
    }
    const std::vector<LibraryKernel>& terms() const noexcept { return terms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

  private:
    std::vector<LibraryKernel> terms_;
    std::vector<double> weights_;
};

inline nlohmann::json to_json(const KernelSpec& k) { return {{"base", to_string(k.base)}, {"hyper", k.hyper}}; }

inline KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
    KernelSpec k{parse_kernel_base(j.at("base").get<std::string>()), j.at("hyper").get<std::vector<double>>()};
    k.validate();
    return k;
}

inline nlohmann::json to_json(const Kernel& k) {
    if (k.is_single()) return to_json(k.single());
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : k.terms()) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : t.factors) factors.push_back(to_json(f));
        terms.push_back(factors);
    }
    return {{"terms", terms}, {"weights", k.weights()}};
}

inline Kernel kernel_from_json(const nlohmann::json& j) {
    if (j.contains("base")) return Kernel(kernel_spec_from_json(j));
    std::vector<LibraryKernel> terms;
    for (const auto& t : j.at("terms")) {
        LibraryKernel lk;
        for (const auto& f : t) lk.factors.push_back(kernel_spec_from_json(f));
        terms.push_back(std::move(lk));
    }
    return Kernel(std::move(terms), j.at("weights").get<std::vector<double>>());
}

} // namespace splitamg::gpr

#endif
