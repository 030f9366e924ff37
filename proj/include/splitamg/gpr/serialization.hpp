#ifndef SPLITAMG_GPR_SERIALIZATION_HPP
#define SPLITAMG_GPR_SERIALIZATION_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpr.hpp"
#include "multitask.hpp"

namespace splitamg::gpr {

// Only hyperparameters and data are stored; factors are recomputed on load,
// which reproduces predictions bit for bit.

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(r);
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c)
            throw dimension_error("model json: ragged matrix");
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return m;
}

} // namespace detail

inline nlohmann::json to_json(const GprModel& m) {
    return {{"kernel", to_json(m.kernel())},
            {"noise_sigma", m.noise_sigma()},
            {"input_scale", m.input_scale()},
            {"inputs", m.inputs()},
            {"targets", m.targets()}};
}

inline GprModel gpr_from_json(const nlohmann::json& j) {
    return GprModel::condition(j.at("inputs").get<std::vector<double>>(), j.at("targets").get<std::vector<double>>(),
                               kernel_from_json(j.at("kernel")), j.at("noise_sigma").get<double>(),
                               j.at("input_scale").get<double>());
}

inline nlohmann::json to_json(const MtGprModel& m) {
    nlohmann::json names = nlohmann::json::array();
    for (const auto& k : m.library()) names.push_back(k.name());
    const auto& h = m.hyper();
    return {{"kernel",
             {{"library", names},
              {"shape", {{"length", h.shape.length}, {"rq_shape", h.shape.rq_shape}, {"period", h.shape.period}}}}},
            {"noise_sigma", h.noise},
            {"input_scale", m.input_scale()},
            {"inputs", m.inputs()},
            {"targets", m.targets()},
            {"task_count", m.task_count()},
            {"task_cov", detail::matrix_json(h.task_cov)},
            {"weights", detail::matrix_json(h.weights)}};
}

inline MtGprModel mt_from_json(const nlohmann::json& j) {
    MtHyper h;
    const auto& shape = j.at("kernel").at("shape");
    h.shape = {shape.at("length").get<double>(), shape.at("rq_shape").get<double>(), shape.at("period").get<double>()};
    h.noise = j.at("noise_sigma").get<std::vector<double>>();
    h.task_cov = detail::matrix_from_json(j.at("task_cov"));
    h.weights = detail::matrix_from_json(j.at("weights"));
    if (j.at("task_count").get<std::size_t>() != static_cast<std::size_t>(h.task_cov.rows()))
        throw dimension_error("model json: task_count disagrees with task_cov");
    return MtGprModel::condition(j.at("inputs").get<std::vector<double>>(),
                                 j.at("targets").get<std::vector<std::vector<double>>>(), std::move(h),
                                 j.at("input_scale").get<double>());
}

/// True for documents written from an MtGprModel.
inline bool is_multitask_json(const nlohmann::json& j) { return j.contains("task_count"); }

} // namespace splitamg::gpr

#endif
