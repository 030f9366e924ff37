// Dense reference computations and random generators shared by the test suites.
#ifndef SPLITAMG_TESTS_ORACLES_HPP
#define SPLITAMG_TESTS_ORACLES_HPP

#include <random>
#include <vector>

#include <Eigen/Dense>

#include <splitamg/sparse.hpp>

namespace oracle {

using splitamg::CsrMatrix;
using splitamg::Vector;

inline Eigen::MatrixXd dense(const CsrMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) m(i, a.col(k)) += a.value(k);
    return m;
}

inline CsrMatrix sparse(const Eigen::MatrixXd& m) {
    std::vector<splitamg::Triplet> t;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) t.push_back({std::size_t(i), std::size_t(j), m(i, j)});
    return CsrMatrix::from_triplets(m.rows(), m.cols(), std::move(t));
}

inline Eigen::VectorXd vec(const Vector& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }
inline Vector vec(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

inline double max_diff(const Vector& a, const Vector& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double density = 1.0) {
    std::uniform_real_distribution<double> u(-1, 1), keep(0, 1);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (keep(rng) < density) m(i, j) = u(rng);
    return m;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double shift = 0.5) {
    Eigen::MatrixXd b = random_matrix(rng, n, n);
    return b * b.transpose() / n + shift * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_skew(std::mt19937_64& rng, int n) {
    Eigen::MatrixXd b = random_matrix(rng, n, n);
    return 0.5 * (b - b.transpose());
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1, 1);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline CsrMatrix tridiag(std::size_t n, double lo = -1, double mid = 2, double hi = -1) {
    std::vector<splitamg::Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, lo});
        t.push_back({i, i, mid});
        if (i + 1 < n) t.push_back({i, i + 1, hi});
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

/// 5-point Laplacian on an m x m interior grid, lexicographic ordering.
inline CsrMatrix laplacian_2d(std::size_t m, double cx = 1, double cy = 1) {
    std::vector<splitamg::Triplet> t;
    auto id = [m](std::size_t i, std::size_t j) { return j * m + i; };
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            t.push_back({id(i, j), id(i, j), 2 * cx + 2 * cy});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -cx});
            if (i + 1 < m) t.push_back({id(i, j), id(i + 1, j), -cx});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -cy});
            if (j + 1 < m) t.push_back({id(i, j), id(i, j + 1), -cy});
        }
    return CsrMatrix::from_triplets(m * m, m * m, std::move(t));
}

} // namespace oracle

#endif
