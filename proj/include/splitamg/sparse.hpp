#ifndef SPLITAMG_SPARSE_HPP
#define SPLITAMG_SPARSE_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace splitamg {

using Vector = std::vector<double>;

//---------------------------------------------------------------------------
// Level-1 helpers
//---------------------------------------------------------------------------
inline double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw dimension_error("dot: length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw dimension_error("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector scaled(double a, std::span<const double> x) {
    Vector y(x.begin(), x.end());
    for (auto& v : y) v *= a;
    return y;
}

inline Vector add(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw dimension_error("add: length mismatch");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
    return z;
}

inline Vector subtract(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw dimension_error("subtract: length mismatch");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
    return z;
}

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

//---------------------------------------------------------------------------
// Compressed sparse row matrix
//---------------------------------------------------------------------------

/// Real matrix in compressed-row form. Column indices are strictly increasing
/// inside each row; explicit zeros are allowed, duplicates are not.
class CsrMatrix {
  public:
    CsrMatrix() : ptr_(1, 0) {}

    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
              std::vector<std::size_t> col_indices, std::vector<double> values)
        : rows_(rows), cols_(cols), ptr_(std::move(row_offsets)), col_(std::move(col_indices)),
          val_(std::move(values)) {
        validate();
    }

    /// Sums duplicate entries. With drop_below > 0, merged entries with
    /// magnitude below the threshold are removed.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> trips,
                                   double drop_below = 0.0) {
        for (const auto& t : trips)
            if (t.row >= rows || t.col >= cols)
                throw dimension_error("from_triplets: index out of range");
        std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<std::size_t> ptr(rows + 1, 0), col;
        std::vector<double> val;
        col.reserve(trips.size());
        val.reserve(trips.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < rows; ++i) {
            while (k < trips.size() && trips[k].row == i) {
                std::size_t c = trips[k].col;
                double v = 0;
                while (k < trips.size() && trips[k].row == i && trips[k].col == c) v += trips[k++].value;
                if (drop_below > 0 && std::abs(v) < drop_below) continue;
                col.push_back(c);
                val.push_back(v);
            }
            ptr[i + 1] = col.size();
        }
        return CsrMatrix(rows, cols, std::move(ptr), std::move(col), std::move(val));
    }

    static CsrMatrix identity(std::size_t n, double scale = 1.0) {
        std::vector<std::size_t> ptr(n + 1), col(n);
        std::iota(ptr.begin(), ptr.end(), std::size_t{0});
        std::iota(col.begin(), col.end(), std::size_t{0});
        return CsrMatrix(n, n, std::move(ptr), std::move(col), std::vector<double>(n, scale));
    }

    /// Row-major dense input; exact zeros are not stored.
    static CsrMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense) {
        if (dense.size() != rows * cols) throw dimension_error("from_dense: size mismatch");
        std::vector<std::size_t> ptr(rows + 1, 0), col;
        std::vector<double> val;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                double v = dense[i * cols + j];
                if (v != 0.0) {
                    col.push_back(j);
                    val.push_back(v);
                }
            }
            ptr[i + 1] = col.size();
        }
        return CsrMatrix(rows, cols, std::move(ptr), std::move(col), std::move(val));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t dim() const noexcept { return rows_; }
    std::size_t nnz() const noexcept { return col_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    std::span<const std::size_t> row_offsets() const noexcept { return ptr_; }
    std::span<const std::size_t> col_indices() const noexcept { return col_; }
    std::span<const double> values() const noexcept { return val_; }
    std::span<double> mutable_values() noexcept { return val_; }

    std::size_t row_begin(std::size_t i) const { return ptr_[i]; }
    std::size_t row_end(std::size_t i) const { return ptr_[i + 1]; }
    std::size_t col(std::size_t k) const { return col_[k]; }
    double value(std::size_t k) const { return val_[k]; }

    /// Position of (i, j) in the storage arrays, or npos when not stored.
    std::size_t find(std::size_t i, std::size_t j) const {
        auto first = col_.begin() + static_cast<std::ptrdiff_t>(ptr_[i]);
        auto last = col_.begin() + static_cast<std::ptrdiff_t>(ptr_[i + 1]);
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return npos;
        return static_cast<std::size_t>(it - col_.begin());
    }

    double at(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) throw dimension_error("at: index out of range");
        std::size_t k = find(i, j);
        return k == npos ? 0.0 : val_[k];
    }

    double diagonal(std::size_t i) const { return at(i, i); }

    Vector diagonal() const {
        Vector d(std::min(rows_, cols_), 0.0);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
        return d;
    }

    /// Row-major dense copy.
    Vector to_dense() const {
        Vector d(rows_ * cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) d[i * cols_ + col_[k]] = val_[k];
        return d;
    }

    void validate() const {
        if (ptr_.size() != rows_ + 1) throw dimension_error("csr: row_offsets must have rows+1 entries");
        if (ptr_.front() != 0) throw dimension_error("csr: row_offsets[0] must be 0");
        if (ptr_.back() != col_.size() || col_.size() != val_.size())
            throw dimension_error("csr: row_offsets[rows] must equal nnz");
        for (std::size_t i = 0; i < rows_; ++i) {
            if (ptr_[i] > ptr_[i + 1]) throw dimension_error("csr: row_offsets must be nondecreasing");
            for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) {
                if (col_[k] >= cols_) throw dimension_error("csr: column index out of range");
                if (k > ptr_[i] && col_[k] <= col_[k - 1])
                    throw dimension_error("csr: column indices must be strictly increasing within a row");
            }
        }
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> val_;
};

//---------------------------------------------------------------------------
// Kernels
//---------------------------------------------------------------------------

/// y = A x, no allocation.
inline void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows()) throw dimension_error("spmv: length mismatch");
    const auto ptr = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0;
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

inline Vector spmv(const CsrMatrix& a, std::span<const double> x) {
    Vector y(a.rows());
    spmv(a, x, y);
    return y;
}

/// y = Aᵀ x without forming the transpose.
inline Vector spmv_transpose(const CsrMatrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw dimension_error("spmv_transpose: length mismatch");
    Vector y(a.cols(), 0.0);
    const auto ptr = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) y[col[k]] += val[k] * x[i];
    return y;
}

/// r = b - A x
inline void residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b,
                     std::span<double> r) {
    if (b.size() != a.rows() || r.size() != a.rows() || x.size() != a.cols())
        throw dimension_error("residual: length mismatch");
    const auto ptr = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = b[i];
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s -= val[k] * x[col[k]];
        r[i] = s;
    }
}

inline Vector residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
    Vector r(a.rows());
    residual(a, x, b, r);
    return r;
}

inline CsrMatrix transpose(const CsrMatrix& a) {
    std::vector<std::size_t> ptr(a.cols() + 1, 0);
    for (auto c : a.col_indices()) ++ptr[c + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<std::size_t> col(a.nnz());
    std::vector<double> val(a.nnz());
    std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
            std::size_t dst = next[a.col(k)]++;
            col[dst] = i;
            val[dst] = a.value(k);
        }
    }
    return CsrMatrix(a.cols(), a.rows(), std::move(ptr), std::move(col), std::move(val));
}

/// alpha*A + beta*B on the union of both patterns (explicit zeros are kept).
inline CsrMatrix linear_combination(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("linear_combination: shape mismatch");
    std::vector<std::size_t> ptr(a.rows() + 1, 0), col;
    std::vector<double> val;
    col.reserve(std::max(a.nnz(), b.nnz()));
    val.reserve(std::max(a.nnz(), b.nnz()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::size_t ka = a.row_begin(i), kb = b.row_begin(i);
        const std::size_t ea = a.row_end(i), eb = b.row_end(i);
        while (ka < ea || kb < eb) {
            std::size_t ca = ka < ea ? a.col(ka) : CsrMatrix::npos;
            std::size_t cb = kb < eb ? b.col(kb) : CsrMatrix::npos;
            if (ca == cb) {
                col.push_back(ca);
                val.push_back(alpha * a.value(ka++) + beta * b.value(kb++));
            } else if (ca < cb) {
                col.push_back(ca);
                val.push_back(alpha * a.value(ka++));
            } else {
                col.push_back(cb);
                val.push_back(beta * b.value(kb++));
            }
        }
        ptr[i + 1] = col.size();
    }
    return CsrMatrix(a.rows(), a.cols(), std::move(ptr), std::move(col), std::move(val));
}

/// scale*A + shift*I
inline CsrMatrix shifted(const CsrMatrix& a, double shift, double scale = 1.0) {
    if (!a.is_square()) throw dimension_error("shifted: matrix must be square");
    return linear_combination(scale, a, shift, CsrMatrix::identity(a.rows()));
}

/// Sparse product C = A B (Gustavson, dense accumulator). Entries whose
/// magnitude falls below drop_below are not stored.
inline CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b, double drop_below = 0.0) {
    if (a.cols() != b.rows()) throw dimension_error("multiply: inner dimensions differ");
    const std::size_t n = b.cols();
    std::vector<double> acc(n, 0.0);
    std::vector<std::size_t> marker(n, CsrMatrix::npos), cols_in_row;
    std::vector<std::size_t> ptr(a.rows() + 1, 0), col;
    std::vector<double> val;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cols_in_row.clear();
        for (std::size_t ka = a.row_begin(i); ka < a.row_end(i); ++ka) {
            const std::size_t k = a.col(ka);
            const double av = a.value(ka);
            for (std::size_t kb = b.row_begin(k); kb < b.row_end(k); ++kb) {
                const std::size_t j = b.col(kb);
                if (marker[j] != i) {
                    marker[j] = i;
                    acc[j] = 0.0;
                    cols_in_row.push_back(j);
                }
                acc[j] += av * b.value(kb);
            }
        }
        std::sort(cols_in_row.begin(), cols_in_row.end());
        for (auto j : cols_in_row) {
            if (drop_below > 0 && std::abs(acc[j]) < drop_below) continue;
            col.push_back(j);
            val.push_back(acc[j]);
        }
        ptr[i + 1] = col.size();
    }
    return CsrMatrix(a.rows(), b.cols(), std::move(ptr), std::move(col), std::move(val));
}

//---------------------------------------------------------------------------
// Symmetric / skew-symmetric splitting
//---------------------------------------------------------------------------

/// A = H + S with H = (A + Aᵀ)/2 and S = (A - Aᵀ)/2, both stored on the
/// symmetrized pattern of A.
struct HsSplitting {
    CsrMatrix h;
    CsrMatrix s;
};

inline HsSplitting split_hs(const CsrMatrix& a) {
    if (!a.is_square()) throw dimension_error("split_hs: matrix must be square");
    const CsrMatrix at = transpose(a);
    return {linear_combination(0.5, a, 0.5, at), linear_combination(0.5, a, -0.5, at)};
}

/// Largest |A_ij - A_ji| over the stored pattern.
inline double symmetry_defect(const CsrMatrix& a) {
    if (!a.is_square()) throw dimension_error("symmetry_defect: matrix must be square");
    double worst = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
            worst = std::max(worst, std::abs(a.value(k) - a.at(a.col(k), i)));
    return worst;
}

inline double max_abs(const CsrMatrix& a) {
    double m = 0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

//---------------------------------------------------------------------------
// Matrix Market coordinate I/O
//---------------------------------------------------------------------------

inline void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
            os << i + 1 << ' ' << a.col(k) + 1 << ' ' << a.value(k) << '\n';
}

inline void write_matrix_market(const std::string& path, const CsrMatrix& a) {
    std::ofstream os(path);
    if (!os) throw error("cannot open " + path + " for writing");
    write_matrix_market(os, a);
}

/// Reads "coordinate real general" and "coordinate real symmetric" files.
inline CsrMatrix read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw error("matrix market: empty input");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw error("matrix market: unsupported banner '" + line + "'");
    if (lower(field) != "real" && lower(field) != "integer")
        throw error("matrix market: only real fields are supported");
    const bool symmetric = lower(symmetry) == "symmetric";
    if (!symmetric && lower(symmetry) != "general") throw error("matrix market: unsupported symmetry");

    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream sizes(line);
    std::size_t rows = 0, cols = 0, entries = 0;
    if (!(sizes >> rows >> cols >> entries)) throw error("matrix market: bad size line");

    std::vector<Triplet> trips;
    trips.reserve(symmetric ? 2 * entries : entries);
    for (std::size_t e = 0; e < entries; ++e) {
        std::size_t i = 0, j = 0;
        double v = 0;
        if (!(is >> i >> j >> v)) throw error("matrix market: truncated entry list");
        if (i == 0 || j == 0 || i > rows || j > cols) throw error("matrix market: index out of range");
        trips.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
    }
    return CsrMatrix::from_triplets(rows, cols, std::move(trips));
}

inline CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw error("cannot open " + path);
    return read_matrix_market(is);
}

} // namespace splitamg

#endif
