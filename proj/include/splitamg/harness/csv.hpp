#ifndef SPLITAMG_HARNESS_CSV_HPP
#define SPLITAMG_HARNESS_CSV_HPP

#include <fstream>
#include <locale>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

#include "pipeline.hpp"
#include "sweep.hpp"

namespace splitamg::harness {

// Comma-separated, '.' decimals, LF line endings, header row first.

inline constexpr const char* record_header = "n,alpha,omega,iterations,converged,wall_ms";

namespace detail {

inline std::string fixed3(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::fixed;
    os.precision(3);
    os << v;
    return os.str();
}

inline void write_record(std::ostream& os, const SweepRecord& r, bool with_omega = true) {
    os << r.n << ',' << format_number(r.alpha) << ',' << (with_omega ? format_number(r.omega) : "") << ','
       << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << fixed3(r.wall_ms);
}

} // namespace detail

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRecord> records) {
    os << record_header << '\n';
    for (const auto& r : records) {
        detail::write_record(os, r);
        os << '\n';
    }
}

/// Prediction rows; solve columns are left empty when no solve was run.
inline void write_prediction_csv(std::ostream& os, std::span<const PredictionRow> rows, bool with_omega_sigma) {
    os << record_header << ",pred_sigma_alpha" << (with_omega_sigma ? ",pred_sigma_omega" : "") << '\n';
    for (const auto& row : rows) {
        const auto& p = row.params;
        if (row.solve) {
            detail::write_record(os, *row.solve);
        } else {
            os << p.n << ',' << format_number(p.alpha) << ',' << format_number(p.omega) << ",,,";
        }
        os << ',' << format_number(p.sigma_alpha);
        if (with_omega_sigma) os << ',' << (p.sigma_omega ? format_number(*p.sigma_omega) : "");
        os << '\n';
    }
}

/// Two rows per n; the trailing smoother column tells them apart. HSS has no ω.
inline void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows) {
    os << record_header << ",smoother\n";
    for (const auto& row : rows) {
        detail::write_record(os, row.pgadi);
        os << ",pgadi-hs\n";
        detail::write_record(os, row.hss, false);
        os << ",hss\n";
    }
}

/// Opens `path` for writing in binary mode so line endings stay LF.
inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    return out;
}

} // namespace splitamg::harness

#endif
