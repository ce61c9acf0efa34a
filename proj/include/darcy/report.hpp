#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "darcy/verification.hpp"

namespace darcy {

inline constexpr const char* kConvergenceHeader =
    "method,order,interface_mode,n,h,err_p,err_u,err_divu,rate_p,rate_u,rate_divu";
inline constexpr const char* kFieldsHeader = "x,y,ux,uy,p,side";

namespace detail {

// Shortest round-trip representation, so repeated runs give identical bytes.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace detail

inline void write_convergence_csv(std::ostream& os, Method method, int order, InterfaceMode mode,
                                  std::span<const ErrorReport> rows) {
  os << kConvergenceHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(method) << ',' << order << ',' << to_string(mode) << ',' << r.n << ','
       << detail::format_number(r.h) << ',' << detail::format_number(r.err_p) << ','
       << detail::format_number(r.err_u) << ',' << detail::format_number(r.err_divu) << ','
       << detail::format_optional(r.rate_p) << ',' << detail::format_optional(r.rate_u) << ','
       << detail::format_optional(r.rate_divu) << '\n';
  }
}

inline void write_fields_csv(std::ostream& os, std::span<const NodeRecord> records) {
  os << kFieldsHeader << '\n';
  for (const auto& r : records) {
    os << detail::format_number(r.x) << ',' << detail::format_number(r.y) << ',' << detail::format_number(r.ux)
       << ',' << detail::format_number(r.uy) << ',' << detail::format_number(r.p) << ',' << r.side << '\n';
  }
}

inline std::string fields_filename(int n) { return "fields_n" + std::to_string(n) + ".csv"; }

}  // namespace darcy
