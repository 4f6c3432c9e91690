#pragma once

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace hystermag {

/// Round-trip formatting of a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Metadata comment for output files. The ISO timestamp is taken from
/// SOURCE_DATE_EPOCH when set and left out otherwise, so repeated runs give
/// identical files.
inline std::string run_metadata(std::string_view what) {
  std::string out = "hystermag 0.1.0 ";
  out += what;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    const std::time_t t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    out += " generated=";
    out += buf;
  }
  return out;
}

/// Minimal CSV emitter: optional "# ..." metadata line, header, rows.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out, std::string_view metadata = {}) : out_(out) {
    if (!metadata.empty()) out_ << "# " << metadata << '\n';
  }

  void header(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((write_cell(values, first)), ...);
    out_ << '\n';
  }

 private:
  template <typename T>
  void write_cell(const T& v, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      out_ << format_double(static_cast<double>(v));
    } else {
      out_ << v;
    }
  }

  std::ostream& out_;
};

}  // namespace hystermag
