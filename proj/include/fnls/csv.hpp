#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace fnls::csv {

/// Formats one CSV field; doubles carry 17 significant digits so that
/// parsing the text reproduces the bits.
template <class T>
std::string field(const T& v) {
  std::ostringstream os;
  if constexpr (std::is_floating_point_v<T>) {
    os << std::setprecision(17) << v;
  } else if constexpr (std::is_same_v<T, bool>) {
    os << (v ? 1 : 0);
  } else {
    os << v;
  }
  return os.str();
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

template <class... Ts>
void row(std::ostream& os, const Ts&... values) {
  write_row(os, {field(values)...});
}

} // namespace fnls::csv
