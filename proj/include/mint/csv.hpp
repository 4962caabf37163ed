#pragma once

#include <cstdio>
#include <string>

namespace mint {

//! Fixed shortest-round-trip formatting so reports are byte-identical across
//! runs with the same inputs.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace mint
