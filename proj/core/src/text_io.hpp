#pragma once

// Token-level helpers for the versioned text checkpoints. Doubles are written as
// hexfloats so a save/load round trip is bit-exact.

#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ilgov/errors.hpp"

namespace ilgov::detail {

inline void put(std::ostream& os, double v) { os << fmt::format(" {:a}", v); }

inline void put_vector(std::ostream& os, const std::string& key, const Eigen::VectorXd& v) {
  os << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) put(os, v[i]);
  os << '\n';
}

inline void put_matrix(std::ostream& os, const std::string& key, const Eigen::MatrixXd& m) {
  os << key << ' ' << m.rows() << ' ' << m.cols();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(os, m(r, c));
  os << '\n';
}

inline std::string word(std::istream& is) {
  std::string s;
  if (!(is >> s)) throw FormatError("truncated checkpoint");
  return s;
}

inline void expect(std::istream& is, const std::string& key) {
  const std::string got = word(is);
  if (got != key) throw FormatError("checkpoint: expected '" + key + "', found '" + got + "'");
}

inline double get_double(std::istream& is) {
  const std::string s = word(is);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw FormatError("checkpoint: bad number '" + s + "'");
  return v;
}

inline long get_long(std::istream& is) {
  const std::string s = word(is);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || v < 0)
    throw FormatError("checkpoint: bad count '" + s + "'");
  return v;
}

inline Eigen::VectorXd get_vector(std::istream& is, const std::string& key) {
  expect(is, key);
  Eigen::VectorXd v(get_long(is));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get_double(is);
  return v;
}

inline Eigen::MatrixXd get_matrix(std::istream& is, const std::string& key) {
  expect(is, key);
  const long r = get_long(is);
  const long c = get_long(is);
  Eigen::MatrixXd m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = get_double(is);
  return m;
}

}  // namespace ilgov::detail
