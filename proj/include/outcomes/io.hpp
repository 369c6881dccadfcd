#pragma once

// JSON encoding of the core types.
//
//   HermitianMatrix      {"dim": d, "re": [[...]], "im": [[...]]}   row-major
//   Povm                 {"dim": d, "effects": [matrix, ...]}
//   Ensemble             {"dim": d, "states": [matrix, ...]}
//   Assemblage           {"dim": d, "settings": [povm, ...]}
//   ScoreCoefficients    {"X": X, "Y": Y, "B": B, "c": [[[c_xyb]]]}  indexed c[x][y][b]
//
// Doubles are written with the shortest representation that parses back to the same bits.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "outcomes/errors.hpp"
#include "outcomes/generalized.hpp"
#include "outcomes/quantum.hpp"

namespace outcomes::io {

using json = nlohmann::json;

inline json to_json(const HermitianMatrix& h) {
  const int d = h.dim();
  json re = json::array(), im = json::array();
  for (int i = 0; i < d; ++i) {
    json r = json::array(), c = json::array();
    for (int j = 0; j < d; ++j) {
      r.push_back(h.matrix()(i, j).real());
      c.push_back(h.matrix()(i, j).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return json{{"dim", d}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline json to_json(const std::vector<HermitianMatrix>& ops) {
  json out = json::array();
  for (const auto& h : ops) out.push_back(to_json(h));
  return out;
}

inline json to_json(const Povm& p) { return json{{"dim", p.dim()}, {"effects", to_json(p.effects())}}; }

inline json to_json(const Ensemble& e) { return json{{"dim", e.dim()}, {"states", to_json(e.states())}}; }

inline json to_json(const MeasurementAssemblage& a) {
  json settings = json::array();
  for (const auto& p : a.povms()) settings.push_back(to_json(p));
  return json{{"dim", a.dim()}, {"settings", std::move(settings)}};
}

inline json to_json(const ScoreCoefficients& c) {
  json xs = json::array();
  for (int x = 0; x < c.x_range(); ++x) {
    json ys = json::array();
    for (int y = 0; y < c.y_range(); ++y) {
      json bs = json::array();
      for (int b = 0; b < c.b_range(); ++b) bs.push_back(c.at(x, y, b));
      ys.push_back(std::move(bs));
    }
    xs.push_back(std::move(ys));
  }
  return json{{"X", c.x_range()}, {"Y", c.y_range()}, {"B", c.b_range()}, {"c", std::move(xs)}};
}

namespace detail {

inline const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw DomainError(std::string(what) + ": missing \"" + key + "\"");
  return j.at(key);
}

inline int positive_int(const json& j, const char* key, const char* what) {
  const auto& v = field(j, key, what);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw DomainError(std::string(what) + ": \"" + key + "\" must be a positive integer");
  return v.get<int>();
}

inline double number(const json& v, const char* what) {
  if (!v.is_number()) throw DomainError(std::string(what) + ": expected a number");
  return v.get<double>();
}

inline const json& sized_array(const json& v, std::size_t n, const char* what) {
  if (!v.is_array() || v.size() != n) throw DomainError(std::string(what) + ": array of length " + std::to_string(n) + " expected");
  return v;
}

inline std::vector<HermitianMatrix> matrix_list(const json& j, const char* key, int d, const char* what);

} // namespace detail

/// Throws DomainError on malformed input and InvariantError if the matrix is not Hermitian.
inline HermitianMatrix hermitian_from_json(const json& j) {
  const char* what = "HermitianMatrix";
  const int d = detail::positive_int(j, "dim", what);
  const auto& re = detail::sized_array(detail::field(j, "re", what), d, what);
  const bool has_im = j.contains("im");
  if (has_im) detail::sized_array(j.at("im"), d, what);
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    detail::sized_array(re[i], d, what);
    if (has_im) detail::sized_array(j.at("im")[i], d, what);
    for (int k = 0; k < d; ++k) {
      const double r = detail::number(re[i][k], what);
      const double c = has_im ? detail::number(j.at("im")[i][k], what) : 0.0;
      m(i, k) = Complex(r, c);
    }
  }
  return HermitianMatrix(m);
}

inline std::vector<HermitianMatrix> detail::matrix_list(const json& j, const char* key, int d, const char* what) {
  const auto& arr = field(j, key, what);
  if (!arr.is_array() || arr.empty()) throw DomainError(std::string(what) + ": \"" + key + "\" must be a non-empty array");
  std::vector<HermitianMatrix> out;
  for (const auto& item : arr) {
    out.push_back(hermitian_from_json(item));
    if (out.back().dim() != d) throw DomainError(std::string(what) + ": member dimension differs from \"dim\"");
  }
  return out;
}

inline Povm povm_from_json(const json& j) {
  const int d = detail::positive_int(j, "dim", "Povm");
  return Povm(detail::matrix_list(j, "effects", d, "Povm"));
}

inline Ensemble ensemble_from_json(const json& j) {
  const int d = detail::positive_int(j, "dim", "Ensemble");
  return Ensemble(detail::matrix_list(j, "states", d, "Ensemble"));
}

inline MeasurementAssemblage assemblage_from_json(const json& j) {
  const int d = detail::positive_int(j, "dim", "Assemblage");
  const auto& arr = detail::field(j, "settings", "Assemblage");
  if (!arr.is_array() || arr.empty()) throw DomainError("Assemblage: \"settings\" must be a non-empty array");
  std::vector<Povm> settings;
  for (const auto& p : arr) {
    settings.push_back(povm_from_json(p));
    if (settings.back().dim() != d) throw DomainError("Assemblage: setting dimension differs from \"dim\"");
  }
  return MeasurementAssemblage(std::move(settings));
}

inline ScoreCoefficients coefficients_from_json(const json& j) {
  const char* what = "ScoreCoefficients";
  const int nx = detail::positive_int(j, "X", what);
  const int ny = detail::positive_int(j, "Y", what);
  const int nb = detail::positive_int(j, "B", what);
  const auto& c = detail::sized_array(detail::field(j, "c", what), nx, what);
  ScoreCoefficients out(nx, ny, nb);
  for (int x = 0; x < nx; ++x) {
    detail::sized_array(c[x], ny, what);
    for (int y = 0; y < ny; ++y) {
      detail::sized_array(c[x][y], nb, what);
      for (int b = 0; b < nb; ++b) out.at(x, y, b) = detail::number(c[x][y][b], what);
    }
  }
  return out;
}

/// Parses text, mapping syntax errors to DomainError.
inline json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(source + ": invalid JSON (" + e.what() + ")");
  }
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

} // namespace outcomes::io
