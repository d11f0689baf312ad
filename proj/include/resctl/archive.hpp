#pragma once

// JSON archive of a ResonanceSystem. Complex numbers are [re, im] pairs and
// matrices are stored row-major. Doubles are written in shortest round-trip
// form, so load(save(x)) reproduces every value bit for bit.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "resctl/errors.hpp"
#include "resctl/system.hpp"

namespace resctl {

inline constexpr int kArchiveVersion = 1;
inline constexpr const char* kArchiveFormat = "resctl-system";

struct SystemArchive {
  int version = kArchiveVersion;
  ResonanceSystem system;
  nlohmann::json generator;            // null when the system did not come from the generator
  std::vector<std::string> warnings;   // filled by load_archive
};

namespace detail {

inline nlohmann::json to_json(const RVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json to_json(const CVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline nlohmann::json to_json(const CMatrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(to_json(m(r, c)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline const nlohmann::json& member(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ArchiveError("expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw ArchiveError("missing field", path.empty() ? key : path + "." + key);
  return *it;
}

inline double real_value(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ArchiveError("NaN or non-numeric value", path);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ArchiveError("non-finite value", path);
  return v;
}

inline cplx complex_value(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ArchiveError("expected [re, im]", path);
  return {real_value(j[0], path + ".re"), real_value(j[1], path + ".im")};
}

inline RVector real_vector(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ArchiveError("expected an array", path);
  RVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_value(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline CVector complex_vector(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ArchiveError("expected an array", path);
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_value(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline CMatrix complex_matrix(const nlohmann::json& j, const std::string& path) {
  const auto rows = member(j, "rows", path);
  const auto cols = member(j, "cols", path);
  if (!rows.is_number_unsigned() || !cols.is_number_unsigned()) throw ArchiveError("bad shape", path);
  const auto& data = member(j, "data", path);
  const auto nr = rows.get<Eigen::Index>();
  const auto nc = cols.get<Eigen::Index>();
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != nr * nc) {
    throw ArchiveError("data length does not match rows*cols", path + ".data");
  }
  CMatrix m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const auto idx = static_cast<std::size_t>(r * nc + c);
      m(r, c) = complex_value(data[idx], path + "[" + std::to_string(r) + "," + std::to_string(c) + "]");
    }
  }
  return m;
}

}  // namespace detail

inline std::string save_archive(const SystemArchive& ar) {
  validate(ar.system);
  const auto& s = ar.system;
  nlohmann::json j;
  j["format"] = kArchiveFormat;
  j["version"] = kArchiveVersion;
  j["system"] = {{"E_g", s.E_g},
                 {"hbar", s.hbar},
                 {"E_alpha", detail::to_json(s.E_alpha)},
                 {"Delta_alpha", detail::to_json(s.Delta_alpha)},
                 {"R", detail::to_json(s.R)},
                 {"mu_kappa", detail::to_json(s.mu_kappa)}};
  if (!ar.generator.is_null()) j["generator"] = ar.generator;
  return j.dump(1);
}

inline std::string save_archive(const ResonanceSystem& sys) { return save_archive(SystemArchive{kArchiveVersion, sys, {}, {}}); }

inline SystemArchive load_archive(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArchiveError(std::string("malformed archive: ") + e.what(), "archive");
  }
  const auto& fmt = detail::member(j, "format", "");
  if (!fmt.is_string() || fmt.get<std::string>() != kArchiveFormat) throw ArchiveError("not a resctl system archive", "format");
  const auto& ver = detail::member(j, "version", "");
  if (!ver.is_number_integer() || ver.get<int>() != kArchiveVersion) {
    throw ArchiveError("unsupported archive version (expected " + std::to_string(kArchiveVersion) + ")", "version");
  }

  SystemArchive ar;
  const auto& js = detail::member(j, "system", "");
  auto& s = ar.system;
  s.E_g = detail::real_value(detail::member(js, "E_g", "system"), "system.E_g");
  s.hbar = detail::real_value(detail::member(js, "hbar", "system"), "system.hbar");
  s.E_alpha = detail::real_vector(detail::member(js, "E_alpha", "system"), "system.E_alpha");
  s.Delta_alpha = detail::real_vector(detail::member(js, "Delta_alpha", "system"), "system.Delta_alpha");
  s.R = detail::complex_matrix(detail::member(js, "R", "system"), "system.R");
  s.mu_kappa = detail::complex_vector(detail::member(js, "mu_kappa", "system"), "system.mu_kappa");
  try {
    validate(s);
  } catch (const ArchiveError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ArchiveError(e.what(), "system." + e.field());
  }
  if (auto it = j.find("generator"); it != j.end()) ar.generator = *it;

  const RVector norms = s.column_norms();
  for (Eigen::Index k = 0; k < norms.size(); ++k) {
    if (std::abs(norms(k) - 1.0) > 1e-6) {
      ar.warnings.push_back("column " + std::to_string(k) + " of R has norm " + std::to_string(norms(k)));
    }
  }
  return ar;
}

inline void write_archive_file(const std::string& path, const SystemArchive& ar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path, "archive");
  out << save_archive(ar) << '\n';
}

inline SystemArchive read_archive_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("cannot open " + path, "archive");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_archive(ss.str());
}

}  // namespace resctl
