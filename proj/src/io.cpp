#include "luresid/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "luresid/version.hpp"

namespace luresid {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw ParseError("read failure on: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) throw ParseError("write failure on: " + path);
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("JSON parse error in " + origin + ": " + e.what());
  }
}

Json load_json_file(const std::string& path) {
  return parse_json_text(read_text_file(path), path);
}

void save_json_file(const Json& j, const std::string& path) {
  write_text_file(path, j.dump(2) + "\n");
}

Json matrix_to_json(const Mat& M) {
  if (!M.allFinite()) {
    throw ConfigError("matrix_to_json: refusing to serialize non-finite data");
  }
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ParseError("field '" + key + "': expected an array of row arrays");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Mat M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ParseError("field '" + key + "': ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) {
        throw ParseError("field '" + key + "': non-numeric entry");
      }
      const double value = cell.get<double>();
      if (!std::isfinite(value)) {
        throw ParseError("field '" + key + "': non-finite entry");
      }
      M(i, c) = value;
    }
  }
  return M;
}

Mat matrix_from_json(const Json& j, Index rows, Index cols,
                     const std::string& key) {
  Mat M = matrix_from_json(j, key);
  if (M.rows() != rows || M.cols() != cols) {
    throw ParseError("field '" + key + "': shape " + std::to_string(M.rows()) +
                     "x" + std::to_string(M.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  return M;
}

namespace {

const Json& require_field(const Json& j, const char* key,
                          const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(what + ": missing field '" + key + "'");
  }
  return *it;
}

int require_schema(const Json& j, int expected, const std::string& what) {
  const auto& v = require_field(j, "schema_version", what);
  if (!v.is_number_integer() || v.get<int>() != expected) {
    throw ParseError(what + ": schema_version mismatch (expected " +
                     std::to_string(expected) + ")");
  }
  return expected;
}

}  // namespace

Json model_to_json(const ModelParams& params) {
  params.validate();
  Json j;
  j["schema_version"] = kModelSchemaVersion;
  j["dims"] = {{"n", params.dims.n},
               {"r", params.dims.r},
               {"e", params.dims.e},
               {"m", params.dims.m}};
  j["A"] = matrix_to_json(params.A);
  j["B"] = matrix_to_json(params.B);
  j["B2"] = matrix_to_json(params.B2);
  j["C"] = matrix_to_json(params.C);
  j["D"] = matrix_to_json(params.D);
  j["D12"] = matrix_to_json(params.D12);
  j["C2"] = matrix_to_json(params.C2);
  j["D21"] = matrix_to_json(params.D21);
  return j;
}

ModelParams model_from_json(const Json& j) {
  require_schema(j, kModelSchemaVersion, "model");
  const auto& dims = require_field(j, "dims", "model");
  Dimensions d;
  d.n = require_field(dims, "n", "model.dims").get<Index>();
  d.r = require_field(dims, "r", "model.dims").get<Index>();
  d.e = require_field(dims, "e", "model.dims").get<Index>();
  d.m = require_field(dims, "m", "model.dims").get<Index>();
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("model.dims: ") + e.what());
  }
  ModelParams p;
  p.dims = d;
  p.A = matrix_from_json(require_field(j, "A", "model"), d.n, d.n, "A");
  p.B = matrix_from_json(require_field(j, "B", "model"), d.n, d.r, "B");
  p.B2 = matrix_from_json(require_field(j, "B2", "model"), d.n, d.m, "B2");
  p.C = matrix_from_json(require_field(j, "C", "model"), d.e, d.n, "C");
  p.D = matrix_from_json(require_field(j, "D", "model"), d.e, d.r, "D");
  p.D12 = matrix_from_json(require_field(j, "D12", "model"), d.e, d.m, "D12");
  p.C2 = matrix_from_json(require_field(j, "C2", "model"), d.m, d.n, "C2");
  p.D21 = matrix_from_json(require_field(j, "D21", "model"), d.m, d.r, "D21");
  return p;
}

void save_model(const ModelParams& params, const std::string& path) {
  save_json_file(model_to_json(params), path);
}

ModelParams load_model(const std::string& path) {
  return model_from_json(load_json_file(path));
}

Json certificate_to_json(const Certificate& cert) {
  cert.validate();
  Json j;
  j["schema_version"] = kCertificateSchemaVersion;
  Mat M = Mat::Zero(cert.m(), cert.m());
  M.diagonal() = cert.m_diag;
  j["P"] = matrix_to_json(cert.P);
  j["M"] = matrix_to_json(M);
  j["L"] = matrix_to_json(cert.L);
  j["s"] = cert.s;
  j["alpha"] = cert.alpha;
  return j;
}

Certificate certificate_from_json(const Json& j) {
  require_schema(j, kCertificateSchemaVersion, "certificate");
  Certificate cert;
  cert.P = matrix_from_json(require_field(j, "P", "certificate"), "P");
  const Mat M = matrix_from_json(require_field(j, "M", "certificate"), "M");
  if (M.rows() != M.cols()) throw ParseError("certificate: M not square");
  Mat off = M;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 0.0) {
    throw ParseError("certificate: M must be diagonal");
  }
  cert.m_diag = M.diagonal();
  cert.L = matrix_from_json(require_field(j, "L", "certificate"), cert.m_diag.size(),
                            cert.P.rows(), "L");
  cert.s = require_field(j, "s", "certificate").get<double>();
  cert.alpha = require_field(j, "alpha", "certificate").get<double>();
  try {
    cert.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("certificate: ") + e.what());
  }
  return cert;
}

void save_certificate(const Certificate& cert, const std::string& path) {
  save_json_file(certificate_to_json(cert), path);
}

Certificate load_certificate(const std::string& path) {
  return certificate_from_json(load_json_file(path));
}

Json report_to_json(const CertificateReport& report) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["passed"] = report.passed();
  j["f_negative_definite"] = report.f_negative_definite;
  j["g_psd"] = report.g_psd;
  j["delta_ok"] = report.delta_ok;
  j["alpha_ok"] = report.alpha_ok;
  j["delta"] = report.delta;
  j["delta_max"] = report.delta_max;
  j["alpha"] = report.alpha;
  j["s"] = report.s;
  j["lambda_min"] = report.lambda_min;
  j["lambda_max"] = report.lambda_max;
  j["region_X"] = matrix_to_json(report.region.X);
  j["H"] = matrix_to_json(report.H);
  j["psd_shift"] = kPsdShift;  // tolerance used for the region LMI checks
  return j;
}

void write_region_csv(const std::string& path, const std::vector<Vec>& points) {
  std::ostringstream out;
  out << "phi,x1,x2\n";
  out.precision(17);
  const double two_pi = 6.283185307179586476925286766559;
  const auto count = static_cast<double>(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double phi = two_pi * static_cast<double>(k) / count;
    out << phi << "," << points[k](0) << "," << points[k](1) << "\n";
  }
  write_text_file(path, out.str());
}

void write_polytope_csv(const std::string& path,
                        const std::vector<PolytopeEdge>& edges) {
  std::ostringstream out;
  out << "edge_id,x1,x2\n";
  out.precision(17);
  for (const auto& e : edges) {
    out << e.edge_id << "," << e.p0(0) << "," << e.p0(1) << "\n";
    out << e.edge_id << "," << e.p1(0) << "," << e.p1(1) << "\n";
  }
  write_text_file(path, out.str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return s;
}

}  // namespace luresid
