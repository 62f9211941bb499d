#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "luresid/certificate.hpp"
#include "luresid/model.hpp"
#include "luresid/sector.hpp"
#include "luresid/types.hpp"

namespace luresid {

using Json = nlohmann::json;

// ---- files ----------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Parse with error context; throws ParseError naming `origin` and location.
Json parse_json_text(const std::string& text, const std::string& origin);
Json load_json_file(const std::string& path);
void save_json_file(const Json& j, const std::string& path);

// ---- matrices --------------------------------------------------------------

/// Matrix as an array of row arrays of finite doubles. nlohmann emits
/// shortest-round-trip decimal literals, so save/load is lossless.
Json matrix_to_json(const Mat& M);
Mat matrix_from_json(const Json& j, const std::string& key);
Mat matrix_from_json(const Json& j, Index rows, Index cols,
                     const std::string& key);

// ---- model / certificate / report ------------------------------------------

Json model_to_json(const ModelParams& params);
ModelParams model_from_json(const Json& j);
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

Json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const Json& j);
void save_certificate(const Certificate& cert, const std::string& path);
Certificate load_certificate(const std::string& path);

Json report_to_json(const CertificateReport& report);

// ---- plot-data CSV ----------------------------------------------------------

/// Ellipse boundary samples, header `phi,x1,x2`.
void write_region_csv(const std::string& path,
                      const std::vector<Vec>& points);

/// Polytope boundary segments clipped to a box, header `edge_id,x1,x2`,
/// two rows (the endpoints) per segment.
void write_polytope_csv(const std::string& path,
                        const std::vector<PolytopeEdge>& edges);

// ---- misc -------------------------------------------------------------------

/// FNV-1a 64-bit content fingerprint, hex-printed.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace luresid
