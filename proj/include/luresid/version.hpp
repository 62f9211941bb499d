#pragma once

namespace luresid {

inline constexpr const char* kVersion = "0.1.0";

// Serialization schema versions. Bump on breaking format changes; loaders
// reject mismatched versions explicitly instead of guessing.
inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kCertificateSchemaVersion = 1;
inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kRunConfigSchemaVersion = 1;

}  // namespace luresid
