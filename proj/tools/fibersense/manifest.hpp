#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace fibersense::app {

inline constexpr const char* kManifestSchema = "mf1";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::uintmax_t bytes = 0;
  std::string sha256;
};

/// Artifacts of one stage, keyed by path relative to the output directory.
/// Serialized with sorted keys and no timestamps, so equal outputs give
/// byte-equal manifests.
struct Manifest {
  std::string stage;
  std::map<std::string, ManifestEntry> files;

  /// Hashes `root / rel` and records it.
  void add(const std::filesystem::path& root, const std::string& rel);
  void write(const std::filesystem::path& path) const;
  /// Reads a manifest, or returns an empty one for `stage` if the file does
  /// not exist. A schema mismatch throws FormatError.
  static Manifest load_or_empty(const std::filesystem::path& path, const std::string& stage);
};

}  // namespace fibersense::app
