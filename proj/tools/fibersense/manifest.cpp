#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "fibersense/core/error.hpp"

namespace fibersense::app {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}' for hashing", path.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto n = in.gcount();
    if (n > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(n));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void Manifest::add(const std::filesystem::path& root, const std::string& rel) {
  const auto p = root / rel;
  files[rel] = ManifestEntry{std::filesystem::file_size(p), sha256_file(p)};
}

void Manifest::write(const std::filesystem::path& path) const {
  json j;
  j["schema"] = kManifestSchema;
  j["stage"] = stage;
  j["files"] = json::array();
  for (const auto& [rel, e] : files) j["files"].push_back({{"path", rel}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

Manifest Manifest::load_or_empty(const std::filesystem::path& path, const std::string& stage) {
  Manifest m;
  m.stage = stage;
  if (!std::filesystem::exists(path)) return m;
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("'{}': malformed manifest: {}", path.string(), e.what()));
  }
  if (j.value("schema", "") != kManifestSchema) {
    throw FormatError(fmt::format("'{}': manifest schema mismatch (expected '{}')", path.string(), kManifestSchema));
  }
  for (const auto& f : j.at("files")) {
    m.files[f.at("path").get<std::string>()] =
        ManifestEntry{f.at("bytes").get<std::uintmax_t>(), f.at("sha256").get<std::string>()};
  }
  return m;
}

}  // namespace fibersense::app
