#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace projlens {

std::string sha256_hex(std::string_view bytes);

// Digest of a file, or for a directory the digest of "relative-path\0file
// digest\n" over every regular file in lexicographic order.
std::string content_digest(const std::filesystem::path& path);

// Provenance block embedded in every report. Holds nothing time- or
// host-dependent so reruns produce identical bytes.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> input_digests;
  std::string tool_version;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
};

}  // namespace projlens
