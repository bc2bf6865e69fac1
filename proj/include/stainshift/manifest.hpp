#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "stainshift/her2.hpp"
#include "stainshift/image.hpp"

namespace stainshift {

enum class Split { kTrain, kTest };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view s);

struct ManifestEntry {
  std::string path;
  std::string domain_id;
  Her2Class her2_score = Her2Class::kZero;
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

// {"root": str, "entries": [{"path", "domain_id", "her2_score", "split"}]}
struct TileManifest {
  std::string root;
  std::vector<ManifestEntry> entries;
  // Directory a relative root is resolved against (the manifest's folder).
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

// Validation: unique paths, domain_id in known_domains. Errors are
// kMalformedJson, kDuplicatePath and kUnknownDomain respectively.
TileManifest parse_manifest(const nlohmann::json& doc, const std::set<std::string>& known_domains);
TileManifest load_manifest(const std::filesystem::path& path,
                           const std::set<std::string>& known_domains);

// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string format_manifest(const TileManifest& manifest);
void write_manifest(const TileManifest& manifest, const std::filesystem::path& path);

struct ManifestSample {
  ManifestEntry entry;
  RgbTile tile;
};

// Single-consumer stream over the entries of one split and domain, in
// manifest order. Images are decoded lazily; a missing image raises
// kMissingFile from next().
class SplitReader {
 public:
  SplitReader(const TileManifest& manifest, Split split, std::string domain_id,
              WhitePoint white = kDefaultWhitePoint);
  // The reader borrows the manifest; it must outlive the reader.
  SplitReader(TileManifest&&, Split, std::string, WhitePoint = kDefaultWhitePoint) = delete;

  std::optional<ManifestSample> next();
  std::size_t size() const noexcept { return selected_.size(); }

 private:
  const TileManifest* manifest_;
  std::vector<std::size_t> selected_;
  std::size_t cursor_ = 0;
  WhitePoint white_;
};

}  // namespace stainshift
