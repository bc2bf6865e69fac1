#include "stainshift/manifest.hpp"

#include "stainshift/error.hpp"
#include "stainshift/file_util.hpp"
#include "stainshift/png_io.hpp"

namespace stainshift {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::kMalformedJson, "malformed manifest: " + what);
}

std::string string_field(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    malformed(std::string("missing string field '") + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace

std::string_view split_name(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

fs::path TileManifest::resolve(const ManifestEntry& entry) const {
  fs::path root_path(root);
  if (root_path.is_relative()) root_path = base_dir / root_path;
  return root_path / entry.path;
}

TileManifest parse_manifest(const json& doc, const std::set<std::string>& known_domains) {
  if (!doc.is_object()) malformed("top level must be an object");
  TileManifest manifest;
  manifest.root = doc.contains("root") ? string_field(doc, "root") : ".";
  if (!doc.contains("entries") || !doc["entries"].is_array()) malformed("missing entries array");

  std::set<std::string> seen;
  for (const auto& e : doc["entries"]) {
    if (!e.is_object()) malformed("entries must be objects");
    ManifestEntry entry;
    entry.path = string_field(e, "path");
    entry.domain_id = string_field(e, "domain_id");
    const auto score = parse_her2_score(string_field(e, "her2_score"));
    if (!score) malformed("her2_score must be one of 0, 1+, 2+, 3+");
    entry.her2_score = *score;
    const auto split = parse_split(string_field(e, "split"));
    if (!split) malformed("split must be train or test");
    entry.split = *split;

    if (!seen.insert(entry.path).second) {
      throw Error(ErrorKind::kDuplicatePath, "duplicate manifest path: " + entry.path);
    }
    if (!known_domains.contains(entry.domain_id)) {
      throw Error(ErrorKind::kUnknownDomain, "unknown domain_id: " + entry.domain_id);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

TileManifest load_manifest(const fs::path& path, const std::set<std::string>& known_domains) {
  const std::string text = read_file_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  TileManifest manifest = parse_manifest(doc, known_domains);
  manifest.base_dir = path.parent_path();
  return manifest;
}

std::string format_manifest(const TileManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"path", e.path},
                       {"domain_id", e.domain_id},
                       {"her2_score", std::string(her2_score_name(e.her2_score))},
                       {"split", std::string(split_name(e.split))}});
  }
  const json doc = {{"root", manifest.root}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

void write_manifest(const TileManifest& manifest, const fs::path& path) {
  write_file_atomic(path, format_manifest(manifest));
}

SplitReader::SplitReader(const TileManifest& manifest, Split split, std::string domain_id,
                         WhitePoint white)
    : manifest_(&manifest), white_(white) {
  validate_white_point(white);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.split == split && e.domain_id == domain_id) selected_.push_back(i);
  }
}

std::optional<ManifestSample> SplitReader::next() {
  if (cursor_ >= selected_.size()) return std::nullopt;
  const auto& entry = manifest_->entries[selected_[cursor_++]];
  return ManifestSample{entry, read_png_rgb(manifest_->resolve(entry), white_)};
}

}  // namespace stainshift
