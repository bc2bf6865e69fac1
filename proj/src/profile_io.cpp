#include "stainshift/profile_io.hpp"

#include <cmath>
#include <sstream>

#include "stainshift/error.hpp"
#include "stainshift/file_util.hpp"

namespace stainshift {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::kMalformedProfile, "malformed profile: " + what);
}

std::array<double, 3> read_triple(const json& value, const char* field) {
  if (!value.is_array() || value.size() != 3) malformed(std::string(field) + " must be [x, y, z]");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!value[i].is_number()) malformed(std::string(field) + " entries must be numbers");
    out[i] = value[i].get<double>();
  }
  return out;
}

}  // namespace

LoadedProfile profile_from_json(const json& doc) {
  if (!doc.is_object()) malformed("top level must be an object");
  if (!doc.contains("domain_id") || !doc["domain_id"].is_string()) malformed("missing domain_id");
  if (!doc.contains("stains") || !doc["stains"].is_array()) malformed("missing stains array");

  WhitePoint white = kDefaultWhitePoint;
  if (doc.contains("white_point")) white = read_triple(doc["white_point"], "white_point");
  std::string source;
  if (doc.contains("source")) {
    if (!doc["source"].is_string()) malformed("source must be a string");
    source = doc["source"].get<std::string>();
  }
  std::vector<std::string> warnings;

  const auto& stains = doc["stains"];
  if (stains.empty() || stains.size() > 3) malformed("stains must list 1..3 entries");
  StainColumns cols(3, static_cast<Eigen::Index>(stains.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < stains.size(); ++k) {
    const auto& s = stains[k];
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string() ||
        !s.contains("od_vector")) {
      malformed("each stain needs name and od_vector");
    }
    names.push_back(s["name"].get<std::string>());
    const auto v = read_triple(s["od_vector"], "od_vector");
    const Eigen::Vector3d vec(v[0], v[1], v[2]);
    const double norm = vec.norm();
    if (!std::isfinite(norm) || !(norm > 0.0)) malformed("stain '" + names.back() + "' has zero norm");
    if (std::abs(norm - 1.0) > kProfileNormWarnThreshold) {
      std::ostringstream msg;
      msg << "stain '" << names.back() << "' od_vector norm " << norm << " normalized to 1";
      warnings.push_back(msg.str());
    }
    cols.col(static_cast<Eigen::Index>(k)) = vec;
  }

  try {
    LoadedProfile out{ReferenceProfile{doc["domain_id"].get<std::string>(),
                                       StainMatrix::from_vectors(cols, std::move(names)), white,
                                       std::move(source)},
                      std::move(warnings)};
    out.profile.validate();
    return out;
  } catch (const Error& e) {
    malformed(e.what());
  }
}

json profile_to_json(const ReferenceProfile& profile) {
  json stains = json::array();
  const auto& m = profile.stain_matrix;
  for (int k = 0; k < m.stain_count(); ++k) {
    const auto col = m.column(k);
    stains.push_back({{"name", m.names()[k]}, {"od_vector", {col[0], col[1], col[2]}}});
  }
  json doc = {{"domain_id", profile.domain_id},
              {"white_point",
               {profile.white_point[0], profile.white_point[1], profile.white_point[2]}},
              {"stains", stains}};
  if (!profile.source.empty()) doc["source"] = profile.source;
  return doc;
}

LoadedProfile load_profile(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file_text(path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kMissingFile) {
      throw Error(ErrorKind::kProfileNotFound, "profile not found: " + path.string());
    }
    throw;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(path.string() + ": " + e.what());
  }
  return profile_from_json(doc);
}

void save_profile(const ReferenceProfile& profile, const std::filesystem::path& path) {
  write_file_atomic(path, profile_to_json(profile).dump(2) + "\n");
}

}  // namespace stainshift
