#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stainshift/color_math.hpp"

namespace stainshift {

// Stain vectors whose stored norm deviates from 1 by more than this are
// normalized with a warning.
inline constexpr double kProfileNormWarnThreshold = 1e-3;

struct LoadedProfile {
  ReferenceProfile profile;
  std::vector<std::string> warnings;
};

// {"domain_id": str, "white_point": [r,g,b],
//  "stains": [{"name": str, "od_vector": [x,y,z]}, ...], "source": str?}
LoadedProfile profile_from_json(const nlohmann::json& doc);
nlohmann::json profile_to_json(const ReferenceProfile& profile);

// Throws kProfileNotFound for a missing file, kMalformedProfile otherwise.
LoadedProfile load_profile(const std::filesystem::path& path);
void save_profile(const ReferenceProfile& profile, const std::filesystem::path& path);

}  // namespace stainshift
