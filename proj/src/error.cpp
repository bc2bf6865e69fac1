#include "stainshift/error.hpp"

namespace stainshift {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kInvalidImage: return "invalid_image";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kChannelMismatch: return "channel_mismatch";
    case ErrorKind::kRankDeficient: return "rank_deficient";
    case ErrorKind::kBlankTile: return "blank_tile";
    case ErrorKind::kStainCollapse: return "stain_collapse";
    case ErrorKind::kNotPsd: return "not_psd";
    case ErrorKind::kNoCells: return "no_cells";
    case ErrorKind::kPlacementFailed: return "placement_failed";
    case ErrorKind::kStainNameMismatch: return "stain_name_mismatch";
    case ErrorKind::kProfileNotFound: return "profile_not_found";
    case ErrorKind::kMalformedProfile: return "malformed_profile";
    case ErrorKind::kMissingFile: return "missing_file";
    case ErrorKind::kUnknownDomain: return "unknown_domain";
    case ErrorKind::kMalformedJson: return "malformed_json";
    case ErrorKind::kDuplicatePath: return "duplicate_path";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kDimensionOverflow: return "dimension_overflow";
    case ErrorKind::kInvalidDimensions: return "invalid_dimensions";
    case ErrorKind::kTrailingData: return "trailing_data";
    case ErrorKind::kImageDecode: return "image_decode";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace stainshift
