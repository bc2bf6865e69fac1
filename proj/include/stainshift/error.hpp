#pragma once

#include <stdexcept>
#include <string>

namespace stainshift {

// Every failure surfaced by the library carries one of these kinds. The CLI
// maps kinds onto exit codes, so each kind must stay distinguishable.
enum class ErrorKind {
  kInvalidArgument,
  kInvalidImage,
  kDimensionMismatch,
  kChannelMismatch,
  kRankDeficient,
  kBlankTile,
  kStainCollapse,
  kNotPsd,
  kNoCells,
  kPlacementFailed,
  kStainNameMismatch,
  kProfileNotFound,
  kMalformedProfile,
  kMissingFile,
  kUnknownDomain,
  kMalformedJson,
  kDuplicatePath,
  kBadMagic,
  kTruncated,
  kDimensionOverflow,
  kInvalidDimensions,
  kTrailingData,
  kImageDecode,
  kIo,
};

// Stable snake_case identifier, used in machine-readable error output.
const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stainshift
