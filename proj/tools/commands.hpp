#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stainshift/color_math.hpp"
#include "stainshift/error.hpp"

namespace stainshift::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

// Environment variable naming a directory of <domain_id>.json profiles.
inline constexpr const char* kProfileDirEnv = "STAINSHIFT_PROFILE_DIR";

int exit_code_for(ErrorKind kind);

// Accepts "builtin:her2", "builtin:brand_A", "builtin:brand_B", a path to a
// profile JSON, or a bare name looked up in $STAINSHIFT_PROFILE_DIR.
ReferenceProfile resolve_profile(const std::string& ref);

struct Output {
  bool json = false;
};

void print_result(const Output& out, const nlohmann::json& doc, const std::string& human);

int cmd_deconvolve(const Output& out, const std::string& image, const std::string& profile,
                   const std::string& cmap);
int cmd_recompose(const Output& out, const std::string& cmap, const std::string& profile,
                  const std::string& image);
int cmd_transfer_linear(const Output& out, const std::string& image, const std::string& source,
                        const std::string& target, const std::string& dest);

struct EstimateOptions {
  std::string image;
  std::string seed_profile;
  std::string out_profile;
  std::string trace;
  int max_iters = 50;
  double tol = 1e-5;
  bool allow_negative = false;
};
int cmd_estimate(const Output& out, const EstimateOptions& opts);

struct SynthOptions {
  std::uint64_t seed = 0;
  int count = 4;
  int size = 128;
  int cells = 12;
  std::vector<double> class_mix{0.25, 0.25, 0.25, 0.25};
  std::vector<std::string> profiles{"builtin:brand_A"};
  std::string out_dir;
};
int cmd_synth(const Output& out, const SynthOptions& opts);

int cmd_eval_fid(const Output& out, const std::string& a, const std::string& b);
int cmd_eval_f1(const Output& out, const std::string& predicted, const std::string& truth);
int cmd_profile(const Output& out, const std::string& profile);

}  // namespace stainshift::cli
