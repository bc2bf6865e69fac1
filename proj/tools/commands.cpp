#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "stainshift/cmap_io.hpp"
#include "stainshift/file_util.hpp"
#include "stainshift/manifest.hpp"
#include "stainshift/metrics.hpp"
#include "stainshift/png_io.hpp"
#include "stainshift/profile_io.hpp"
#include "stainshift/stain_estimation.hpp"
#include "stainshift/synth_tiles.hpp"

namespace stainshift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::kMissingFile, "no such directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<FeatureVector> read_feature_csv(const fs::path& path) {
  std::istringstream in(read_file_text(path));
  std::vector<FeatureVector> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kInvalidArgument,
                    "non-numeric feature value '" + field + "' in " + path.string());
      }
    }
    rows.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                     static_cast<Eigen::Index>(values.size())));
  }
  return rows;
}

std::vector<FeatureVector> load_features(const fs::path& source) {
  std::error_code ec;
  if (fs::is_regular_file(source, ec)) return read_feature_csv(source);
  std::vector<FeatureVector> features;
  for (const auto& file : png_files(source)) features.push_back(extract_features(read_png_rgb(file)));
  return features;
}

// Most frequent class among the cells, ties to the higher class.
Her2Class dominant_class(const std::vector<CellSpec>& cells) {
  std::array<int, kHer2ClassCount> counts{};
  for (const auto& c : cells) ++counts[static_cast<std::size_t>(c.her2_class)];
  int best = 0;
  for (int k = 1; k < kHer2ClassCount; ++k) {
    if (counts[k] >= counts[best]) best = k;
  }
  return cells.empty() ? Her2Class::kZero : static_cast<Her2Class>(best);
}

std::uint64_t tile_seed(std::uint64_t base, int index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string numbered(const std::string& stem, int index, const std::string& suffix) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return stem + "_" + buf + suffix;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRankDeficient:
    case ErrorKind::kNotPsd:
    case ErrorKind::kStainCollapse:
      return kExitNumerical;
    case ErrorKind::kIo:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

ReferenceProfile resolve_profile(const std::string& ref) {
  if (ref == "builtin:her2") return default_her2_profile();
  if (ref == "builtin:brand_A") return synthetic_brand_a();
  if (ref == "builtin:brand_B") return synthetic_brand_b();

  auto load = [](const fs::path& path) {
    auto loaded = load_profile(path);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    return loaded.profile;
  };
  std::error_code ec;
  if (fs::is_regular_file(ref, ec)) return load(ref);
  if (const char* dir = std::getenv(kProfileDirEnv); dir != nullptr && *dir != '\0') {
    for (const auto& candidate : {fs::path(dir) / ref, fs::path(dir) / (ref + ".json")}) {
      if (fs::is_regular_file(candidate, ec)) return load(candidate);
    }
  }
  throw Error(ErrorKind::kProfileNotFound, "profile not found: " + ref);
}

void print_result(const Output& out, const json& doc, const std::string& human) {
  if (out.json || human.empty()) {
    std::cout << doc.dump() << "\n";
  } else {
    std::cout << human << "\n";
  }
}

int cmd_deconvolve(const Output& /*out*/, const std::string& image, const std::string& profile_spec,
                   const std::string& cmap) {
  const auto profile = resolve_profile(profile_spec);
  const auto tile = read_png_rgb(image, profile.white_point);
  const auto c = deconvolve(rgb_to_od(tile), profile.stain_matrix);
  write_cmap(c, cmap);

  std::vector<double> means(c.channels(), 0.0);
  for (std::size_t i = 0; i < c.pixel_count(); ++i) {
    const auto px = c.pixel(i);
    for (int k = 0; k < c.channels(); ++k) means[k] += px[k];
  }
  for (double& m : means) m /= static_cast<double>(c.pixel_count());
  print_result(Output{true},
               {{"dims", {c.width(), c.height(), c.channels()}},
                {"stains", profile.stain_matrix.names()},
                {"mean_concentration", means},
                {"output", cmap}},
               "");
  return kExitOk;
}

int cmd_recompose(const Output& out, const std::string& cmap, const std::string& profile_spec,
                  const std::string& image) {
  const auto profile = resolve_profile(profile_spec);
  const auto c = read_cmap(cmap);
  const auto tile = od_to_rgb(recompose(c, profile.stain_matrix), profile.white_point);
  write_png_rgb(tile, image);
  print_result(out, {{"dims", {tile.width(), tile.height(), 3}}, {"output", image}},
               "wrote " + image);
  return kExitOk;
}

int cmd_transfer_linear(const Output& out, const std::string& image, const std::string& source,
                        const std::string& target, const std::string& dest) {
  const auto src = resolve_profile(source);
  const auto dst = resolve_profile(target);
  const auto tile = read_png_rgb(image, src.white_point);
  const auto result = linear_transfer(tile, src, dst);
  write_png_rgb(result, dest);
  print_result(out,
               {{"dims", {result.width(), result.height(), 3}},
                {"source", src.domain_id},
                {"target", dst.domain_id},
                {"output", dest}},
               "wrote " + dest);
  return kExitOk;
}

int cmd_estimate(const Output& out, const EstimateOptions& opts) {
  const auto seed = resolve_profile(opts.seed_profile);
  const auto tile = read_png_rgb(opts.image, seed.white_point);
  const EstimationConfig cfg{opts.max_iters, opts.tol, !opts.allow_negative, seed};
  const auto result = estimate_stains(rgb_to_od(tile), cfg);

  ReferenceProfile estimated{seed.domain_id, result.stain_matrix, seed.white_point,
                             "estimated from " + fs::path(opts.image).filename().string()};
  std::string trace = "iteration,objective\n";
  for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
    trace += std::to_string(i) + "," + format_double(result.objective_trace[i]) + "\n";
  }
  const std::string trace_path =
      opts.trace.empty() ? opts.out_profile + ".trace.csv" : opts.trace;
  save_profile(estimated, opts.out_profile);
  write_file_atomic(trace_path, trace);

  print_result(out,
               {{"iterations", result.iterations_used},
                {"converged", result.converged},
                {"objective", result.objective_trace.back()},
                {"profile", opts.out_profile},
                {"trace", trace_path}},
               "wrote " + opts.out_profile + " after " +
                   std::to_string(result.iterations_used) + " iterations");
  return kExitOk;
}

int cmd_synth(const Output& out, const SynthOptions& opts) {
  if (opts.count < 0) throw Error(ErrorKind::kInvalidArgument, "count must be >= 0");
  if (opts.profiles.empty() || opts.profiles.size() > 2) {
    throw Error(ErrorKind::kInvalidArgument, "synth takes one or two profiles");
  }
  if (opts.class_mix.size() != kHer2ClassCount) {
    throw Error(ErrorKind::kInvalidArgument, "class mix needs four probabilities");
  }
  ClassMix mix{};
  std::copy(opts.class_mix.begin(), opts.class_mix.end(), mix.begin());
  std::vector<ReferenceProfile> profiles;
  for (const auto& p : opts.profiles) profiles.push_back(resolve_profile(p));
  if (profiles.size() == 2 && profiles[0].domain_id == profiles[1].domain_id) {
    throw Error(ErrorKind::kInvalidArgument, "paired profiles need distinct domain ids");
  }

  const fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  TileManifest manifest;
  manifest.root = ".";
  for (int i = 0; i < opts.count; ++i) {
    const auto seed = tile_seed(opts.seed, i);
    std::vector<SyntheticTile> tiles;
    if (profiles.size() == 1) {
      tiles.push_back(generate_tile(seed, opts.size, profiles[0], opts.cells, mix));
    } else {
      auto [a, b] =
          generate_paired_domains(seed, opts.size, profiles[0], profiles[1], opts.cells, mix);
      tiles.push_back(std::move(a));
      tiles.push_back(std::move(b));
    }
    const Split split = i % 4 == 3 ? Split::kTest : Split::kTrain;
    const Her2Class score = dominant_class(tiles.front().cells);
    for (std::size_t d = 0; d < tiles.size(); ++d) {
      const std::string name = numbered("tile", i, "_" + profiles[d].domain_id + ".png");
      write_png_rgb(tiles[d].tile, dir / name);
      manifest.entries.push_back({name, profiles[d].domain_id, score, split});
    }
    write_png_labels(tiles.front().label_map, dir / numbered("label", i, ".png"));
    write_cmap(tiles.front().truth_c, dir / numbered("truth", i, ".cmap"));
  }
  write_manifest(manifest, dir / "manifest.json");

  print_result(out,
               {{"tiles", manifest.entries.size()},
                {"labels", opts.count},
                {"truths", opts.count},
                {"manifest", (dir / "manifest.json").string()}},
               "wrote " + std::to_string(manifest.entries.size()) + " tiles to " + dir.string());
  return kExitOk;
}

int cmd_eval_fid(const Output& /*out*/, const std::string& a, const std::string& b) {
  const auto fa = load_features(a);
  const auto fb = load_features(b);
  const double d = frechet_distance(summarize(fa), summarize(fb));
  print_result(Output{true}, {{"frechet_distance", d}, {"n_a", fa.size()}, {"n_b", fb.size()}},
               "");
  return kExitOk;
}

int cmd_eval_f1(const Output& /*out*/, const std::string& predicted, const std::string& truth) {
  ConfusionMatrix confusion;
  for (const auto& truth_file : png_files(truth)) {
    const fs::path pred_file = fs::path(predicted) / truth_file.filename();
    confusion.add(read_png_labels(pred_file), read_png_labels(truth_file));
  }
  const auto report = f1_report(confusion);
  json classes = json::array();
  for (int k = 0; k < kHer2ClassCount; ++k) {
    classes.push_back(std::string(her2_score_name(static_cast<Her2Class>(k))));
  }
  print_result(Output{true},
               {{"weighted_f1", report.weighted_f1},
                {"per_class_f1", report.per_class_f1},
                {"support", report.support},
                {"classes", classes},
                {"n_images", report.n_images}},
               "");
  return kExitOk;
}

int cmd_profile(const Output& /*out*/, const std::string& profile) {
  std::cout << profile_to_json(resolve_profile(profile)).dump(2) << "\n";
  return kExitOk;
}

}  // namespace stainshift::cli
