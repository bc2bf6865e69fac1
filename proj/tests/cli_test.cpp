// Drives the installed command-line binary end to end.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>

#include "stainshift/cmap_io.hpp"
#include "stainshift/file_util.hpp"
#include "stainshift/png_io.hpp"
#include "stainshift/profile_io.hpp"
#include "stainshift/synth_tiles.hpp"
#include "test_util.hpp"

namespace stainshift {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

RunResult run(const TempDir& scratch, const std::vector<std::string>& args) {
  std::string cmd = quote(STAINSHIFT_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file_text(out);
  r.err = read_file_text(err);
  return r;
}

std::size_t count_matching(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.starts_with(prefix) && e.path().extension() == ext) ++n;
  }
  return n;
}

int max_level_difference(const RgbTile& a, const RgbTile& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    worst = std::max(worst, std::abs(int{a.pixels()[i]} - int{b.pixels()[i]}));
  }
  return worst;
}

class Cli : public ::testing::Test {
 protected:
  TempDir scratch;
  TempDir work;
};

TEST_F(Cli, SynthWritesTheFileContract) {
  const auto r = run(scratch, {"synth", "--count", "4", "--size", "64", "--cells", "3", "--seed", "9", (work / "s").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count_matching(work / "s", "tile_", ".png"), 4u);
  EXPECT_EQ(count_matching(work / "s", "label_", ".png"), 4u);
  EXPECT_EQ(count_matching(work / "s", "truth_", ".cmap"), 4u);
  ASSERT_TRUE(fs::exists(work / "s" / "manifest.json"));
  const auto manifest = json::parse(read_file_text(work / "s" / "manifest.json"));
  EXPECT_EQ(manifest["entries"].size(), 4u);
}

TEST_F(Cli, SynthTruthMatchesTheLibraryGenerator) {
  ASSERT_EQ(run(scratch, {"synth", "--count", "1", "--size", "48", "--cells", "3", (work / "s").string()}).exit_code, 0);
  const auto truth = read_cmap(work / "s" / "truth_0000.cmap");
  const auto tile = read_png_rgb(work / "s" / "tile_0000_brand_A.png", synthetic_brand_a().white_point);
  EXPECT_EQ(od_to_rgb(recompose(truth, synthetic_brand_a().stain_matrix), tile.white_point()), tile);
}

TEST_F(Cli, PairedSynthWritesBothDomains) {
  const auto r = run(scratch, {"synth", "--count", "2", "--size", "48", "--cells", "3", "--profile", "builtin:brand_A",
                               "builtin:brand_B", (work / "p").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(count_matching(work / "p", "tile_", ".png"), 4u);
  EXPECT_EQ(count_matching(work / "p", "truth_", ".cmap"), 2u);
}

TEST_F(Cli, DeconvolveBackgroundGivesZeros) {
  write_png_rgb(RgbTile(16, 16), work / "bg.png");
  const auto r = run(scratch, {"deconvolve", (work / "bg.png").string(), "builtin:her2",
                               (work / "bg.cmap").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto zeros = read_cmap(work / "bg.cmap");
  for (double v : zeros.values()) EXPECT_LE(std::abs(v), 1e-6);
  const auto summary = json::parse(r.out);
  EXPECT_EQ(summary["dims"], json::array({16, 16, 3}));
  EXPECT_EQ(summary["mean_concentration"].size(), 3u);
}

TEST_F(Cli, DeconvolveRecomposeRoundTrip) {
  const auto synth = generate_tile(5, 64, default_her2_profile(), 6, kBalancedClassMix);
  write_png_rgb(synth.tile, work / "t.png");
  ASSERT_EQ(run(scratch, {"deconvolve", (work / "t.png").string(), "builtin:her2", (work / "t.cmap").string()})
                .exit_code,
            0);
  const auto r = run(scratch, {"recompose", (work / "t.cmap").string(), "builtin:her2",
                               (work / "r.png").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_LE(max_level_difference(read_png_rgb(work / "r.png"), synth.tile), 1);
}

TEST_F(Cli, TransferLinearMatchesPairedTile) {
  const auto pa = synthetic_brand_a();
  const auto pb = synthetic_brand_b();
  const auto [a, b] = generate_paired_domains(3, 64, pa, pb, 6, kBalancedClassMix);
  write_png_rgb(a.tile, work / "a.png");
  save_profile(pa, work / "a.json");
  save_profile(pb, work / "b.json");
  const auto r = run(scratch, {"transfer-linear", (work / "a.png").string(), (work / "a.json").string(),
                               (work / "b.json").string(), (work / "out.png").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_LE(max_level_difference(read_png_rgb(work / "out.png"), b.tile), 1);
}

TEST_F(Cli, ProfileDirectoryFromEnvironment) {
  save_profile(synthetic_brand_b(), work / "mine.json");
  ASSERT_EQ(setenv("STAINSHIFT_PROFILE_DIR", work.path().c_str(), 1), 0);
  const auto r = run(scratch, {"profile", "mine", "--json"});
  unsetenv("STAINSHIFT_PROFILE_DIR");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["domain_id"], "brand_B");
}

TEST_F(Cli, EstimateStainsWritesProfileAndTrace) {
  const auto synth = generate_tile(8, 64, default_her2_profile(), 6, kBalancedClassMix);
  write_png_rgb(synth.tile, work / "t.png");
  const auto r = run(scratch, {"estimate-stains", (work / "t.png").string(), "builtin:her2",
                               (work / "est.json").string(), "--json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NO_THROW(load_profile(work / "est.json"));
  const auto trace = read_file_text(work / "est.json.trace.csv");
  EXPECT_TRUE(trace.starts_with("iteration,objective\n"));
}

TEST_F(Cli, EvalOnIdenticalInputs) {
  ASSERT_EQ(run(scratch, {"synth", "--count", "4", "--size", "64", "--cells", "3", (work / "s").string()}).exit_code, 0);
  fs::create_directories(work / "labels");
  fs::create_directories(work / "tiles");
  for (const auto& e : fs::directory_iterator(work / "s")) {
    const auto name = e.path().filename().string();
    if (name.starts_with("label_")) fs::copy_file(e.path(), work / "labels" / name);
    if (name.starts_with("tile_")) fs::copy_file(e.path(), work / "tiles" / name);
  }

  const auto f1 = run(scratch, {"eval-f1", (work / "labels").string(), (work / "labels").string(), "--json"});
  ASSERT_EQ(f1.exit_code, 0) << f1.err;
  const auto report = json::parse(f1.out);
  EXPECT_EQ(report["weighted_f1"].get<double>(), 1.0);
  EXPECT_EQ(report["n_images"], 4);

  const auto fid = run(scratch, {"eval-fid", (work / "tiles").string(), (work / "tiles").string(), "--json"});
  ASSERT_EQ(fid.exit_code, 0) << fid.err;
  EXPECT_LE(std::abs(json::parse(fid.out)["frechet_distance"].get<double>()), 1e-8);
}

TEST_F(Cli, RerunsProduceIdenticalBytes) {
  const auto synth = generate_tile(6, 64, default_her2_profile(), 6, kBalancedClassMix);
  write_png_rgb(synth.tile, work / "t.png");
  const std::vector<std::vector<std::string>> commands{
      {"synth", "--count", "2", "--size", "48", "--cells", "3", (work / "s").string()},
      {"deconvolve", (work / "t.png").string(), "builtin:her2", (work / "t.cmap").string()},
      {"transfer-linear", (work / "t.png").string(), "builtin:brand_A", "builtin:brand_B",
       (work / "x.png").string()},
      {"estimate-stains", (work / "t.png").string(), "builtin:her2", (work / "e.json").string()},
  };
  const std::vector<fs::path> outputs{work / "s" / "manifest.json", work / "s" / "tile_0001_brand_A.png",
                                      work / "s" / "truth_0001.cmap",  work / "t.cmap",
                                      work / "x.png",                   work / "e.json",
                                      work / "e.json.trace.csv"};
  for (const auto& c : commands) ASSERT_EQ(run(scratch, c).exit_code, 0);
  std::vector<std::vector<std::uint8_t>> first;
  for (const auto& p : outputs) first.push_back(read_file_bytes(p));
  for (const auto& c : commands) ASSERT_EQ(run(scratch, c).exit_code, 0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    EXPECT_EQ(read_file_bytes(outputs[i]), first[i]) << outputs[i];
  }
}

TEST_F(Cli, MissingProfileIsAValidationError) {
  write_png_rgb(RgbTile(4, 4), work / "t.png");
  const auto r = run(scratch, {"deconvolve", (work / "t.png").string(), (work / "nope.json").string(),
                               (work / "o.cmap").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "profile_not_found");
  EXPECT_FALSE(fs::exists(work / "o.cmap"));
}

TEST_F(Cli, RankDeficientProfileIsANumericalError) {
  // Two identical stain vectors: valid as a profile, singular as an operator.
  const json v = {0.6, 0.7, 0.3872983346207417};
  const json degenerate = {
      {"domain_id", "flat"},
      {"stains", {{{"name", "hematoxylin"}, {"od_vector", v}}, {{"name", "dab"}, {"od_vector", v}}}},
      {"white_point", {255, 255, 255}},
      {"source", "test"}};
  write_file_atomic(work / "flat.json", degenerate.dump());
  write_png_rgb(RgbTile(4, 4), work / "t.png");
  const auto r = run(scratch, {"deconvolve", (work / "t.png").string(), (work / "flat.json").string(),
                               (work / "o.cmap").string()});
  EXPECT_EQ(r.exit_code, 3) << r.err;
  EXPECT_EQ(json::parse(r.err)["error"], "rank_deficient");
  EXPECT_FALSE(fs::exists(work / "o.cmap"));
}

TEST_F(Cli, CorruptCmapIsReportedByKind) {
  write_file_atomic(work / "bad.cmap", std::string("NOTCMAP-but-long-enough-for-a-header"));
  const auto r = run(scratch, {"recompose", (work / "bad.cmap").string(), "builtin:her2",
                               (work / "o.png").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "bad_magic");
}

TEST_F(Cli, BadUsageExitsWithTwo) {
  EXPECT_EQ(run(scratch, {"deconvolve"}).exit_code, 2);
  EXPECT_EQ(run(scratch, {"no-such-command"}).exit_code, 2);
  EXPECT_EQ(run(scratch, {"synth", "--class-mix", "0.5,0.5,0.5,0.5", (work / "s").string()}).exit_code, 2);
}

TEST_F(Cli, MissingInputImageIsAValidationError) {
  const auto r = run(scratch, {"deconvolve", (work / "absent.png").string(), "builtin:her2",
                               (work / "o.cmap").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "missing_file");
}

}  // namespace
}  // namespace stainshift
