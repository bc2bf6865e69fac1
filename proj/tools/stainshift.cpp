// stainshift: stain unmixing, linear stain transfer, synthetic tiles and
// transfer metrics for HER2 immunohistochemistry tiles.

#include <CLI11.hpp>

#include <iostream>

#include <json.hpp>

#include "commands.hpp"

namespace {

using namespace stainshift;
using namespace stainshift::cli;

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stain unmixing and transfer toolkit for HER2 tiles"};
  app.require_subcommand(1);
  Output out;

  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", out.json, "Structured JSON output"); };

  std::string image, profile, cmap, source, target, dest;
  int status = kExitOk;

  auto* deconv = app.add_subcommand("deconvolve", "Unmix an RGB tile into a CMAP concentration map");
  deconv->add_option("image", image, "Input PNG")->required();
  deconv->add_option("profile", profile, "Stain profile")->required();
  deconv->add_option("out", cmap, "Output CMAP file")->required();
  add_json(deconv);
  deconv->callback([&] { status = cmd_deconvolve(out, image, profile, cmap); });

  auto* recomp = app.add_subcommand("recompose", "Render a CMAP map with a stain profile");
  recomp->add_option("cmap", cmap, "Input CMAP file")->required();
  recomp->add_option("profile", profile, "Stain profile")->required();
  recomp->add_option("out", image, "Output PNG")->required();
  add_json(recomp);
  recomp->callback([&] { status = cmd_recompose(out, cmap, profile, image); });

  auto* transfer = app.add_subcommand("transfer-linear", "Restain a tile from one profile to another");
  transfer->add_option("image", image, "Input PNG")->required();
  transfer->add_option("source", source, "Source profile")->required();
  transfer->add_option("target", target, "Target profile")->required();
  transfer->add_option("out", dest, "Output PNG")->required();
  add_json(transfer);
  transfer->callback([&] { status = cmd_transfer_linear(out, image, source, target, dest); });

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate-stains", "Optimize a stain profile for one image");
  estimate->add_option("image", est.image, "Input PNG")->required();
  estimate->add_option("seed", est.seed_profile, "Seed profile")->required();
  estimate->add_option("out", est.out_profile, "Output profile JSON")->required();
  estimate->add_option("--trace", est.trace, "Objective trace CSV (default <out>.trace.csv)");
  estimate->add_option("--max-iters", est.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  estimate->add_option("--tol", est.tol, "Relative objective decrease for convergence");
  estimate->add_flag("--allow-negative", est.allow_negative, "Skip the C >= 0 projection");
  add_json(estimate);
  estimate->callback([&] { status = cmd_estimate(out, est); });

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Generate synthetic tiles with ground truth");
  synth->add_option("--seed", syn.seed, "Base seed");
  synth->add_option("--count", syn.count, "Number of tiles (pairs with two profiles)");
  synth->add_option("--size", syn.size, "Tile side in pixels");
  synth->add_option("--cells", syn.cells, "Cells per tile");
  synth->add_option("--class-mix", syn.class_mix, "Probabilities of classes 0,1+,2+,3+")
      ->delimiter(',')
      ->expected(4);
  synth->add_option("--profile", syn.profiles, "One profile, or two for paired domains")
      ->expected(1, 2);
  synth->add_option("out_dir", syn.out_dir, "Output directory")->required();
  add_json(synth);
  synth->callback([&] { status = cmd_synth(out, syn); });

  std::string set_a, set_b;
  auto* fid = app.add_subcommand("eval-fid", "Frechet distance between two tile sets");
  fid->add_option("a", set_a, "PNG directory or feature CSV")->required();
  fid->add_option("b", set_b, "PNG directory or feature CSV")->required();
  add_json(fid);
  fid->callback([&] { status = cmd_eval_fid(out, set_a, set_b); });

  auto* f1 = app.add_subcommand("eval-f1", "Weighted F1 between label-map directories");
  f1->add_option("predicted", set_a, "Directory of predicted label PNGs")->required();
  f1->add_option("truth", set_b, "Directory of truth label PNGs")->required();
  add_json(f1);
  f1->callback([&] { status = cmd_eval_f1(out, set_a, set_b); });

  auto* show = app.add_subcommand("profile", "Print a resolved stain profile as JSON");
  show->add_option("profile", profile, "Stain profile")->required();
  add_json(show);
  show->callback([&] { status = cmd_profile(out, profile); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitValidation;
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitIo;
  }
  return status;
}
