#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vpp/image_io.hpp"
#include "vpp/interchange.hpp"
#include "vpp/photometric.hpp"
#include "vpp/pipeline/bench.hpp"
#include "vpp/pipeline/config.hpp"
#include "vpp/pipeline/dataset.hpp"
#include "vpp/pipeline/metrics.hpp"
#include "vpp/pipeline/pipeline.hpp"
#include "vpp/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitOther = 3;

int exit_code(vpp::ErrorCode c) {
  switch (c) {
    case vpp::ErrorCode::config_error:
    case vpp::ErrorCode::empty_sequence: return kExitConfig;
    case vpp::ErrorCode::io_error:
    case vpp::ErrorCode::format_error: return kExitIo;
    default: return kExitOther;
  }
}

int cmd_run(const std::string& config_path) {
  const auto cfg = vpp::load_config(config_path);
  const auto run = vpp::run_pipeline(cfg);
  std::size_t placed = 0, failed = 0;
  for (const auto& r : run.results) {
    placed += r.quad.has_value();
    failed += r.error.has_value();
  }
  std::printf("frames %zu, placed %zu, frame errors %zu\n", run.results.size(), placed, failed);
  if (const auto it = run.metrics.fps.find("total"); it != run.metrics.fps.end()) {
    std::printf("throughput %.2f fps\n", it->second);
  }
  std::printf("output %s\n", cfg.output_dir.string().c_str());
  return 0;
}

/// Reads results.jsonl from a run's output directory.
std::vector<vpp::FrameOutcome> read_results(const fs::path& dir) {
  const fs::path p = dir / "results.jsonl";
  std::ifstream in(p);
  if (!in) throw vpp::Error(vpp::ErrorCode::io_error, "cannot open " + p.string());
  std::vector<vpp::FrameOutcome> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vpp::json j;
    try {
      j = vpp::json::parse(line);
    } catch (const vpp::json::exception& e) {
      throw vpp::Error(vpp::ErrorCode::format_error, p.string() + ": " + e.what());
    }
    vpp::FrameOutcome o;
    vpp::detail::with_format_check("results", [&] {
      o.frame = j.at("frame").get<int>();
      o.is_kitchen = j.at("is_kitchen").get<bool>();
      if (!j.at("quad").is_null()) o.quad = vpp::detail::quad_from_json(j.at("quad"));
      if (!j.at("reproj_error").is_null()) o.reproj_error = j.at("reproj_error").get<double>();
      return 0;
    });
    out.push_back(std::move(o));
  }
  return out;
}

int cmd_eval(const std::string& pred, const std::string& gt_path, double threshold,
             const std::string& out) {
  const auto results = read_results(pred);
  const auto gt = vpp::ground_truth_from_json(vpp::read_json_file(gt_path));
  const auto report = vpp::report_metrics(results, gt, threshold);
  const std::string text = report.to_json(false).dump(2) + "\n";
  if (!out.empty()) vpp::write_text_file(out, text);
  std::cout << text;
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out) {
  vpp::json j;
  try {
    j = vpp::read_json_file(config_path);
  } catch (const vpp::Error& e) {
    throw vpp::Error(vpp::ErrorCode::config_error, e.what());
  }
  const auto cfg = vpp::parse_bench_config(j, fs::path(config_path).parent_path());
  const auto rows = vpp::run_tracking_bench(cfg);
  std::printf("%-8s %-24s %-8s %8s %8s %9s %9s %10s\n", "detector", "matching", "filter", "pairs",
              "failed", "matches", "inliers", "reproj_px");
  vpp::json arr = vpp::json::array();
  for (const auto& r : rows) {
    std::printf("%-8s %-24s %-8s %8zu %8zu %9.1f %9.1f ", "orb", r.matcher.c_str(), r.estimator.c_str(),
                r.pairs, r.failures, r.mean_matches, r.mean_inliers);
    if (r.mean_reproj_error) {
      std::printf("%10.3f\n", *r.mean_reproj_error);
    } else {
      std::printf("%10s\n", "n/a");
    }
    arr.push_back(r.to_json());
  }
  if (!out.empty()) vpp::write_text_file(out, vpp::json{{"rows", arr}}.dump(2) + "\n");
  return 0;
}

int cmd_relight(const std::string& ad_path, const std::string& bg_path, const std::string& method,
                const std::string& out, double alpha) {
  const auto m = vpp::parse_light_method(method);
  const auto ad = vpp::load_image(ad_path);
  const auto bg = vpp::load_image(bg_path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto relit = vpp::relight(ad, bg, m, alpha);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dst = out.empty() ? fs::path(fs::path(ad_path).stem().string() + "." + method + ".png") : fs::path(out);
  vpp::save_png(dst, relit);
  const auto s = vpp::lab_channel_stats(relit);
  std::printf("%s %dx%d in %.2f ms -> %s\n", method.c_str(), ad.width(), ad.height(), ms, dst.string().c_str());
  std::printf("LAB mean %.3f %.3f %.3f std %.3f %.3f %.3f\n", s[0].mean, s[1].mean, s[2].mean, s[0].std,
              s[1].std, s[2].std);
  return 0;
}

int cmd_synth(const std::string& dir, int frames, int dx, int dy, std::uint64_t seed, bool kitchen) {
  vpp::synthetic::DatasetOptions opt;
  opt.scene.frames = frames;
  opt.scene.dx = dx;
  opt.scene.dy = dy;
  opt.scene.seed = seed;
  opt.scene.kitchen = kitchen;
  if (frames < 1) throw vpp::Error(vpp::ErrorCode::config_error, "--frames must be >= 1");
  const auto cfg = vpp::synthetic::write_dataset(dir, opt);
  std::printf("wrote %d frames; config %s\n", frames, cfg.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual product placement toolkit"};
  app.set_version_flag("--version", vpp::kVersion);
  app.require_subcommand(1);

  std::string config, pred, gt, ad, bg, method, out, dir;
  double threshold = 0.0, alpha = 1.0;
  int frames = 30, dx = 2, dy = 0;
  std::uint64_t seed = 7;
  bool not_kitchen = false;

  auto* run = app.add_subcommand("run", "Render an ad into a frame sequence");
  run->add_option("--config", config, "Pipeline config (JSON)")->required();

  auto* eval = app.add_subcommand("eval", "Score a run's placements against ground truth");
  eval->add_option("--pred", pred, "Output directory of `vpp run`")->required();
  eval->add_option("--gt", gt, "Ground-truth quads (JSON)")->required();
  eval->add_option("--overlap-threshold", threshold, "IoU above which a frame counts as overlapping");
  eval->add_option("--out", out, "Also write the report here");

  auto* bench = app.add_subcommand("bench-tracking", "Reprojection error per matcher/estimator");
  bench->add_option("--config", config, "Benchmark config (JSON)")->required();
  bench->add_option("--out", out, "Also write the table as JSON");

  auto* rel = app.add_subcommand("relight", "Relight an ad against a background");
  rel->add_option("--ad", ad, "Ad image")->required();
  rel->add_option("--bg", bg, "Background image")->required();
  rel->add_option("--method", method, "none|brightness|color|lab_light|histogram")->required();
  rel->add_option("--out", out, "Output PNG (default <ad stem>.<method>.png)");
  rel->add_option("--alpha", alpha, "Contrast gain for the brightness method");

  auto* synth = app.add_subcommand("synth", "Write a synthetic scene with artifacts and config");
  synth->add_option("--out", dir, "Target directory")->required();
  synth->add_option("--frames", frames, "Number of frames");
  synth->add_option("--dx", dx, "Camera motion per frame in x (pixels)");
  synth->add_option("--dy", dy, "Camera motion per frame in y (pixels)");
  synth->add_option("--seed", seed, "Scene seed");
  synth->add_flag("--not-kitchen", not_kitchen, "Emit detections that fail the scene gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config);
    if (*eval) return cmd_eval(pred, gt, threshold, out);
    if (*bench) return cmd_bench(config, out);
    if (*rel) return cmd_relight(ad, bg, method, out, alpha);
    if (*synth) return cmd_synth(dir, frames, dx, dy, seed, !not_kitchen);
  } catch (const vpp::Error& e) {
    std::fprintf(stderr, "vpp: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "vpp: %s\n", e.what());
    return kExitOther;
  }
  return 0;
}
