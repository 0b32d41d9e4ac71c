#pragma once

// Writes a synthetic scene to disk in the interchange layout expected by
// `vpp run`, along with a matching config and ground truth.

#include <cstdio>
#include <filesystem>
#include <string>

#include "vpp/image_io.hpp"
#include "vpp/interchange.hpp"
#include "vpp/synthetic.hpp"

namespace vpp::synthetic {

inline std::string frame_stem(int t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "f%04d", t);
  return buf;
}

struct DatasetOptions {
  SceneParams scene;
  int ad_w = 300;
  int ad_h = 600;
  bool write_masks = true;
  bool write_detections = true;
};

/// Layout: frames/, artifacts/, ad.png, gt.json and config.json (relative
/// paths, output to out/). Returns the config path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, const DatasetOptions& opt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  fs::create_directories(dir / "artifacts", ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string());

  const Backdrop bd(opt.scene);
  json gt_frames = json::array();
  for (int t = 0; t < opt.scene.frames; ++t) {
    const Frame f = bd.frame(t);
    const std::string stem = frame_stem(t);
    save_png(dir / "frames" / (stem + ".png"), f.image);
    if (opt.write_masks) {
      save_mask(dir / "artifacts" / (stem + ".wall.png"), f.wall);
      if (opt.scene.with_person) save_mask(dir / "artifacts" / (stem + ".human.png"), f.human);
    }
    if (opt.write_detections) {
      write_text_file(dir / "artifacts" / (stem + ".detections.json"),
                      detections_to_json(f.detections).dump() + "\n");
    }
    gt_frames.push_back({{"frame", t}, {"quad", vpp::detail::quad_json(f.panel)}});
  }
  save_png(dir / "ad.png", make_ad(opt.ad_w, opt.ad_h));
  write_text_file(dir / "gt.json", json{{"frames", gt_frames}}.dump() + "\n");

  json cfg = {{"frames_dir", "frames"},
              {"ad", "ad.png"},
              {"masks_dir", "artifacts"},
              {"detections_dir", "artifacts"},
              {"output_dir", "out"},
              {"light_method", "lab_light"},
              {"seed", opt.scene.seed}};
  const fs::path cfg_path = dir / "config.json";
  write_text_file(cfg_path, cfg.dump(2) + "\n");
  return cfg_path;
}

}  // namespace vpp::synthetic
