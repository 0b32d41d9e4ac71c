#pragma once

// Kitchen-scene gate over externally produced object detections.

#include <algorithm>
#include <cctype>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vpp/error.hpp"
#include "vpp/geometry.hpp"

namespace vpp {

struct Detection {
  std::string label;
  double score = 0;
  /// x, y, w, h in pixels.
  std::array<double, 4> bbox{};
};

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct SceneRule {
  double person_threshold = 0.90;
  double artifact_threshold = 0.80;
  std::set<std::string> artifact_classes{"bottle", "wine glass", "cup", "fork",
                                         "knife",  "spoon",      "bowl"};

  /// Evaluated configuration: person >= 0.90.
  static SceneRule evaluated() { return {}; }
  /// Stricter person gate at 0.95.
  static SceneRule strict() {
    SceneRule r;
    r.person_threshold = 0.95;
    return r;
  }

  void validate() const {
    if (!(person_threshold > 0 && person_threshold <= 1) ||
        !(artifact_threshold > 0 && artifact_threshold <= 1)) {
      throw Error(ErrorCode::config_error, "scene thresholds must lie in (0, 1]");
    }
    if (artifact_classes.empty()) throw Error(ErrorCode::config_error, "no artifact classes");
  }
};

struct SceneDecision {
  bool is_kitchen = false;
  /// Detections that satisfied the person clause.
  std::vector<Detection> persons;
  /// Detections that satisfied the artifact clause.
  std::vector<Detection> artifacts;
};

inline SceneDecision classify_scene(std::span<const Detection> dets, const SceneRule& rule) {
  std::set<std::string> classes;
  for (const auto& c : rule.artifact_classes) classes.insert(to_lower(c));

  SceneDecision out;
  for (const auto& d : dets) {
    const std::string label = to_lower(d.label);
    if (label == "person" && d.score >= rule.person_threshold) out.persons.push_back(d);
    if (classes.count(label) && d.score >= rule.artifact_threshold) out.artifacts.push_back(d);
  }
  out.is_kitchen = !out.persons.empty() && !out.artifacts.empty();
  return out;
}

/// Fraction of positions where prediction and ground truth agree.
inline double score_classifier(const std::vector<bool>& predictions,
                               const std::vector<bool>& ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw Error(ErrorCode::length_mismatch, "prediction and ground-truth lengths differ");
  }
  if (predictions.empty()) throw Error(ErrorCode::empty_input, "no predictions to score");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) agree += predictions[i] == ground_truth[i];
  return static_cast<double>(agree) / static_cast<double>(predictions.size());
}

}  // namespace vpp
