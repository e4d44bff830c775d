/* Copyright 2026 The semsurf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "semsurf/export.h"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace semsurf {
namespace fs = std::filesystem;

void write_ply(const fs::path& path, const std::vector<ScoredPoint>& points) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << points.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\nproperty float score\n"
      << "end_header\n";
  out << std::setprecision(9);
  for (const ScoredPoint& p : points) {
    out << static_cast<float>(p.position.x) << ' ' << static_cast<float>(p.position.y) << ' '
        << static_cast<float>(p.position.z) << ' ' << p.score << '\n';
  }
}

std::vector<ScoredPoint> read_ply(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw FormatError(path.string() + ": missing ply magic");
  std::size_t count = 0;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream is(line);
    std::string word;
    is >> word;
    if (word == "element") {
      std::string name;
      is >> name >> count;
    }
  }
  if (line != "end_header") throw FormatError(path.string() + ": missing end_header");
  std::vector<ScoredPoint> points(count);
  for (ScoredPoint& p : points) {
    float x = 0.0F;
    float y = 0.0F;
    float z = 0.0F;
    if (!(in >> x >> y >> z >> p.score)) throw FormatError(path.string() + ": truncated vertices");
    p.position = {x, y, z};
  }
  return points;
}

std::vector<ScoredPoint> filter_by_score(const std::vector<ScoredPoint>& points, float threshold) {
  std::vector<ScoredPoint> out;
  for (const ScoredPoint& p : points) {
    if (p.score >= threshold) out.push_back(p);
  }
  return out;
}

void write_detections(const fs::path& path, const std::vector<Detection>& detections,
                      const Calibration& calib) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const Detection& d : detections) {
    out << format_label_line(lidar_box_to_label(d.box, d.cls, calib, d.confidence)) << '\n';
  }
}

std::vector<Detection> read_detections(const fs::path& path, const Calibration& calib) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<Detection> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const KittiLabel label = parse_label_line(line);
    const auto cls = parse_class(label.type);
    if (!cls) continue;
    out.push_back({label_to_lidar_box(label, calib), label.score.value_or(1.0), *cls});
  }
  return out;
}

}  // namespace semsurf
