#pragma once

#include <string>
#include <vector>

#include "cdcnet/data/synth.hpp"

namespace cdcnet {

/// One manifest row: `sample_id,image_path,depth_path,label,domain_tag`,
/// label `live` or `attack:<type>`. Paths are relative to the manifest.
struct ManifestEntry {
  std::string sample_id;
  std::string image_path;
  std::string depth_path;
  std::string label;
  std::string domain_tag;
  bool operator==(const ManifestEntry&) const = default;
};

std::string format_manifest(const std::vector<ManifestEntry>& rows);
std::vector<ManifestEntry> parse_manifest(const std::string& text);

/// Writes images/<id>.ppm, depth/<id>.pgm and manifest.csv under `dir`.
void write_dataset(const std::vector<Sample>& samples, const std::string& dir);
/// Loads every sample listed in a manifest file.
std::vector<Sample> read_dataset(const std::string& manifest_path);

}  // namespace cdcnet
