#include "cdcnet/data/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdcnet/data/pnm.hpp"

namespace cdcnet {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader = "sample_id,image_path,depth_path,label,domain_tag";

bool valid_label(const std::string& l) { return l == "live" || (l.rfind("attack:", 0) == 0 && l.size() > 7); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_manifest(const std::vector<ManifestEntry>& rows) {
  std::ostringstream os;
  os << kHeader << "\n";
  for (const auto& r : rows) {
    for (const std::string* f : {&r.sample_id, &r.image_path, &r.depth_path, &r.label, &r.domain_tag}) {
      if (f->find_first_of(",\r\n") != std::string::npos) throw DataError("manifest field '" + *f + "' contains a separator");
    }
    if (!valid_label(r.label)) throw DataError("manifest label '" + r.label + "' is invalid");
    os << r.sample_id << "," << r.image_path << "," << r.depth_path << "," << r.label << "," << r.domain_tag << "\n";
  }
  return os.str();
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  std::vector<ManifestEntry> rows;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != kHeader) throw DataError(std::string("manifest line 1: expected header '") + kHeader + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw DataError("manifest line " + std::to_string(n) + ": expected 5 fields, got " + std::to_string(f.size()));
    if (!valid_label(f[3])) throw DataError("manifest line " + std::to_string(n) + ": invalid label '" + f[3] + "'");
    if (f[0].empty() || f[1].empty() || f[2].empty()) throw DataError("manifest line " + std::to_string(n) + ": empty field");
    rows.push_back({f[0], f[1], f[2], f[3], f[4]});
  }
  if (n == 0) throw DataError("manifest is empty");
  return rows;
}

void write_dataset(const std::vector<Sample>& samples, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  fs::create_directories(fs::path(dir) / "depth", ec);
  if (ec) throw IoError("cannot create dataset directory '" + dir + "': " + ec.message());
  std::vector<ManifestEntry> rows;
  for (const Sample& s : samples) {
    ManifestEntry r{s.sample_id, "images/" + s.sample_id + ".ppm", "depth/" + s.sample_id + ".pgm",
                    s.live ? std::string("live") : "attack:" + s.attack, s.domain_tag};
    save_ppm(s.image, (fs::path(dir) / r.image_path).string());
    save_pgm(s.depth, (fs::path(dir) / r.depth_path).string());
    rows.push_back(std::move(r));
  }
  const std::string text = format_manifest(rows);
  write_file((fs::path(dir) / "manifest.csv").string(), std::vector<unsigned char>(text.begin(), text.end()));
}

std::vector<Sample> read_dataset(const std::string& manifest_path) {
  const auto bytes = read_file(manifest_path);
  const auto rows = parse_manifest(std::string(bytes.begin(), bytes.end()));
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<Sample> out;
  for (const auto& r : rows) {
    Sample s;
    s.sample_id = r.sample_id;
    s.image = load_ppm((base / r.image_path).string());
    s.depth = load_pgm((base / r.depth_path).string());
    s.live = r.label == "live";
    s.attack = s.live ? "" : r.label.substr(7);
    s.domain_tag = r.domain_tag;
    if (s.image.shape().h != s.depth.shape().h * 8 || s.image.shape().w != s.depth.shape().w * 8) {
      throw DataError("sample '" + s.sample_id + "': depth map must be 1/8 of the image extent");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cdcnet
