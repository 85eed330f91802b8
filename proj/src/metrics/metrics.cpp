#include "cdcnet/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cdcnet/tensor/errors.hpp"

namespace cdcnet {

void ScoreSet::add_live(std::string id, double score) { entries.push_back({std::move(id), score, -1}); }

void ScoreSet::add_attack(std::string id, double score, const std::string& type) {
  auto it = std::find(attack_types.begin(), attack_types.end(), type);
  if (it == attack_types.end()) it = attack_types.insert(attack_types.end(), type);
  entries.push_back({std::move(id), score, static_cast<int>(it - attack_types.begin())});
}

std::size_t ScoreSet::live_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const Entry& e) { return e.attack_type < 0; }));
}

std::size_t ScoreSet::attack_count() const { return entries.size() - live_count(); }

void ScoreSet::validate() const {
  if (live_count() == 0) throw DataError("score set has no live entries");
  if (attack_count() == 0) throw DataError("score set has no attack entries");
  for (const Entry& e : entries) {
    if (!std::isfinite(e.score)) throw DataError("score of '" + e.sample_id + "' is not finite");
    if (e.attack_type >= static_cast<int>(attack_types.size())) throw DataError("attack type index out of range");
  }
}

bool ScoreSet::operator==(const ScoreSet& o) const {
  if (entries.size() != o.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry &a = entries[i], &b = o.entries[i];
    if (a.sample_id != b.sample_id || a.score != b.score) return false;
    const std::string la = a.attack_type < 0 ? "" : attack_types[a.attack_type];
    const std::string lb = b.attack_type < 0 ? "" : o.attack_types[b.attack_type];
    if ((a.attack_type < 0) != (b.attack_type < 0) || la != lb) return false;
  }
  return true;
}

ErrorRates apcer_bpcer_acer(const ScoreSet& scores, double threshold) {
  scores.validate();
  const std::size_t types = scores.attack_types.size();
  std::vector<std::size_t> accepted(types, 0), total(types, 0);
  std::size_t live = 0, rejected = 0;
  for (const auto& e : scores.entries) {
    if (e.attack_type < 0) {
      ++live;
      rejected += e.score < threshold;
    } else {
      ++total[e.attack_type];
      accepted[e.attack_type] += e.score >= threshold;
    }
  }
  ErrorRates r;
  r.apcer_per_type.assign(types, 0.0);
  for (std::size_t t = 0; t < types; ++t) {
    if (total[t] == 0) continue;
    r.apcer_per_type[t] = static_cast<double>(accepted[t]) / static_cast<double>(total[t]);
    r.apcer = std::max(r.apcer, r.apcer_per_type[t]);
  }
  r.bpcer = static_cast<double>(rejected) / static_cast<double>(live);
  r.acer = (r.apcer + r.bpcer) / 2.0;
  return r;
}

namespace {

struct Rates {
  double far, frr;
};

Rates rates_at(const ScoreSet& s, double threshold) {
  std::size_t live = 0, attack = 0, fa = 0, fr = 0;
  for (const auto& e : s.entries) {
    if (e.attack_type < 0) {
      ++live;
      fr += e.score < threshold;
    } else {
      ++attack;
      fa += e.score >= threshold;
    }
  }
  return {static_cast<double>(fa) / static_cast<double>(attack), static_cast<double>(fr) / static_cast<double>(live)};
}

}  // namespace

EerPoint eer(const ScoreSet& scores) {
  scores.validate();
  std::vector<double> values;
  for (const auto& e : scores.entries) values.push_back(e.score);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> thresholds{values.front() - 1.0};
  for (std::size_t i = 0; i + 1 < values.size(); ++i) thresholds.push_back(values[i] + (values[i + 1] - values[i]) / 2);
  thresholds.push_back(values.back() + 1.0);

  // Sweep in ascending order; FAR falls and FRR rises as entries cross.
  std::vector<std::pair<double, int>> sorted;
  std::size_t live = 0, attack = 0;
  for (const auto& e : scores.entries) {
    sorted.emplace_back(e.score, e.attack_type);
    (e.attack_type < 0 ? live : attack)++;
  }
  std::sort(sorted.begin(), sorted.end());
  std::size_t idx = 0, fr = 0, fa = attack;
  EerPoint best;
  double best_gap = 2.0;
  for (double t : thresholds) {
    while (idx < sorted.size() && sorted[idx].first < t) {
      if (sorted[idx].second < 0) ++fr;
      else --fa;
      ++idx;
    }
    const double far = static_cast<double>(fa) / static_cast<double>(attack);
    const double frr = static_cast<double>(fr) / static_cast<double>(live);
    const double gap = std::abs(far - frr);
    if (gap < best_gap) {
      best_gap = gap;
      best = {(far + frr) / 2.0, t, far, frr};
    }
  }
  return best;
}

double half_total_error(const ScoreSet& scores, double threshold) {
  scores.validate();
  const Rates r = rates_at(scores, threshold);
  return (r.far + r.frr) / 2.0;
}

double hter(const ScoreSet& dev, const ScoreSet& test) { return half_total_error(test, eer(dev).threshold); }

double auc(const ScoreSet& scores) {
  scores.validate();
  std::vector<std::pair<double, bool>> v;
  for (const auto& e : scores.entries) v.emplace_back(e.score, e.attack_type < 0);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Count, for each live entry, attacks strictly below plus half the ties.
  double wins = 0;
  std::size_t attacks_below = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i, live = 0, attack = 0;
    while (j < v.size() && v[j].first == v[i].first) (v[j++].second ? live : attack)++;
    wins += static_cast<double>(live) * (static_cast<double>(attacks_below) + 0.5 * static_cast<double>(attack));
    attacks_below += attack;
    i = j;
  }
  return wins / (static_cast<double>(scores.live_count()) * static_cast<double>(scores.attack_count()));
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_scores_csv(const ScoreSet& scores) {
  std::ostringstream os;
  os << "sample_id,score,label\n";
  for (const auto& e : scores.entries) {
    if (e.sample_id.find_first_of(",\r\n") != std::string::npos) {
      throw DataError("sample_id '" + e.sample_id + "' cannot be written to CSV");
    }
    os << e.sample_id << "," << format_double(e.score) << ","
       << (e.attack_type < 0 ? std::string("live") : "attack:" + scores.attack_types.at(e.attack_type)) << "\n";
  }
  return os.str();
}

ScoreSet parse_scores_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  ScoreSet s;
  auto fail = [&](const std::string& why) { return DataError("scores line " + std::to_string(n) + ": " + why); };
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != "sample_id,score,label") throw fail("expected header 'sample_id,score,label'");
      continue;
    }
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) throw fail("expected three fields");
    const std::string id = line.substr(0, a), label = line.substr(b + 1);
    const std::string num = line.substr(a + 1, b - a - 1);
    double score = 0;
    auto res = std::from_chars(num.data(), num.data() + num.size(), score);
    if (res.ec != std::errc() || res.ptr != num.data() + num.size()) throw fail("bad score '" + num + "'");
    if (id.empty()) throw fail("empty sample_id");
    if (label == "live") {
      s.add_live(id, score);
    } else if (label.rfind("attack:", 0) == 0 && label.size() > 7) {
      s.add_attack(id, score, label.substr(7));
    } else {
      throw fail("label must be 'live' or 'attack:<type>', got '" + label + "'");
    }
  }
  if (n == 0) throw DataError("scores file is empty");
  return s;
}

void write_scores_csv(const ScoreSet& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_scores_csv(scores);
  if (!out) throw IoError("failed writing '" + path + "'");
}

ScoreSet read_scores_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scores_csv(ss.str());
}

}  // namespace cdcnet
