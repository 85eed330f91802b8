#pragma once

#include <string>
#include <vector>

namespace cdcnet {

/// Scored samples. Higher score means more live; a score equal to the
/// threshold is classified live.
struct ScoreSet {
  struct Entry {
    std::string sample_id;
    double score = 0;
    int attack_type = -1;  // -1 = live, otherwise index into attack_types
  };

  std::vector<Entry> entries;
  std::vector<std::string> attack_types;

  void add_live(std::string id, double score);
  void add_attack(std::string id, double score, const std::string& type);
  std::size_t live_count() const;
  std::size_t attack_count() const;
  /// At least one live and one attack entry, finite scores. Throws DataError.
  void validate() const;
  bool operator==(const ScoreSet&) const;
};

struct ErrorRates {
  double apcer = 0, bpcer = 0, acer = 0;
  std::vector<double> apcer_per_type;  // types without samples are skipped in the max and reported as 0
};

ErrorRates apcer_bpcer_acer(const ScoreSet& scores, double threshold);

struct EerPoint {
  double eer = 0;
  double threshold = 0;
  double far = 0;  // pooled attacks accepted
  double frr = 0;  // live rejected
};

/// Thresholds below all scores, at midpoints of adjacent distinct scores and
/// above all scores; the one minimising |FAR - FRR| wins, lowest on ties.
EerPoint eer(const ScoreSet& scores);

/// Half total error on `test` at the EER threshold of `dev`.
double hter(const ScoreSet& dev, const ScoreSet& test);
/// (FAR + FRR) / 2 at a given threshold.
double half_total_error(const ScoreSet& scores, double threshold);

/// Mann-Whitney statistic, ties counted one half.
double auc(const ScoreSet& scores);

/// CSV `sample_id,score,label` with label `live` or `attack:<type>`.
std::string format_scores_csv(const ScoreSet& scores);
ScoreSet parse_scores_csv(const std::string& text);
void write_scores_csv(const ScoreSet& scores, const std::string& path);
ScoreSet read_scores_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace cdcnet
