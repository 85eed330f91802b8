#pragma once

// Brute-force metric definitions shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cdcnet/metrics/metrics.hpp"
#include "cdcnet/tensor/rng.hpp"

namespace cdcnet::oracle {

/// 2..100 samples over 1..3 attack types; every other set uses coarse scores
/// so ties are common.
inline ScoreSet random_scores(Rng& rng) {
  ScoreSet s;
  const std::size_t n = 2 + rng.below(99);
  const std::size_t types = 1 + rng.below(3);
  const bool coarse = rng.below(2) == 0;
  auto score = [&] { return coarse ? static_cast<double>(rng.below(6)) / 5.0 : rng.uniform(-1, 2); };
  s.add_live("live0", score());
  s.add_attack("att0", score(), "t0");
  for (std::size_t i = 2; i < n; ++i) {
    if (rng.below(2)) s.add_live("l" + std::to_string(i), score());
    else s.add_attack("a" + std::to_string(i), score(), "t" + std::to_string(rng.below(types)));
  }
  return s;
}

struct Counts {
  double far, frr;
};

/// A score at or above the threshold is accepted as live.
inline Counts rates(const ScoreSet& s, double thr) {
  std::size_t fa = 0, fr = 0, live = 0, att = 0;
  for (const auto& e : s.entries) {
    if (e.attack_type < 0) {
      ++live;
      if (!(e.score >= thr)) ++fr;
    } else {
      ++att;
      if (e.score >= thr) ++fa;
    }
  }
  return {static_cast<double>(fa) / att, static_cast<double>(fr) / live};
}

/// Worst per-type acceptance rate.
inline double apcer(const ScoreSet& s, double thr) {
  double worst = 0;
  for (std::size_t t = 0; t < s.attack_types.size(); ++t) {
    std::size_t acc = 0, tot = 0;
    for (const auto& e : s.entries)
      if (e.attack_type == static_cast<int>(t)) {
        ++tot;
        acc += e.score >= thr;
      }
    if (tot) worst = std::max(worst, static_cast<double>(acc) / tot);
  }
  return worst;
}

/// Smallest |FAR - FRR| over every distinct cut, lowest cut on ties;
/// returns (FAR + FRR) / 2 there.
inline double eer(const ScoreSet& s) {
  std::vector<double> cuts;
  for (const auto& e : s.entries) cuts.push_back(e.score);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double best_gap = 2, best = 0;
  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    const double t = k == 0 ? cuts.front() - 10 : k == cuts.size() ? cuts.back() + 10 : (cuts[k - 1] + cuts[k]) / 2;
    const Counts rc = rates(s, t);
    const double gap = std::abs(rc.far - rc.frr);
    if (gap < best_gap) best_gap = gap, best = (rc.far + rc.frr) / 2;
  }
  return best;
}

/// Fraction of live/attack pairs ordered correctly, ties counting half.
inline double auc(const ScoreSet& s) {
  double wins = 0, pairs = 0;
  for (const auto& a : s.entries)
    for (const auto& b : s.entries)
      if (a.attack_type < 0 && b.attack_type >= 0) {
        wins += a.score > b.score ? 1.0 : a.score == b.score ? 0.5 : 0.0;
        pairs += 1;
      }
  return wins / pairs;
}

}  // namespace cdcnet::oracle
