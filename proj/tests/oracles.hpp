#pragma once

// Brute-force reference computations, written without the library's helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "signkin/core.hpp"
#include "signkin/skeleton.hpp"

namespace oracle {

using signkin::Interval;
using signkin::Point3;

inline double bbox_diagonal(const std::vector<Point3>& pts) {
  double lo[3] = {pts[0].x, pts[0].y, pts[0].z};
  double hi[3] = {pts[0].x, pts[0].y, pts[0].z};
  for (const auto& p : pts) {
    const double c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      if (c[a] < lo[a]) lo[a] = c[a];
      if (c[a] > hi[a]) hi[a] = c[a];
    }
  }
  double s = 0.0;
  for (int a = 0; a < 3; ++a) s += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(s);
}

inline double path_sum(const std::vector<Point3>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dx = pts[i + 1].x - pts[i].x;
    const double dy = pts[i + 1].y - pts[i].y;
    const double dz = pts[i + 1].z - pts[i].z;
    total += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return total;
}

inline double mean_height(const std::vector<Point3>& pts, signkin::UpAxis axis) {
  double s = 0.0;
  for (const auto& p : pts) {
    switch (axis) {
      case signkin::UpAxis::pos_y: s += p.y; break;
      case signkin::UpAxis::neg_y: s -= p.y; break;
      case signkin::UpAxis::pos_z: s += p.z; break;
    }
  }
  return s / static_cast<double>(pts.size());
}

// rank = 1 + (#smaller) + (#equal - 1) / 2
inline std::vector<double> count_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (const double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(count_ranks(x), count_ranks(y));
}

// Heap's algorithm over every arrangement of y; p = share with |rho| >= observed.
inline double spearman_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  const double observed = std::fabs(spearman_rho(x, y));
  std::vector<double> perm = y;
  std::size_t hits = 0;
  std::size_t total = 0;
  const auto visit = [&] {
    ++total;
    if (std::fabs(spearman_rho(x, perm)) >= observed - 1e-12) ++hits;
  };
  std::vector<std::size_t> c(perm.size(), 0);
  visit();
  std::size_t i = 0;
  while (i < perm.size()) {
    if (c[i] < i) {
      std::swap(perm[i % 2 == 0 ? 0 : c[i]], perm[i]);
      visit();
      ++c[i];
      i = 0;
    } else {
      c[i] = 0;
      ++i;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Two-tailed exact signed-rank p over non-zero differences by subset enumeration.
inline double signed_rank_exact_p(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (const double v : diffs) {
    if (v != 0.0) d.push_back(v);
  }
  std::vector<double> mag;
  for (const double v : d) mag.push_back(std::fabs(v));
  const auto ranks = count_ranks(mag);
  const std::size_t n = d.size();
  double w_obs = 0.0;
  double total_rank = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_rank += ranks[i];
    if (d[i] > 0) w_obs += ranks[i];
  }
  const double centre = total_rank / 2.0;
  const double dev = std::fabs(w_obs - centre);
  std::size_t hits = 0;
  const std::size_t subsets = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) w += ranks[i];
    }
    if (std::fabs(w - centre) >= dev - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(subsets);
}

inline double iou(const Interval& a, const Interval& b) {
  const double lo = std::max(a.start_ms, b.start_ms);
  const double hi = std::min(a.end_ms, b.end_ms);
  const double inter = hi > lo ? hi - lo : 0.0;
  const double uni = (a.end_ms - a.start_ms) + (b.end_ms - b.start_ms) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

inline std::size_t window_count(double total, double width, double stride) {
  return static_cast<std::size_t>(std::floor((total - width) / stride)) + 1;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Motion descriptor computed from scratch: frames inside the interval, valid
// samples per joint, piecewise-linear value at evenly spaced times, offsets
// from the first resampled position, unit length. Empty when stationary.
inline std::vector<double> embed(const signkin::KeypointSequence& seq, const Interval& iv,
                                 const std::vector<signkin::Joint>& joints, std::size_t count, double floor) {
  std::vector<const signkin::Frame*> inside;
  for (const auto& f : seq.frames()) {
    if (f.time_ms >= iv.start_ms && f.time_ms <= iv.end_ms) inside.push_back(&f);
  }
  const double t0 = inside.front()->time_ms;
  const double t1 = inside.back()->time_ms;
  std::vector<std::vector<Point3>> grid(count, std::vector<Point3>(joints.size()));
  for (std::size_t j = 0; j < joints.size(); ++j) {
    std::vector<double> ts;
    std::vector<Point3> ps;
    for (const auto* f : inside) {
      const auto& s = f->at(joints[j]);
      if (s && (!s->confidence || *s->confidence >= floor)) {
        ts.push_back(f->time_ms);
        ps.push_back(s->position);
      }
    }
    if (ts.empty()) continue;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = count == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(count - 1);
      Point3 p = ps.front();
      if (t >= ts.back()) {
        p = ps.back();
      } else if (t > ts.front()) {
        for (std::size_t m = 0; m + 1 < ts.size(); ++m) {
          if (ts[m] <= t && t <= ts[m + 1]) {
            const double w = (t - ts[m]) / (ts[m + 1] - ts[m]);
            p = {ps[m].x + w * (ps[m + 1].x - ps[m].x), ps[m].y + w * (ps[m + 1].y - ps[m].y),
                 ps[m].z + w * (ps[m + 1].z - ps[m].z)};
            break;
          }
        }
      }
      grid[k][j] = p;
    }
  }
  std::vector<double> v;
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t j = 0; j < joints.size(); ++j) {
      v.push_back(grid[k][j].x - grid[0][j].x);
      v.push_back(grid[k][j].y - grid[0][j].y);
      v.push_back(grid[k][j].z - grid[0][j].z);
    }
  }
  double n = 0.0;
  for (const double x : v) n += x * x;
  n = std::sqrt(n);
  if (n <= 1e-12) return {};
  for (auto& x : v) x /= n;
  return v;
}

struct Brute {
  std::vector<std::size_t> ranks;  // rank of each candidate, 0 if stationary
  double mrr = 0.0;
  std::vector<double> recall;  // per requested k
};

// Ranks each candidate by counting better-placed candidates.
inline Brute brute_rank(const std::vector<double>& query, const std::vector<std::vector<double>>& cands,
                        const std::vector<Interval>& spans, const std::vector<bool>& stationary,
                        const std::vector<Interval>& truth, double threshold, const std::vector<std::size_t>& ks) {
  const std::size_t n = cands.size();
  std::vector<double> sim(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!stationary[i]) sim[i] = cosine(query, cands[i]);
  }
  Brute b;
  b.ranks.assign(n, 0);
  std::vector<std::size_t> matched_ranks;
  std::vector<std::size_t> hits(ks.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (stationary[i]) continue;
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || stationary[j]) continue;
      if (sim[j] > sim[i] || (sim[j] == sim[i] && (spans[j].start_ms < spans[i].start_ms ||
                                                   (spans[j].start_ms == spans[i].start_ms && j < i)))) {
        ++ahead;
      }
    }
    b.ranks[i] = ahead + 1;
    double best = 0.0;
    for (const auto& t : truth) best = std::max(best, iou(spans[i], t));
    if (best >= threshold) {
      matched_ranks.push_back(b.ranks[i]);
      for (std::size_t q = 0; q < ks.size(); ++q) {
        if (b.ranks[i] <= ks[q]) ++hits[q];
      }
    }
  }
  // summed best rank first
  std::sort(matched_ranks.begin(), matched_ranks.end());
  double rr = 0.0;
  for (const auto r : matched_ranks) rr += 1.0 / static_cast<double>(r);
  b.mrr = matched_ranks.empty() ? 0.0 : rr / static_cast<double>(matched_ranks.size());
  for (std::size_t q = 0; q < ks.size(); ++q) {
    b.recall.push_back(static_cast<double>(hits[q]) / static_cast<double>(ks[q]));
  }
  return b;
}

}  // namespace oracle
