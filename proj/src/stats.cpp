#include "signkin/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "signkin/error.hpp"

namespace signkin::stats {
namespace {

// Slack when comparing permutation statistics against the observed one, so
// that floating-point noise never splits statistics that are equal in exact
// arithmetic.
constexpr double kTieSlack = 1e-9;

double two_sided_t(double t, double dof) {
  boost::math::students_t_distribution<double> dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

std::vector<double> centered(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [mean](double x) { return x - mean; });
  return out;
}

double sum_squares(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

}  // namespace

double percent_change(double first, double current, Direction direction) {
  if (first == 0.0) {
    throw Error(Errc::undefined_change, "percent change is undefined for a zero first value");
  }
  const double change = direction == Direction::reduction ? first - current : current - first;
  return 100.0 * change / first;
}

std::string_view method_name(PValueMethod m) noexcept {
  return m == PValueMethod::exact_permutation ? "exact_permutation" : "t_approx";
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = mid;
    }
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           std::size_t exact_limit) {
  if (x.size() != y.size()) {
    throw Error(Errc::length_mismatch, "spearman inputs differ in length");
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw Error(Errc::too_few_samples, "spearman needs at least 3 samples");
  }
  const auto rx = centered(average_ranks(x));
  const auto ry = centered(average_ranks(y));
  const double sxx = sum_squares(rx);
  const double syy = sum_squares(ry);
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(Errc::degenerate_input, "spearman input has zero rank variance");
  }
  const double scale = std::sqrt(sxx * syy);
  const double cross = std::inner_product(rx.begin(), rx.end(), ry.begin(), 0.0);

  CorrelationResult r;
  r.n = n;
  r.rho = std::clamp(cross / scale, -1.0, 1.0);

  if (n <= exact_limit) {
    // Rank variances are permutation invariant; only the cross term moves.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double observed = std::fabs(cross);
    std::size_t extreme = 0;
    std::size_t total = 0;
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c += rx[i] * ry[perm[i]];
      }
      if (std::fabs(c) >= observed - kTieSlack * scale) {
        ++extreme;
      }
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    r.method = PValueMethod::exact_permutation;
  } else {
    r.method = PValueMethod::t_approx;
    const double denom = 1.0 - r.rho * r.rho;
    if (denom <= 0.0) {
      r.p_value = 0.0;
    } else {
      const double dof = static_cast<double>(n - 2);
      r.p_value = two_sided_t(r.rho * std::sqrt(dof / denom), dof);
    }
  }
  return r;
}

double ls_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(Errc::length_mismatch, "slope inputs differ in length");
  }
  if (xs.size() < 2) {
    throw Error(Errc::too_few_samples, "slope needs at least 2 points");
  }
  const auto cx = centered(xs);
  const auto cy = centered(ys);
  const double sxx = sum_squares(cx);
  if (sxx <= 0.0) {
    throw Error(Errc::degenerate_input, "slope is undefined when all x are equal");
  }
  return std::inner_product(cx.begin(), cx.end(), cy.begin(), 0.0) / sxx;
}

double signed_rank_test(std::span<const Pair> pairs) {
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    if (a - b != 0.0) {
      diffs.push_back(a - b);
    }
  }
  const std::size_t n = diffs.size();
  if (n < 5) {
    throw Error(Errc::insufficient_data, "signed-rank test needs at least 5 non-zero differences, got " +
                                             std::to_string(n));
  }
  std::vector<double> magnitudes(n);
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::fabs(d); });
  const auto ranks = average_ranks(magnitudes);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) {
      w_plus += ranks[i];
    }
  }
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double observed = std::fabs(w_plus - mean);

  if (n <= kExactSignedRankLimit) {
    const std::size_t total = std::size_t{1} << n;
    std::size_t extreme = 0;
    for (std::size_t mask = 0; mask < total; ++mask) {
      double w = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::size_t{1} << i)) {
          w += ranks[i];
        }
      }
      if (std::fabs(w - mean) >= observed - kTieSlack) {
        ++extreme;
      }
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
  }

  // tie-corrected variance
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) {
      ++j;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, observed - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double paired_t_test(std::span<const Pair> pairs) {
  if (pairs.size() < 2) {
    throw Error(Errc::insufficient_data, "paired t-test needs at least 2 pairs");
  }
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    diffs.push_back(a - b);
  }
  const double n = static_cast<double>(diffs.size());
  const auto c = centered(diffs);
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  const double sd = std::sqrt(sum_squares(c) / (n - 1.0));
  if (sd == 0.0) {
    if (mean == 0.0) {
      throw Error(Errc::insufficient_data, "paired t-test: all differences are zero");
    }
    return 0.0;
  }
  return two_sided_t(mean / (sd / std::sqrt(n)), n - 1.0);
}

double paired_test(std::span<const Pair> pairs, PairedTest test) {
  return test == PairedTest::wilcoxon ? signed_rank_test(pairs) : paired_t_test(pairs);
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace signkin::stats
