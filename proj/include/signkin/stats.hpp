#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace signkin::stats {

enum class Direction { reduction, increase };

// Positive output means change in the named direction:
//   reduction -> 100 (first - current) / first
//   increase  -> 100 (current - first) / first
double percent_change(double first, double current, Direction direction);

enum class PValueMethod { exact_permutation, t_approx };

std::string_view method_name(PValueMethod m) noexcept;

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  PValueMethod method = PValueMethod::exact_permutation;
};

inline constexpr std::size_t kExactPermutationLimit = 8;

// Average (mid) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rho as the Pearson correlation of average ranks, with a two-tailed
// p-value: exact over all n! pairings when n <= exact_limit, otherwise the
// Student-t approximation t = rho sqrt((n-2)/(1-rho^2)) on n-2 dof.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           std::size_t exact_limit = kExactPermutationLimit);

// Ordinary least-squares slope of ys on xs.
double ls_slope(std::span<const double> xs, std::span<const double> ys);

using Pair = std::pair<double, double>;

inline constexpr std::size_t kExactSignedRankLimit = 12;

// Two-tailed Wilcoxon signed-rank p-value over differences a - b. Zero
// differences are dropped; at least five must remain. Exact enumeration of the
// 2^n sign assignments up to 12 differences, else the normal approximation with
// continuity and tie correction.
double signed_rank_test(std::span<const Pair> pairs);

// Two-tailed paired t-test over a - b.
double paired_t_test(std::span<const Pair> pairs);

enum class PairedTest { wilcoxon, t_test };

double paired_test(std::span<const Pair> pairs, PairedTest test);

// "*", "**", "***" at p < .05 / .01 / .001; empty otherwise.
std::string significance_stars(double p);

}  // namespace signkin::stats
