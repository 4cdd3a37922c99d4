#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace signkin {

enum class Errc {
  malformed_header,
  malformed_row,
  non_monotone_timestamps,
  unknown_joint,
  mixed_dimensionality,
  duplicate_joint,
  incomplete_mapping,
  invalid_argument,
  invalid_interval,
  unknown_condition,
  undefined_metric,
  interval_not_covered,
  members_absent,
  gap_ratio_exceeded,
  undefined_change,
  length_mismatch,
  too_few_samples,
  degenerate_input,
  insufficient_data,
  normalization_failed,
  insufficient_tokens,
  degenerate_axis,
  empty_corpus,
  dimension_mismatch,
  empty_windows,
  no_queries,
  missing_input,
  config_error,
  io_error,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse failures carry the 1-based line of the offending input row.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace signkin
