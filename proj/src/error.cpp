#include "signkin/error.hpp"

namespace signkin {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_header: return "malformed_header";
    case Errc::malformed_row: return "malformed_row";
    case Errc::non_monotone_timestamps: return "non_monotone_timestamps";
    case Errc::unknown_joint: return "unknown_joint";
    case Errc::mixed_dimensionality: return "mixed_dimensionality";
    case Errc::duplicate_joint: return "duplicate_joint";
    case Errc::incomplete_mapping: return "incomplete_mapping";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_interval: return "invalid_interval";
    case Errc::unknown_condition: return "unknown_condition";
    case Errc::undefined_metric: return "undefined_metric";
    case Errc::interval_not_covered: return "interval_not_covered";
    case Errc::members_absent: return "members_absent";
    case Errc::gap_ratio_exceeded: return "gap_ratio_exceeded";
    case Errc::undefined_change: return "undefined_change";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::too_few_samples: return "too_few_samples";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::normalization_failed: return "normalization_failed";
    case Errc::insufficient_tokens: return "insufficient_tokens";
    case Errc::degenerate_axis: return "degenerate_axis";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::empty_windows: return "empty_windows";
    case Errc::no_queries: return "no_queries";
    case Errc::missing_input: return "missing_input";
    case Errc::config_error: return "config_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(Errc code, std::size_t line, const std::string& message)
    : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace signkin
