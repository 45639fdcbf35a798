#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tumorsynth {

/// Error categories surfaced by the library. The CLI maps each one onto a
/// stable exit code, so values here should only ever be appended.
enum class Errc {
  invalid_argument,
  dimension_mismatch,
  io,
  corrupt_header,
  unsupported_format,
  unsupported_datatype,
  invalid_geometry,
  zero_variance,
  empty_mask,
  sub_resolution,
  placement_exhausted,
  shape_rejected,
  config,
  parse,
  metric_absent,
  epoch_grid_mismatch,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tumorsynth
