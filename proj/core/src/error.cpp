#include "tumorsynth/error.hpp"

namespace tumorsynth {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::io: return "io";
    case Errc::corrupt_header: return "corrupt_header";
    case Errc::unsupported_format: return "unsupported_format";
    case Errc::unsupported_datatype: return "unsupported_datatype";
    case Errc::invalid_geometry: return "invalid_geometry";
    case Errc::zero_variance: return "zero_variance";
    case Errc::empty_mask: return "empty_mask";
    case Errc::sub_resolution: return "sub_resolution";
    case Errc::placement_exhausted: return "placement_exhausted";
    case Errc::shape_rejected: return "shape_rejected";
    case Errc::config: return "config";
    case Errc::parse: return "parse";
    case Errc::metric_absent: return "metric_absent";
    case Errc::epoch_grid_mismatch: return "epoch_grid_mismatch";
  }
  return "unknown";
}

}  // namespace tumorsynth
