#ifndef LADDER_ERROR_HPP
#define LADDER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ladder {

enum class Errc {
  too_few_points,
  non_finite,
  mixed_resolution_sets,
  bad_magic,
  unsupported_format,
  truncated_frame,
  size_mismatch,
  frame_too_small,
  dimension_mismatch,
  too_few_frames,
  degenerate_labels,
  singular_kernel,
  bad_boundary_index,
  unsupported_resolution,
  encoder_failure,
  rate_out_of_range,
  bad_params,
  bad_template,
  cache_corruption,
  no_overlap,
  bad_target,
  dataset_too_small,
  version_mismatch,
  bad_config,
  io_failure,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace ladder

#endif  // LADDER_ERROR_HPP
