#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace tlts {

/// Marginal scale a series currently lives on.
enum class ScaleTag {
  original,       ///< as observed or simulated
  frechet2_unit,  ///< tail index 2, unit tail ratio
  preprocessed,   ///< frechet2_unit with mean removed and negatives clamped to 0
};

std::string_view to_string(ScaleTag tag);
ScaleTag scale_tag_from_string(std::string_view name);

/// Ordered observations tagged with their marginal scale. Values on the
/// frechet2_unit and preprocessed scales are nonnegative; original-scale data
/// (e.g. anomalies) may be signed.
class Series {
public:
  Series() = default;
  Series(Eigen::VectorXd values, ScaleTag scale, std::string source = {});

  const Eigen::VectorXd& values() const noexcept { return values_; }
  ScaleTag scale() const noexcept { return scale_; }
  const std::string& source() const noexcept { return source_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

  /// Contiguous sub-series [first, first + count), same tag.
  Series slice(Eigen::Index first, Eigen::Index count) const;

private:
  Eigen::VectorXd values_;
  ScaleTag scale_ = ScaleTag::original;
  std::string source_;
};

}  // namespace tlts
