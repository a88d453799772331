#include "tlts/series.hpp"

#include <cmath>
#include <string>

#include "tlts/errors.hpp"

namespace tlts {

std::string_view to_string(ScaleTag tag) {
  switch (tag) {
    case ScaleTag::original: return "original";
    case ScaleTag::frechet2_unit: return "frechet2_unit";
    case ScaleTag::preprocessed: return "preprocessed";
  }
  return "original";
}

ScaleTag scale_tag_from_string(std::string_view name) {
  if (name == "original") return ScaleTag::original;
  if (name == "frechet2_unit") return ScaleTag::frechet2_unit;
  if (name == "preprocessed") return ScaleTag::preprocessed;
  throw ArgumentError("unknown scale tag '" + std::string(name) + "'");
}

Series::Series(Eigen::VectorXd values, ScaleTag scale, std::string source)
    : values_(std::move(values)), scale_(scale), source_(std::move(source)) {
  if (values_.size() < 1) throw ArgumentError("series must have at least one value");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_(i)))
      throw ArgumentError("series value " + std::to_string(i) + " is not finite");
    if (scale_ != ScaleTag::original && values_(i) < 0.0)
      throw DomainError("series value " + std::to_string(i) + " is negative on the " +
                        std::string(to_string(scale_)) + " scale");
  }
}

Series Series::slice(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > size())
    throw ArgumentError("series slice out of range");
  return Series(values_.segment(first, count), scale_, source_);
}

}  // namespace tlts
