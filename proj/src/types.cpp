#include "wcp/types.hpp"

#include <string>

#include "wcp/error.hpp"

namespace wcp {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2)
    fail(ErrorKind::TooFewObservations,
         "time series needs at least 2 observations, got " + std::to_string(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      fail(ErrorKind::InvalidArgument,
           "observation " + std::to_string(i + 1) + " is not finite");
}

WeightGamma::WeightGamma(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5))
    fail(ErrorKind::InvalidArgument,
         "gamma must lie in [0, 0.5), got " + std::to_string(gamma));
}

std::string_view to_string(Sidedness sided) noexcept {
  return sided == Sidedness::OneSidedMax ? "one-sided" : "two-sided";
}

Sidedness parse_sidedness(std::string_view text) {
  if (text == "one-sided" || text == "one" || text == "max") return Sidedness::OneSidedMax;
  if (text == "two-sided" || text == "two" || text == "abs") return Sidedness::TwoSidedMaxAbs;
  fail(ErrorKind::InvalidArgument,
       "unknown sidedness '" + std::string(text) + "' (expected one-sided or two-sided)");
}

}  // namespace wcp
