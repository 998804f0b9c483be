#include "cier/error.hpp"
#include "cier/metrics.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <string>

namespace cier::metrics {

GoodnessOfFit chi_square_gof(std::span<const long long> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty()) {
    fail(Errc::InvalidParams, "observed and expected must be nonempty and of equal length");
  }
  long long total = 0;
  double mass = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] < 0 || !(expected[i] >= 0.0)) fail(Errc::InvalidParams, "negative count or probability");
    total += observed[i];
    mass += expected[i];
  }
  if (total == 0 || !(mass > 0.0)) fail(Errc::InvalidParams, "no observations or no expected mass");
  GoodnessOfFit g;
  int categories = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = static_cast<double>(total) * expected[i] / mass;
    if (e == 0.0) {
      if (observed[i] != 0) fail(Errc::InvalidParams, "count in category " + std::to_string(i) + " with zero probability");
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - e;
    g.statistic += diff * diff / e;
    ++categories;
  }
  g.df = categories - 1;
  g.p_value = g.df > 0 ? boost::math::gamma_q(g.df / 2.0, g.statistic / 2.0) : 1.0;
  return g;
}

}  // namespace cier::metrics
