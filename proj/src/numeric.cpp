#include "mrlocal/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

#include "mrlocal/error.hpp"

namespace mrlocal {

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("quantile tail probability must be in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), tail));
}

}  // namespace mrlocal
