#include "gooddeal/errors.hpp"

#include <sstream>
#include <utility>

namespace gooddeal {

InfeasibleBoundError::InfeasibleBoundError(std::string message, double bound,
                                           double minimal_bound)
    : Error(std::move(message)), bound_(bound), minimal_bound_(minimal_bound) {}

InfeasibleBoundError InfeasibleBoundError::below_minimum(const std::string& context,
                                                         double bound, double minimal_bound) {
  std::ostringstream os;
  os.precision(10);
  if (!context.empty()) os << context << ": ";
  os << "good-deal bound B = " << bound << " is below the minimal admissible bound B0 = "
     << minimal_bound;
  return InfeasibleBoundError(os.str(), bound, minimal_bound);
}

}  // namespace gooddeal
