#pragma once

#include <vector>

namespace morphopt {

struct GaussRule1D {
  std::vector<double> points;   // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss–Legendre rule mapped to [0, 1]; exact for degree 2n-1.
GaussRule1D gauss_legendre(int n);

}  // namespace morphopt
