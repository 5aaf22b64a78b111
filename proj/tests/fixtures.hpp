#ifndef EHRELAY_TESTS_FIXTURES_HPP
#define EHRELAY_TESTS_FIXTURES_HPP

#include <cmath>

#include "ehrelay/model.hpp"

namespace ehrelay::testing {

// Reference deployment: collinear S-R-D with d_sd = 3, primary receiver at
// distance 3 from S and R, path-loss exponent 4, eta = 0.7.
inline NetworkGeometry reference_geometry(double d_sr = 1.2) {
  NetworkGeometry g;
  g.d_sr = d_sr;
  g.d_rd = 3.0 - d_sr;
  g.d_sd = 3.0;
  g.d_sp = 3.0;
  g.d_rp = 3.0;
  g.epsilon = 4.0;
  return g;
}

inline const double kSixDb = db_to_linear(6.0);

inline SystemParams reference_system(double rho = 0.5, double d_sr = 1.2,
                                     double i_over_no = kSixDb,
                                     double rs = 3.0) {
  return {lambdas_from_geometry(reference_geometry(d_sr)), 0.7, rho, i_over_no,
          rs};
}

}  // namespace ehrelay::testing

#endif  // EHRELAY_TESTS_FIXTURES_HPP
