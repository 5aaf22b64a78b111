#ifndef EHRELAY_SPECFUN_HPP
#define EHRELAY_SPECFUN_HPP

// Exponential integrals on the positive real axis.
//
//            inf                              x
//             /   -t                          /   t
//   E1(x) =  |   e  / t dt        Ei(x) = PV |   e / t dt
//            /                                /
//           x                              -inf
//
// Regimes: power series below x = 1, Lentz continued fraction for E1 above,
// asymptotic expansion for Ei above x = 40.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ehrelay {

struct SpecFunResult {
  double value = 0.0;
  double est_abs_error = 0.0;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kEulerGamma = std::numbers::egamma_v<double>;
inline constexpr double kSeriesCutoff = 1.0;
inline constexpr double kEiAsymptoticCutoff = 40.0;

inline void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw std::domain_error(std::string(fn) + ": argument must be > 0, got " +
                            std::to_string(x));
  }
}

// sum_{k>=1} sign^k x^k / (k k!)  with sign = -1 for E1, +1 for Ei.
struct SeriesSum {
  double sum;
  double abs_sum;  // sum of |terms|, bounds the rounding error
};

inline SeriesSum exp_series(double x, double sign) {
  double term = 1.0;  // x^k / k!
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= sign * x / k;
    const double contrib = term / k;
    sum += contrib;
    abs_sum += std::abs(contrib);
    if (std::abs(contrib) < kEps * 0.25 * std::abs(sum)) break;
  }
  return {sum, abs_sum};
}

// Modified Lentz evaluation of e^x E1(x) for x >= 1:
//   e^x E1(x) = 1/(x+1- 1^2/(x+3- 2^2/(x+5- ...)))
inline SpecFunResult scaled_e1_cf(double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  int i = 1;
  for (; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  return {h, (4.0 + 0.5 * std::sqrt(static_cast<double>(i))) * kEps * h};
}

// e^{-x} Ei(x) via the divergent asymptotic series, truncated at its
// smallest term. Valid for x >= kEiAsymptoticCutoff.
inline SpecFunResult scaled_ei_asymptotic(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * k / x;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < kEps * 0.25 * sum) break;
  }
  const double value = sum / x;
  return {value, (term + 4.0 * kEps * sum) / x};
}

}  // namespace detail

/// E1(x) for x > 0. Underflows to zero beyond x ~ 745.
inline SpecFunResult e1(double x) {
  detail::require_positive(x, "e1");
  if (x < detail::kSeriesCutoff) {
    const auto s = detail::exp_series(x, -1.0);
    const double lead = -detail::kEulerGamma - std::log(x);
    const double value = lead - s.sum;
    const double err =
        4.0 * detail::kEps * (std::abs(lead) + s.abs_sum + std::abs(value));
    return {value, err};
  }
  const auto scaled = detail::scaled_e1_cf(x);
  const double factor = std::exp(-x);
  return {scaled.value * factor, scaled.est_abs_error * factor};
}

/// Cauchy principal value Ei(x) for x > 0. Overflows to +inf beyond x ~ 709.
inline SpecFunResult ei(double x) {
  detail::require_positive(x, "ei");
  if (x < detail::kEiAsymptoticCutoff) {
    const auto s = detail::exp_series(x, 1.0);
    const double lead = detail::kEulerGamma + std::log(x);
    const double value = lead + s.sum;
    const double err = 4.0 * detail::kEps * (std::abs(lead) + s.abs_sum);
    return {value, err};
  }
  const auto scaled = detail::scaled_ei_asymptotic(x);
  const double factor = std::exp(x);
  return {scaled.value * factor, scaled.est_abs_error * factor};
}

/// e^x E1(x) for x > 0 without intermediate overflow. Lies in (1/(1+x), 1/x).
inline double exp_e1_scaled(double x) {
  detail::require_positive(x, "exp_e1_scaled");
  if (x < detail::kSeriesCutoff) return std::exp(x) * e1(x).value;
  return detail::scaled_e1_cf(x).value;
}

/// e^{-x} Ei(x) for x > 0 without intermediate overflow.
inline double exp_ei_scaled(double x) {
  detail::require_positive(x, "exp_ei_scaled");
  if (x < detail::kEiAsymptoticCutoff) return std::exp(-x) * ei(x).value;
  return detail::scaled_ei_asymptotic(x).value;
}

}  // namespace ehrelay

#endif  // EHRELAY_SPECFUN_HPP
