#ifndef EHRELAY_OPTIMIZE_HPP
#define EHRELAY_OPTIMIZE_HPP

// Numerical search over the power-splitting fraction rho and the rate Rs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ehrelay/analytic.hpp"
#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/montecarlo.hpp"

namespace ehrelay {

enum class OptMethod { closed_form, golden_section, grid };

struct OptResult {
  double arg_opt = 0.0;
  double value_opt = 0.0;
  OptMethod method = OptMethod::golden_section;
  std::uint64_t evaluations = 0;
  /// The unimodality pre-scan failed and a grid search was used instead.
  bool fallback = false;
};

enum class RhoObjective { tau_full, tau_sim, tau_mc, tau_no_direct };
enum class RsObjective { tau_full, tau_mc };

/// Monte Carlo settings for tau_mc objectives. The same seed is reused for
/// every evaluation (common random numbers).
struct McObjectiveOptions {
  std::uint64_t trials = 200'000;
  std::uint64_t seed = 42;
  McOptions mc{};
};

/// Golden-section maximization of a unimodal f on [lo, hi] down to an
/// interval width of tol.
template <typename F>
OptResult golden_section_maximize(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  OptResult r;
  r.method = OptMethod::golden_section;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  r.evaluations = 2;
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
    ++r.evaluations;
  }
  if (f1 >= f2) {
    r.arg_opt = x1;
    r.value_opt = f1;
  } else {
    r.arg_opt = x2;
    r.value_opt = f2;
  }
  return r;
}

/// Exhaustive evaluation on `points` equally spaced nodes of [lo, hi].
template <typename F>
OptResult grid_maximize(F&& f, double lo, double hi, std::size_t points) {
  OptResult r;
  r.method = OptMethod::grid;
  r.value_opt = -INFINITY;
  if (points < 2 || hi <= lo) {
    r.arg_opt = lo;
    r.value_opt = f(lo);
    r.evaluations = 1;
    return r;
  }
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(points - 1);
    const double v = f(x);
    if (v > r.value_opt) {
      r.value_opt = v;
      r.arg_opt = x;
    }
  }
  r.evaluations = points;
  return r;
}

/// True if the sequence rises (weakly) to a single peak and then falls
/// (weakly). Flat plateaus count as a single peak.
inline bool is_unimodal(const std::vector<double>& v) {
  std::size_t i = 1;
  while (i < v.size() && v[i] >= v[i - 1]) ++i;
  while (i < v.size() && v[i] <= v[i - 1]) ++i;
  return i == v.size();
}

inline constexpr double kRhoLo = 0.001;
inline constexpr double kRhoHi = 0.999;

inline std::function<double(double)> rho_objective(
    const SystemParams& sys, RhoObjective objective,
    const McObjectiveOptions& mc) {
  switch (objective) {
    case RhoObjective::tau_full:
      return [sys](double rho) {
        return tau_incremental(sys.with_rho(rho)).tau;
      };
    case RhoObjective::tau_sim:
      return [sys](double rho) { return tau_simplified(sys.with_rho(rho)); };
    case RhoObjective::tau_no_direct:
      return [sys](double rho) { return tau_no_direct(sys.with_rho(rho)); };
    case RhoObjective::tau_mc:
      return [sys, mc](double rho) {
        return estimate(sys.with_rho(rho), mc.trials, mc.seed, mc.mc).mean;
      };
  }
  throw std::invalid_argument("unknown rho objective");
}

/// Maximizes f on [lo, hi]. A 21-point pre-scan checks unimodality; if it
/// fails, a grid of spacing tol is used and `fallback` is set. Otherwise
/// golden-section search runs on the bracket around the best scan point.
template <typename F>
OptResult maximize_unimodal(F&& f, double lo, double hi, double tol) {
  constexpr std::size_t kScan = 21;
  std::vector<double> xs(kScan), vs(kScan);
  for (std::size_t i = 0; i < kScan; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / (kScan - 1);
    vs[i] = f(xs[i]);
  }

  if (!is_unimodal(vs)) {
    const auto points =
        static_cast<std::size_t>(std::ceil((hi - lo) / tol)) + 1;
    OptResult r = grid_maximize(f, lo, hi, points);
    r.evaluations += kScan;
    r.fallback = true;
    return r;
  }

  const auto peak = static_cast<std::size_t>(
      std::max_element(vs.begin(), vs.end()) - vs.begin());
  OptResult r = golden_section_maximize(f, xs[peak == 0 ? 0 : peak - 1],
                                        xs[std::min(peak + 1, kScan - 1)], tol);
  r.evaluations += kScan;
  if (vs[peak] > r.value_opt) {
    r.arg_opt = xs[peak];
    r.value_opt = vs[peak];
  }
  return r;
}

/// Maximizes throughput over rho in [0.001, 0.999].
inline OptResult maximize_rho(const SystemParams& sys, RhoObjective objective,
                              double tol = 1e-4,
                              const McObjectiveOptions& mc = {}) {
  if (!(tol >= 1e-6 && tol <= 0.05)) {
    throw std::invalid_argument("maximize_rho: tol must lie in [1e-6, 0.05]");
  }
  return maximize_unimodal(rho_objective(sys, objective, mc), kRhoLo, kRhoHi,
                           tol);
}

/// Power split used at a given rate inside maximize_rs: the closed form when
/// it is valid, golden-section search on tau_full otherwise.
inline double rho_for_rate(const SystemParams& sys) {
  try {
    return rho_star_closed_form(sys);
  } catch (const RegimeError&) {
    return maximize_rho(sys, RhoObjective::tau_full, 1e-4).arg_opt;
  }
}

/// Throughput at rate rs with rho set to its optimum for that rate.
inline double tau_at_rate(const SystemParams& sys, double rs,
                          RsObjective objective,
                          const McObjectiveOptions& mc = {}) {
  const SystemParams at = sys.with_rs(rs);
  const SystemParams tuned = at.with_rho(rho_for_rate(at));
  if (objective == RsObjective::tau_mc) {
    return estimate(tuned, mc.trials, mc.seed, mc.mc).mean;
  }
  return tau_incremental(tuned).tau;
}

/// Grid-then-golden search of tau(Rs, rho*(Rs)) over [rs_lo, rs_hi].
inline OptResult maximize_rs(const SystemParams& sys, double rs_lo,
                             double rs_hi, RsObjective objective,
                             const McObjectiveOptions& mc = {},
                             double tol = 1e-4) {
  if (!(rs_lo > 0.0 && rs_hi <= 12.0 && rs_lo <= rs_hi)) {
    throw std::invalid_argument("maximize_rs: range must lie in (0, 12]");
  }
  const auto f = [&](double rs) { return tau_at_rate(sys, rs, objective, mc); };
  if (rs_hi - rs_lo <= tol) {
    OptResult r;
    r.method = OptMethod::grid;
    r.arg_opt = rs_lo;
    r.value_opt = f(rs_lo);
    r.evaluations = 1;
    return r;
  }

  constexpr std::size_t kScan = 48;
  const double step = (rs_hi - rs_lo) / (kScan - 1);
  OptResult coarse = grid_maximize(f, rs_lo, rs_hi, kScan);
  const double lo = std::max(rs_lo, coarse.arg_opt - step);
  const double hi = std::min(rs_hi, coarse.arg_opt + step);
  OptResult r = golden_section_maximize(f, lo, hi, tol);
  r.evaluations += coarse.evaluations;
  if (coarse.value_opt > r.value_opt) {
    r.arg_opt = coarse.arg_opt;
    r.value_opt = coarse.value_opt;
  }
  return r;
}

}  // namespace ehrelay

#endif  // EHRELAY_OPTIMIZE_HPP
