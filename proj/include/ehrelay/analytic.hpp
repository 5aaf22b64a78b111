#ifndef EHRELAY_ANALYTIC_HPP
#define EHRELAY_ANALYTIC_HPP

// Closed-form outage components and throughput of incremental DF relaying
// with a power-splitting EH relay in an underlay network.
//
// Events (gamma = gamma_th):
//   p1 = Pr(Gr < gamma)                     relay cannot decode
//   p2 = Pr(Gd1 >= gamma, Gr >= gamma)      direct succeeds, relay decodes
//   p3 = Pr(Gd1 + Gd2 < gamma, Gr >= gamma) relay decodes, MRC still fails
//   q1 = 1 - p1 - p2 - p3                   relayed cycle succeeds
//   q2 = Pr(Gd1 >= gamma)                   direct succeeds
// and tau = Rs/2 q1 + Rs q2.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"
#include "ehrelay/specfun.hpp"

namespace ehrelay {

struct OutageBreakdown {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double tau = 0.0;
  /// Unclamped p3 as produced by the approximate closed form.
  double p3_raw = 0.0;
  /// Set when p3_raw had to be pulled back into [0, 1].
  bool p3_clamped = false;
};

enum class P3Variant { full, no_rp, high_snr };

namespace detail {

// Largest excursion of an approximate probability outside [0, 1] that is
// clamped instead of reported.
inline constexpr double kClampSlack = 0.02;

// e^x (E1(x) - E1(x + w)).
inline double e1_window(double x, double w) {
  if (w <= 0.0) return 0.0;
  return exp_e1_scaled(x) - std::exp(-w) * exp_e1_scaled(x + w);
}

// e^{-y-w} (Ei(y) - Ei(y + w)).
inline double ei_window(double y, double w) {
  if (w <= 0.0) return 0.0;
  return std::exp(-w) * exp_ei_scaled(y) - exp_ei_scaled(y + w);
}

inline double clamp_probability(double raw, bool& clamped, const char* what) {
  if (raw < -kClampSlack || raw > 1.0 + kClampSlack || std::isnan(raw)) {
    throw RegimeError(std::string(what) + " left [0, 1] by more than " +
                      std::to_string(kClampSlack) + " (value " +
                      std::to_string(raw) + ")");
  }
  clamped = raw < 0.0 || raw > 1.0;
  return std::clamp(raw, 0.0, 1.0);
}

inline void require_open_rho(const SystemParams& sys, const char* what) {
  if (!(sys.rho() > 0.0 && sys.rho() < 1.0)) {
    throw DegenerateRhoError(std::string(what) + " needs rho in (0, 1), got " +
                             std::to_string(sys.rho()));
  }
}

}  // namespace detail

/// Pr(Gr < gamma_th); equals 1 at rho = 1.
inline double p1_relay_decode_outage(const SystemParams& sys) {
  if (sys.rho() >= 1.0) return 1.0;
  const auto& l = sys.links();
  const double x = l.lambda_sr * sys.psi() / (l.lambda_sp * (1.0 - sys.rho()));
  return x / (1.0 + x);
}

/// Pr(Gd1 >= gamma_th); independent of rho and eta.
inline double q2_direct_success(const SystemParams& sys) {
  const auto& l = sys.links();
  return 1.0 / (1.0 + l.lambda_sd * sys.psi() / l.lambda_sp);
}

/// Pr(Gd1 >= gamma_th, Gr >= gamma_th); equals 0 at rho = 1.
inline double p2_both_succeed(const SystemParams& sys) {
  if (sys.rho() >= 1.0) return 0.0;
  const auto& l = sys.links();
  return 1.0 /
         (1.0 + sys.psi() / l.lambda_sp *
                    (l.lambda_sd + l.lambda_sr / (1.0 - sys.rho())));
}

/// The twelve summands of the approximate p3. `capped` are the terms
/// multiplied by t (relay-to-primary cap active); `uncapped` are the rest.
/// Their combination is p3 ~= t * sum(capped) + sum(uncapped).
struct P3Terms {
  std::array<double, 6> capped{};
  std::array<double, 6> uncapped{};
  double t = 0.0;

  double capped_sum() const {
    return std::accumulate(capped.begin(), capped.end(), 0.0);
  }
  double uncapped_sum() const {
    return std::accumulate(uncapped.begin(), uncapped.end(), 0.0);
  }
  double combined() const { return t * capped_sum() + uncapped_sum(); }
};

inline P3Terms p3_terms(const P3Params& p, const LinkStats& l) {
  const double lsr = l.lambda_sr;
  const double lsp = l.lambda_sp;
  const double a = p.a, b = p.b, c = p.c, d = p.d, s = p.s;
  const double ab = a + b;
  const double y = d * (lsr + lsp * s);

  P3Terms out;
  out.t = p.t;
  auto& w = out.capped;
  const double x1 = a * lsr / (c + lsp);
  const double r1 = a / (c + lsp);
  w[0] = r1 * r1 * lsp * lsr / (ab + d * lsp) * detail::e1_window(x1, a * s);
  w[1] = d * d * lsp * lsr / (ab + d * lsp) * std::exp(-a * s) *
         detail::ei_window(y, b * s);
  const double x3 = ab * lsr / lsp;
  w[2] = -lsr * ab * ab / (lsp * (ab + d * lsp)) *
         detail::e1_window(x3, ab * s);
  w[3] = -lsr * std::exp(-s * ab) / (lsp * s + lsr);
  w[4] = lsp * lsr * std::exp(-a * s) /
         ((c + lsp) * (c * s + lsp * s + lsr));
  w[5] = c / (c + lsp);

  auto& u = out.uncapped;
  const double x7 = b * lsr / lsp;
  u[0] = b * b * lsr / (lsp * (b + d * lsp)) * detail::e1_window(x7, b * s);
  u[1] = -d * d * lsp * lsr / (b + d * lsp) * detail::ei_window(y, b * s);
  u[2] = lsr * std::exp(-b * s) / (lsp * s + lsr);
  u[3] = c * lsp * s * s / ((lsp * s + lsr) * (c * s + lsp * s + lsr));
  u[4] = -lsp * lsr / ((c + lsp) * (c * s + lsp * s + lsr));
  u[5] = -c / (c + lsp);
  return out;
}

struct P3Evaluation {
  P3Terms terms;
  double raw = 0.0;
  double value = 0.0;
  bool clamped = false;
};

inline P3Evaluation p3_closed_form_detail(const SystemParams& sys) {
  detail::require_open_rho(sys, "p3_closed_form");
  P3Evaluation ev;
  ev.terms = p3_terms(p3_params(sys), sys.links());
  ev.raw = ev.terms.combined();
  ev.value = detail::clamp_probability(ev.raw, ev.clamped, "p3_closed_form");
  return ev;
}

/// Approximate Pr(Gd < gamma_th, Gr >= gamma_th); tight when
/// lambda_rd << I lambda_rp.
inline double p3_closed_form(const SystemParams& sys) {
  return p3_closed_form_detail(sys).value;
}

/// CDF of X = min(hp, I/|g_rp|^2) |h_rd|^2 given the harvested power hp.
inline double cdf_harvested_mrc(double x, double hp, const SystemParams& sys) {
  if (x <= 0.0) return 0.0;
  const auto& l = sys.links();
  const double i = sys.i_over_no();
  const double w = l.lambda_rd * x / (i * l.lambda_rp);
  const double survive =
      std::exp(-l.lambda_rd * x / hp) *
      (1.0 - std::exp(-l.lambda_rp * i / hp) * (w / (1.0 + w)));
  return 1.0 - survive;
}

/// p3 with the relay-to-primary cap removed (lambda_rp -> infinity, t = 0).
inline double p3_no_rp_limit(const SystemParams& sys) {
  detail::require_open_rho(sys, "p3_no_rp_limit");
  const auto& l = sys.links();
  const double beta = sys.beta();
  const double psi = sys.psi();
  const double one_minus_rho = 1.0 - sys.rho();
  const double denom =
      l.lambda_rd * l.lambda_sp / (beta * l.lambda_sd) + l.lambda_rd * psi / beta;
  const double relay_decay = l.lambda_rd * one_minus_rho / beta;

  const double x = l.lambda_rd * l.lambda_sr * psi / (beta * l.lambda_sp);
  const double lead = l.lambda_rd * psi / beta;
  const double e1_term = lead * lead / (l.lambda_sp * denom) * l.lambda_sr *
                         detail::e1_window(x, relay_decay);

  const double decode_term = -l.lambda_sr * psi * (-std::expm1(-relay_decay)) /
                             (l.lambda_sp * one_minus_rho + l.lambda_sr * psi);

  const double dd = l.lambda_rd / (beta * l.lambda_sd);
  const double y = dd * (l.lambda_sr + l.lambda_sp * one_minus_rho / psi);
  const double ei_term = -l.lambda_sp * l.lambda_sr / denom * dd * dd *
                         detail::ei_window(y, relay_decay);

  bool clamped = false;
  return detail::clamp_probability(e1_term + decode_term + ei_term, clamped,
                                   "p3_no_rp_limit");
}

/// High-SNR (I lambda_sp >> gamma_th) two-term approximation of
/// p3_no_rp_limit.
inline double p3_high_snr(const SystemParams& sys) {
  detail::require_open_rho(sys, "p3_high_snr");
  const auto& l = sys.links();
  const double beta = sys.beta();
  const double psi = sys.psi();
  const double one_minus_rho = 1.0 - sys.rho();
  const double lead = psi * l.lambda_rd / (beta * l.lambda_sp);
  const double denom =
      psi * l.lambda_rd / beta + l.lambda_rd * l.lambda_sp / (beta * l.lambda_sd);
  const double x = psi * l.lambda_rd * l.lambda_sr / (beta * l.lambda_sp);
  const double e1_term =
      lead * lead * (l.lambda_sp * l.lambda_sr) / denom * exp_e1_scaled(x);
  const double decode_term =
      l.lambda_sr / (l.lambda_sp * one_minus_rho / psi + l.lambda_sr) *
      std::expm1(-l.lambda_rd * one_minus_rho / beta);
  return std::clamp(e1_term + decode_term, 0.0, 1.0);
}

/// lambda_sd -> infinity limit of the p3 closed form: Pr(Gd2 < gamma_th,
/// Gr >= gamma_th) for plain two-hop relaying.
inline double p3_no_direct(const SystemParams& sys, bool rp_cap = true) {
  detail::require_open_rho(sys, "p3_no_direct");
  const auto& l = sys.links();
  const double beta = sys.beta();
  const double psi = sys.psi();
  const double lsr = l.lambda_sr, lsp = l.lambda_sp;
  const double a = l.lambda_rp / beta;
  const double b = psi * l.lambda_rd / beta;
  const double s = (1.0 - sys.rho()) / psi;
  const double ab = a + b;

  double capped = 1.0 - lsr * std::exp(-ab * s) / (lsp * s + lsr) -
                  lsr * ab / lsp * detail::e1_window(ab * lsr / lsp, ab * s);
  const double uncapped =
      b * lsr / lsp * detail::e1_window(b * lsr / lsp, b * s) -
      lsr * (-std::expm1(-b * s)) / (lsp * s + lsr);
  double t = 0.0;
  if (rp_cap) {
    const double w = l.lambda_rd * psi / l.lambda_rp;
    t = w / (1.0 + w);
  }
  bool clamped = false;
  return detail::clamp_probability(t * capped + uncapped, clamped,
                                   "p3_no_direct");
}

/// Assembles the outage breakdown and throughput. At rho = 0 or rho = 1 the
/// relayed branch never succeeds, so tau = Rs q2 exactly.
inline OutageBreakdown tau_incremental(const SystemParams& sys,
                                       P3Variant variant = P3Variant::full) {
  OutageBreakdown out;
  out.p1 = p1_relay_decode_outage(sys);
  out.p2 = p2_both_succeed(sys);
  out.q2 = q2_direct_success(sys);
  const double rs = sys.rs();

  if (sys.rho() <= 0.0 || sys.rho() >= 1.0) {
    out.p3 = std::clamp(1.0 - out.p1 - out.p2, 0.0, 1.0);
    out.p3_raw = out.p3;
    out.q1 = 0.0;
    out.tau = rs * out.q2;
    return out;
  }

  switch (variant) {
    case P3Variant::full: {
      const auto ev = p3_closed_form_detail(sys);
      out.p3 = ev.value;
      out.p3_raw = ev.raw;
      out.p3_clamped = ev.clamped;
      break;
    }
    case P3Variant::no_rp:
      out.p3 = p3_no_rp_limit(sys);
      out.p3_raw = out.p3;
      break;
    case P3Variant::high_snr:
      out.p3 = p3_high_snr(sys);
      out.p3_raw = out.p3;
      break;
  }
  out.q1 = std::clamp(1.0 - (out.p1 + out.p2 + out.p3), 0.0, 1.0);
  out.tau = 0.5 * rs * out.q1 + rs * out.q2;
  return out;
}

/// Simplified throughput used to derive the optimal power split.
inline double tau_simplified(const SystemParams& sys) {
  detail::require_open_rho(sys, "tau_simplified");
  const auto& l = sys.links();
  const double psi = sys.psi();
  const double rho = sys.rho();
  const double eta = sys.eta();
  const double q2 = q2_direct_success(sys);
  const double direct_gain = 1.0 + l.lambda_sp / (l.lambda_sd * psi);
  const double harvest_gain =
      1.0 + eta * l.lambda_sp * rho / (psi * l.lambda_rd * l.lambda_sr);
  const double mrc_fail = 1.0 / (direct_gain * harvest_gain);
  const double decode_fail = eta * rho * l.lambda_sr * psi /
                             (l.lambda_rd * l.lambda_sp * (1.0 - rho));
  const double outage = mrc_fail + decode_fail + q2;
  return 0.5 * sys.rs() * (1.0 - outage) + sys.rs() * q2;
}

/// lambda_sd -> infinity limit of tau_simplified.
inline double tau_simplified_no_direct(const SystemParams& sys) {
  detail::require_open_rho(sys, "tau_simplified_no_direct");
  const auto& l = sys.links();
  const double psi = sys.psi();
  const double rho = sys.rho();
  const double eta = sys.eta();
  const double harvest_gain =
      1.0 + eta * l.lambda_sp * rho / (psi * l.lambda_rd * l.lambda_sr);
  const double decode_fail = eta * rho * l.lambda_sr * psi /
                             (l.lambda_rd * l.lambda_sp * (1.0 - rho));
  return 0.5 * sys.rs() * (1.0 - 1.0 / harvest_gain - decode_fail);
}

/// Throughput of two-hop relaying without the direct link.
inline double tau_no_direct(const SystemParams& sys) {
  detail::require_open_rho(sys, "tau_no_direct");
  const double p1 = p1_relay_decode_outage(sys);
  const double p3 = p3_no_direct(sys);
  return 0.5 * sys.rs() * std::clamp(1.0 - p1 - p3, 0.0, 1.0);
}

/// Stationary point of tau_simplified in (0, 1).
inline double rho_star_closed_form(const SystemParams& sys) {
  const auto& l = sys.links();
  const double psi = sys.psi();
  const double root = std::sqrt(1.0 + l.lambda_sp / (l.lambda_sd * psi));
  const double num = 1.0 - root * psi * l.lambda_sr / l.lambda_sp;
  const double den = 1.0 + root * sys.eta() / l.lambda_rd;
  const double rho = num / den;
  if (!(rho > 0.0 && rho < 1.0)) {
    throw RegimeError("closed-form optimal rho " + std::to_string(rho) +
                      " lies outside (0, 1)");
  }
  return rho;
}

/// Optimal power split when the direct link is absent.
inline double rho_star_no_direct(const SystemParams& sys) {
  const auto& l = sys.links();
  const double num = 1.0 - sys.psi() * l.lambda_sr / l.lambda_sp;
  const double rho = num / (1.0 + sys.eta() / l.lambda_rd);
  if (!(rho > 0.0 && rho < 1.0)) {
    throw RegimeError("closed-form optimal rho (no direct link) " +
                      std::to_string(rho) + " lies outside (0, 1)");
  }
  return rho;
}

}  // namespace ehrelay

#endif  // EHRELAY_ANALYTIC_HPP
