#ifndef EHRELAY_MODEL_HPP
#define EHRELAY_MODEL_HPP

// Scenario definition for the underlay two-hop network S -> R -> D with a
// direct S -> D link and primary receiver P.
//
// Every squared channel magnitude |h_xy|^2 is exponential with rate
// lambda_xy, so its mean is 1/lambda_xy. Noise power is normalized to one,
// which leaves the interference limit I expressed as the linear ratio I/N0.

#include <cmath>
#include <stdexcept>
#include <string>

#include "ehrelay/errors.hpp"

namespace ehrelay {

/// Normalized node distances plus path-loss exponent.
struct NetworkGeometry {
  double d_sr = 1.2;
  double d_rd = 1.8;
  double d_sd = 3.0;
  double d_sp = 3.0;
  double d_rp = 3.0;
  double epsilon = 4.0;

  void validate() const {
    for (double d : {d_sr, d_rd, d_sd, d_sp, d_rp}) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw ScenarioError("geometry: distances must be finite and > 0");
      }
    }
    if (!(epsilon >= 2.0) || !std::isfinite(epsilon)) {
      throw ScenarioError("geometry: path-loss exponent must be >= 2");
    }
  }
};

/// Exponential rate parameters of the five squared channel gains.
struct LinkStats {
  double lambda_sr = 1.0;
  double lambda_rd = 1.0;
  double lambda_sd = 1.0;
  double lambda_sp = 1.0;
  double lambda_rp = 1.0;

  void validate() const {
    for (double l : {lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp}) {
      if (!(l > 0.0) || std::isnan(l)) {
        throw ScenarioError("link stats: every lambda must be > 0");
      }
    }
  }

  bool operator==(const LinkStats&) const = default;
};

/// lambda_xy = d_xy^epsilon (mean gain d^-epsilon).
inline LinkStats lambdas_from_geometry(const NetworkGeometry& geo) {
  geo.validate();
  const auto rate = [&](double d) { return std::pow(d, geo.epsilon); };
  return {rate(geo.d_sr), rate(geo.d_rd), rate(geo.d_sd), rate(geo.d_sp),
          rate(geo.d_rp)};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Full scenario: fading statistics, EH efficiency, power-splitting
/// fraction, interference limit and fixed rate. Immutable once built.
class SystemParams {
 public:
  SystemParams(LinkStats links, double eta, double rho, double i_over_no,
               double rs)
      : links_(links), eta_(eta), rho_(rho), i_over_no_(i_over_no), rs_(rs) {
    links_.validate();
    if (!(eta_ > 0.0 && eta_ <= 1.0)) {
      throw ScenarioError("eta must lie in (0, 1]");
    }
    if (!(rho_ >= 0.0 && rho_ <= 1.0)) {
      throw ScenarioError("rho must lie in [0, 1]");
    }
    if (!(i_over_no_ > 0.0) || !std::isfinite(i_over_no_)) {
      throw ScenarioError("I/N0 must be finite and > 0");
    }
    if (!(rs_ > 0.0) || !std::isfinite(rs_)) {
      throw ScenarioError("rate R_s must be finite and > 0");
    }
  }

  const LinkStats& links() const { return links_; }
  double eta() const { return eta_; }
  double rho() const { return rho_; }
  double i_over_no() const { return i_over_no_; }
  double rs() const { return rs_; }

  /// Outage threshold 2^Rs - 1.
  double gamma_th() const { return std::exp2(rs_) - 1.0; }
  /// gamma_th / (I/N0).
  double psi() const { return gamma_th() / i_over_no_; }
  /// eta * rho.
  double beta() const { return eta_ * rho_; }

  SystemParams with_rho(double rho) const {
    return {links_, eta_, rho, i_over_no_, rs_};
  }
  SystemParams with_rs(double rs) const {
    return {links_, eta_, rho_, i_over_no_, rs};
  }
  SystemParams with_i_over_no(double i_over_no) const {
    return {links_, eta_, rho_, i_over_no, rs_};
  }
  SystemParams with_links(const LinkStats& links) const {
    return {links, eta_, rho_, i_over_no_, rs_};
  }

 private:
  LinkStats links_;
  double eta_;
  double rho_;
  double i_over_no_;
  double rs_;
};

/// Conditional mean of P_s |h_sd|^2 given P_s |h_sd|^2 <= gamma_th (N0 = 1).
///
/// With V = I |h_sd|^2 / |g_sp|^2 and kappa = lambda_sd / (I lambda_sp),
/// Pr(V > v) = 1 / (1 + kappa v), so with k = kappa gamma_th
///   E[V | V <= gamma_th] = ((1 + k) ln(1 + k) / k - 1) / kappa.
inline double mean_cond_direct(const SystemParams& sys) {
  const double kappa =
      sys.links().lambda_sd / (sys.i_over_no() * sys.links().lambda_sp);
  const double k = kappa * sys.gamma_th();
  double ratio;  // (1+k) ln(1+k)/k - 1
  if (k < 1e-4) {
    ratio = k / 2.0 - k * k / 6.0 + k * k * k / 12.0;
  } else {
    ratio = (1.0 + k) * std::log1p(k) / k - 1.0;
  }
  return ratio / kappa;
}

/// Auxiliary constants of the approximate closed form for p3.
struct P3Params {
  double a = 0.0;  // lambda_rp / beta
  double b = 0.0;  // psi lambda_rd / beta
  double c = 0.0;  // psi lambda_sd
  double d = 0.0;  // lambda_rd / (beta lambda_sd)
  double s = 0.0;  // (1 - rho) / psi
  double t = 0.0;  // averaged relay-to-primary cap weight, in [0, 1)
};

/// Requires rho strictly inside (0, 1); the endpoints have their own limit
/// branches in the analytic layer.
inline P3Params p3_params(const SystemParams& sys) {
  const double rho = sys.rho();
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DegenerateRhoError("p3 parameters need rho in (0, 1), got " +
                             std::to_string(rho));
  }
  const auto& l = sys.links();
  const double beta = sys.beta();
  const double psi = sys.psi();
  P3Params p;
  p.a = l.lambda_rp / beta;
  p.b = psi * l.lambda_rd / beta;
  p.c = psi * l.lambda_sd;
  p.d = l.lambda_rd / (beta * l.lambda_sd);
  p.s = (1.0 - rho) / psi;
  const double w = l.lambda_rd / (sys.i_over_no() * l.lambda_rp) *
                   (sys.gamma_th() - mean_cond_direct(sys));
  p.t = w / (1.0 + w);
  return p;
}

}  // namespace ehrelay

#endif  // EHRELAY_MODEL_HPP
