#ifndef EHRELAY_MONTECARLO_HPP
#define EHRELAY_MONTECARLO_HPP

// Event-level simulator of the two-slot incremental protocol. It shares no
// code with the closed forms beyond SystemParams, and serves as their
// oracle.
//
// Slot 1: S sends with P_s = I/|g_sp|^2. R splits rho of the received power
//         to harvesting (hP = beta P_s |h_sr|^2) and decodes on the rest.
//         D tries the direct copy.
// Slot 2: on direct success S sends a fresh block (rate Rs per slot);
//         otherwise R forwards with P_r = min(hP, I/|g_rp|^2) and D combines
//         both copies (rate Rs/2 on success).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ehrelay/model.hpp"
#include "ehrelay/rng.hpp"

namespace ehrelay {

enum class McVariant {
  incremental,        // the protocol above
  no_direct_two_hop,  // D ignores the direct copy; relay always forwards
  direct_only,        // no relay; one block per slot over the direct link
  no_rp_constraint,   // incremental, but R ignores the primary cap
};

/// Squared channel magnitudes of one two-slot cycle (quasi-static).
struct ChannelGains {
  double g_sp2 = 0.0;
  double g_rp2 = 0.0;
  double h_sr2 = 0.0;
  double h_rd2 = 0.0;
  double h_sd2 = 0.0;
};

struct TrialOutcome {
  ChannelGains gains;
  double p_s = 0.0;   // source power
  double hp_r = 0.0;  // harvested relay power
  double p_r = 0.0;   // relay transmit power
  double gamma_r = 0.0;
  double gamma_d1 = 0.0;
  double gamma_d2 = 0.0;
  double gamma_d = 0.0;
  double achieved_rate = 0.0;  // 0, Rs/2 or Rs
};

inline ChannelGains draw_gains(const LinkStats& l, TrialStream& rng) {
  ChannelGains g;
  g.g_sp2 = rng.exponential(l.lambda_sp);
  g.g_rp2 = rng.exponential(l.lambda_rp);
  g.h_sr2 = rng.exponential(l.lambda_sr);
  g.h_rd2 = rng.exponential(l.lambda_rd);
  g.h_sd2 = rng.exponential(l.lambda_sd);
  return g;
}

/// Evaluates one cycle for fixed gains (N0 = 1).
inline TrialOutcome run_trial(const SystemParams& sys, const ChannelGains& g,
                              McVariant variant = McVariant::incremental) {
  const double interference = sys.i_over_no();
  const double gamma_th = sys.gamma_th();
  const double rs = sys.rs();

  TrialOutcome o;
  o.gains = g;
  o.p_s = interference / g.g_sp2;
  o.hp_r = sys.beta() * o.p_s * g.h_sr2;
  o.p_r = variant == McVariant::no_rp_constraint
              ? o.hp_r
              : std::min(o.hp_r, interference / g.g_rp2);
  o.gamma_r = (1.0 - sys.rho()) * o.p_s * g.h_sr2;
  o.gamma_d1 = o.p_s * g.h_sd2;
  o.gamma_d2 = o.p_r * g.h_rd2;
  o.gamma_d = o.gamma_d1 + o.gamma_d2;

  const bool direct_ok = o.gamma_d1 >= gamma_th;
  const bool relay_ok = o.gamma_r >= gamma_th;
  switch (variant) {
    case McVariant::incremental:
    case McVariant::no_rp_constraint:
      if (direct_ok) {
        o.achieved_rate = rs;
      } else if (relay_ok && o.gamma_d >= gamma_th) {
        o.achieved_rate = 0.5 * rs;
      }
      break;
    case McVariant::no_direct_two_hop:
      if (relay_ok && o.gamma_d2 >= gamma_th) o.achieved_rate = 0.5 * rs;
      break;
    case McVariant::direct_only:
      if (direct_ok) o.achieved_rate = rs;
      break;
  }
  return o;
}

/// Draws the gains of one trial from its stream and evaluates it.
inline TrialOutcome run_trial(const SystemParams& sys, TrialStream& rng,
                              McVariant variant = McVariant::incremental) {
  return run_trial(sys, draw_gains(sys.links(), rng), variant);
}

/// Integer event tallies. p1/p2/p3/q1 partition every trial.
struct EventCounts {
  std::uint64_t direct_success = 0;  // Gd1 >= gamma
  std::uint64_t relay_decode = 0;    // Gr >= gamma
  std::uint64_t mrc_success = 0;     // Gd1 + Gd2 >= gamma
  std::uint64_t p1_event = 0;
  std::uint64_t p2_event = 0;
  std::uint64_t p3_event = 0;
  std::uint64_t q1_event = 0;
  std::uint64_t full_rate = 0;  // trials scoring Rs
  std::uint64_t half_rate = 0;  // trials scoring Rs/2

  EventCounts& operator+=(const EventCounts& o) {
    direct_success += o.direct_success;
    relay_decode += o.relay_decode;
    mrc_success += o.mrc_success;
    p1_event += o.p1_event;
    p2_event += o.p2_event;
    p3_event += o.p3_event;
    q1_event += o.q1_event;
    full_rate += o.full_rate;
    half_rate += o.half_rate;
    return *this;
  }

  bool operator==(const EventCounts&) const = default;
};

struct McEstimate {
  double mean = 0.0;       // throughput, bits/channel use
  double std_error = 0.0;  // sample std / sqrt(trials)
  std::uint64_t trials = 0;
  EventCounts counts;

  double freq(std::uint64_t count) const {
    return static_cast<double>(count) / static_cast<double>(trials);
  }
  double direct_success() const { return freq(counts.direct_success); }
  double relay_decode() const { return freq(counts.relay_decode); }
  double mrc_success() const { return freq(counts.mrc_success); }
  double p1() const { return freq(counts.p1_event); }
  double p2() const { return freq(counts.p2_event); }
  double p3() const { return freq(counts.p3_event); }
  double q1() const { return freq(counts.q1_event); }
  double q2() const { return direct_success(); }

  bool operator==(const McEstimate&) const = default;
};

/// Standard error of a frequency estimate of probability p from n trials.
inline double binomial_std_error(double p, std::uint64_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

struct McOptions {
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
};

namespace detail {

inline void tally(const SystemParams& sys, McVariant variant,
                  std::uint64_t seed, std::uint64_t begin, std::uint64_t end,
                  EventCounts& out) {
  const double gamma_th = sys.gamma_th();
  const double rs = sys.rs();
  EventCounts c;
  for (std::uint64_t i = begin; i < end; ++i) {
    TrialStream rng(seed, i);
    const TrialOutcome o = run_trial(sys, rng, variant);
    const bool direct = o.gamma_d1 >= gamma_th;
    const bool relay = o.gamma_r >= gamma_th;
    const bool mrc = o.gamma_d >= gamma_th;
    c.direct_success += direct;
    c.relay_decode += relay;
    c.mrc_success += mrc;
    c.p1_event += !relay;
    c.p2_event += relay && direct;
    c.p3_event += relay && !mrc;
    c.q1_event += relay && !direct && mrc;
    c.full_rate += o.achieved_rate == rs;
    c.half_rate += o.achieved_rate == 0.5 * rs;
  }
  out = c;
}

}  // namespace detail

/// Monte Carlo throughput of one protocol variant. Bit-identical for a given
/// (sys, trials, seed, variant) whatever the worker count.
inline McEstimate estimate_variant(const SystemParams& sys,
                                   std::uint64_t trials, std::uint64_t seed,
                                   McVariant variant, McOptions opts = {}) {
  if (trials == 0) throw std::invalid_argument("estimate: trials must be >= 1");
  unsigned workers = opts.workers ? opts.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, trials / 4096)));

  std::vector<EventCounts> partial(workers);
  const std::uint64_t chunk = trials / workers;
  if (workers == 1) {
    detail::tally(sys, variant, seed, 0, trials, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = w + 1 == workers ? trials : begin + chunk;
      pool.emplace_back([&, w, begin, end] {
        detail::tally(sys, variant, seed, begin, end, partial[w]);
      });
    }
  }

  McEstimate est;
  est.trials = trials;
  for (const auto& p : partial) est.counts += p;

  const double n = static_cast<double>(trials);
  const double rs = sys.rs();
  const double full = static_cast<double>(est.counts.full_rate);
  const double half = static_cast<double>(est.counts.half_rate);
  est.mean = (rs * full + 0.5 * rs * half) / n;
  if (trials > 1) {
    const double second_moment = (rs * rs * full + 0.25 * rs * rs * half) / n;
    const double var =
        std::max(second_moment - est.mean * est.mean, 0.0) * n / (n - 1.0);
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

inline McEstimate estimate(const SystemParams& sys, std::uint64_t trials,
                           std::uint64_t seed, McOptions opts = {}) {
  return estimate_variant(sys, trials, seed, McVariant::incremental, opts);
}

}  // namespace ehrelay

#endif  // EHRELAY_MONTECARLO_HPP
