#include "fedmobile/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fedmobile/errors.hpp"
#include "fedmobile/rng.hpp"

namespace fedmobile {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

void check_window_params(Slot lo, Slot hi, Slot delta) {
  require(0 <= lo && lo <= hi && hi <= delta,
          "window parameters must satisfy 0 <= lo <= hi <= delta");
}

}  // namespace

Slot upload_staleness_bound(Slot theta, Slot big_theta, Slot delta) {
  check_window_params(theta, big_theta, delta);
  return std::max(delta - theta, big_theta);
}

Slot download_staleness_bound(Slot omega, Slot big_omega, Slot delta) {
  check_window_params(omega, big_omega, delta);
  return std::max(delta - omega, big_omega);
}

BoundScanReport staleness_bound_scan(Slot delta) {
  require(delta >= 2 && delta % 2 == 0, "staleness_bound_scan: delta must be even and >= 2");

  BoundScanReport rep;
  rep.delta = delta;
  const Slot half = delta / 2;

  auto scan = [&](const char* name, Slot (*bound)(Slot, Slot, Slot), Slot& min_out) {
    long long pairs = 0;
    Slot best = delta + 1;
    Slot best_lo = -1, best_hi = -1;
    for (Slot lo = 0; lo <= delta; ++lo) {
      for (Slot hi = lo; hi <= delta; ++hi) {
        ++pairs;
        const Slot val = bound(lo, hi, delta);
        if (2 * val < delta)
          rep.violations.push_back({std::string(name) + " below delta/2", lo, hi});
        if (hi > lo && bound(lo, hi, delta) < bound(lo, hi - 1, delta))
          rep.violations.push_back({std::string(name) + " decreasing in hi", lo, hi});
        if (lo > 0 && bound(lo, hi, delta) > bound(lo - 1, hi, delta))
          rep.violations.push_back({std::string(name) + " increasing in lo", lo, hi});
        if (val < best) {
          best = val;
          best_lo = lo;
          best_hi = hi;
        } else if (val == best && lo == half && hi == half) {
          best_lo = lo;
          best_hi = hi;
        }
      }
    }
    if (best != half)
      rep.violations.push_back({std::string(name) + " minimum is not delta/2", best_lo, best_hi});
    if (bound(half, half, delta) != half)
      rep.violations.push_back({std::string(name) + " not minimized at (delta/2, delta/2)",
                                half, half});
    // the minimum must be attained only at lo = hi = delta/2
    for (Slot lo = 0; lo <= delta; ++lo)
      for (Slot hi = lo; hi <= delta; ++hi)
        if (bound(lo, hi, delta) == half && !(lo == half && hi == half))
          rep.violations.push_back({std::string(name) + " minimum attained off delta/2", lo, hi});
    rep.pairs_scanned = pairs;
    min_out = best;
  };

  scan("upload bound", &upload_staleness_bound, rep.min_upload);
  scan("download bound", &download_staleness_bound, rep.min_download);
  rep.argmin_lo = half;
  rep.argmin_hi = half;
  return rep;
}

ConvergenceBound convergence_bound(const BoundParams& p) {
  require(p.lipschitz > 0 && p.grad_second_moment >= 0 && p.grad_variance >= 0,
          "convergence_bound: constants must be positive");
  require(p.total_slots >= 1 && p.n_clients >= 1,
          "convergence_bound: T and N must be >= 1");
  require(p.eta > 0, "convergence_bound: eta must be > 0");
  if (p.eta > 1.0 / p.lipschitz)
    throw config_error("step-size-violates-theorem: eta must be <= 1/L (eta=" +
                       std::to_string(p.eta) + ", 1/L=" + std::to_string(1.0 / p.lipschitz) +
                       ")");

  const double c = static_cast<double>(
      upload_staleness_bound(p.theta, p.big_theta, p.delta));
  const double d = static_cast<double>(
      download_staleness_bound(p.omega, p.big_omega, p.delta));
  const double l = p.lipschitz;
  const double g2 = p.grad_second_moment * p.grad_second_moment;

  ConvergenceBound b;
  b.term_initial = 4.0 / (p.eta * static_cast<double>(p.total_slots)) * p.f0_minus_fstar;
  b.term_staleness = 4.0 * (3.0 * d * d + 2.0 * c * c) * l * l * p.eta * p.eta * g2;
  b.term_noise = 2.0 * l * p.eta * p.grad_variance * p.grad_variance /
                 static_cast<double>(p.n_clients);
  b.total = b.term_initial + b.term_staleness + b.term_noise;
  return b;
}

ConvergenceBound convergence_bound_tuned(const BoundParams& p) {
  BoundParams q = p;
  q.eta = std::sqrt(static_cast<double>(p.n_clients)) /
          (p.lipschitz * std::sqrt(static_cast<double>(p.total_slots)));
  require(q.eta <= 1.0 / p.lipschitz,
          "convergence_bound_tuned: requires T >= N so that eta <= 1/L");
  return convergence_bound(q);
}

namespace {

// Stationary phase of a renewal meeting process: pick the enclosing interval
// length-biased, then a uniform position inside it. Returns (time to next
// meeting in 1..J, time since last meeting in 0..J-1).
std::pair<Slot, Slot> sample_peer_phase(const ScheduleFamily& family, std::mt19937_64& rng) {
  Slot interval = 0;
  if (family.kind == ScheduleFamily::Kind::FixedInterval) {
    interval = family.interval;
  } else {
    // weight each gap J in [min_gap, max_gap] proportionally to J
    const Slot lo = family.min_gap, hi = family.max_gap;
    const double total = 0.5 * static_cast<double>((lo + hi) * (hi - lo + 1));
    std::uniform_real_distribution<double> unif(0.0, total);
    double u = unif(rng);
    interval = hi;
    for (Slot j = lo; j <= hi; ++j) {
      u -= static_cast<double>(j);
      if (u <= 0.0) {
        interval = j;
        break;
      }
    }
  }
  std::uniform_int_distribution<Slot> pos(0, interval - 1);
  const Slot age = pos(rng);
  return {interval - age, age};
}

void check_family(const ScheduleFamily& family) {
  if (family.kind == ScheduleFamily::Kind::FixedInterval)
    require(family.interval >= 1, "schedule family: interval must be >= 1");
  else
    require(family.min_gap >= 1 && family.min_gap <= family.max_gap,
            "schedule family: need 1 <= min_gap <= max_gap");
}

}  // namespace

MonteCarloEstimate relay_probability_monte_carlo(RelayKind kind, const ScheduleFamily& family,
                                                 double rho, SearchWindow window,
                                                 long long trials, std::uint64_t seed) {
  check_family(family);
  require(rho >= 0.0 && rho <= 1.0, "relay_probability_monte_carlo: rho in [0,1]");
  require(window.lo >= 0 && window.lo <= window.hi,
          "relay_probability_monte_carlo: need 0 <= lo <= hi");
  require(trials >= 1000, "relay_probability_monte_carlo: trials must be >= 1000");

  long long successes = 0;
  for (long long trial = 0; trial < trials; ++trial) {
    auto rng = make_rng(seed, Stream::Trial, static_cast<std::uint64_t>(trial));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    bool found = false;
    // window offsets r = lo..hi; uploads test the peer's next meeting against
    // the window end, downloads test the peer's last meeting against the
    // window start.
    for (Slot r = window.lo; r <= window.hi && !found; ++r) {
      const bool contact = rho >= 1.0 || unif(rng) < rho;
      auto [to_next, age] = sample_peer_phase(family, rng);
      if (!contact) continue;
      if (kind == RelayKind::Upload) {
        found = to_next <= window.hi - r;
      } else {
        found = age <= r - window.lo;
      }
    }
    if (found) ++successes;
  }

  MonteCarloEstimate est;
  est.trials = trials;
  est.successes = successes;
  est.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  est.std_error =
      std::sqrt(std::max(est.estimate * (1.0 - est.estimate), 1e-12) /
                static_cast<double>(trials));
  return est;
}

double relay_probability_analytic(RelayKind kind, const ScheduleFamily& family, double rho,
                                  SearchWindow window) {
  check_family(family);
  if (family.kind != ScheduleFamily::Kind::FixedInterval)
    throw config_error(
        "analytic-form-unavailable: closed form exists only for the fixed-interval "
        "uniform-phase family; use relay_probability_monte_carlo");
  require(rho >= 0.0 && rho <= 1.0, "relay_probability_analytic: rho in [0,1]");
  require(window.lo >= 0 && window.lo <= window.hi,
          "relay_probability_analytic: need 0 <= lo <= hi");

  const double interval = static_cast<double>(family.interval);
  double miss_all = 1.0;
  for (Slot r = window.lo; r <= window.hi; ++r) {
    double q;
    if (kind == RelayKind::Upload) {
      // P(peer's time-to-next <= remaining window), time-to-next uniform 1..I
      q = std::clamp(static_cast<double>(window.hi - r) / interval, 0.0, 1.0);
    } else {
      // P(peer's age <= elapsed window), age uniform 0..I-1
      q = std::clamp(static_cast<double>(r - window.lo + 1) / interval, 0.0, 1.0);
    }
    miss_all *= 1.0 - rho * q;
  }
  return 1.0 - miss_all;
}

}  // namespace fedmobile
