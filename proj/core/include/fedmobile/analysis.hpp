#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmobile/types.hpp"

namespace fedmobile {

/// max{delta - theta, Theta}: the conditional upload staleness bound.
Slot upload_staleness_bound(Slot theta, Slot big_theta, Slot delta);

/// max{delta - omega, Omega}: the conditional download staleness bound.
Slot download_staleness_bound(Slot omega, Slot big_omega, Slot delta);

struct BoundScanViolation {
  std::string what;
  Slot lo = 0;
  Slot hi = 0;
};

/// Exhaustive verification over all 0 <= lo <= hi <= delta that the staleness
/// bound is non-decreasing in hi, non-increasing in lo, never below delta/2,
/// and minimized exactly at lo = hi = delta/2.
struct BoundScanReport {
  Slot delta = 0;
  long long pairs_scanned = 0;   // per direction
  Slot min_upload = 0;
  Slot min_download = 0;
  Slot argmin_lo = 0;
  Slot argmin_hi = 0;
  std::vector<BoundScanViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Requires delta >= 2 and even (so delta/2 is an exact slot count).
BoundScanReport staleness_bound_scan(Slot delta);

/// Constants of the convergence statement.
struct BoundParams {
  Slot theta = 0, big_theta = 0;
  Slot omega = 0, big_omega = 0;
  Slot delta = 0;
  double lipschitz = 1.0;         // L
  double grad_second_moment = 1.0;  // G
  double grad_variance = 1.0;       // sigma
  double eta = 0.1;
  long long total_slots = 1;      // T
  int n_clients = 1;              // N
  double f0_minus_fstar = 1.0;
};

struct ConvergenceBound {
  double term_initial = 0.0;    // (4 / (eta T)) (f(x0) - f*)
  double term_staleness = 0.0;  // 4 (3 D^2 + 2 C^2) L^2 eta^2 G^2
  double term_noise = 0.0;      // 2 L eta sigma^2 / N
  double total = 0.0;
};

/// Evaluates the convergence bound; requires eta <= 1/L
/// (throws config_error "step-size-violates-theorem" otherwise).
ConvergenceBound convergence_bound(const BoundParams& p);

/// The same bound specialized to eta = sqrt(N) / (L sqrt(T)); p.eta ignored.
ConvergenceBound convergence_bound_tuned(const BoundParams& p);

enum class RelayKind { Upload, Download };

struct ScheduleFamily {
  enum class Kind { FixedInterval, RandomInterval };
  Kind kind = Kind::FixedInterval;
  Slot interval = 50;    // fixed-interval family
  Slot min_gap = 30;     // random-interval family
  Slot max_gap = 50;

  static ScheduleFamily fixed(Slot interval) {
    return {Kind::FixedInterval, interval, 0, 0};
  }
  static ScheduleFamily random(Slot min_gap, Slot max_gap) {
    return {Kind::RandomInterval, 0, min_gap, max_gap};
  }
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long long trials = 0;
  long long successes = 0;
};

/// Monte Carlo oracle for the probability that a tagged client contacts at
/// least one semi-qualified relay during its search window. Each window slot
/// independently produces a contact with probability rho against a peer with
/// a stationary schedule phase ("sufficiently many clients, met uniformly at
/// random"). Window is (theta, Theta) for uploads, (omega, Omega) for
/// downloads.
MonteCarloEstimate relay_probability_monte_carlo(RelayKind kind, const ScheduleFamily& family,
                                                 double rho, SearchWindow window,
                                                 long long trials, std::uint64_t seed);

/// Closed form Q = 1 - prod_t (1 - rho q(t)) for the fixed-interval
/// uniform-phase family. Throws config_error ("analytic-form-unavailable")
/// for other families; use the Monte Carlo oracle for those.
double relay_probability_analytic(RelayKind kind, const ScheduleFamily& family, double rho,
                                  SearchWindow window);

}  // namespace fedmobile
