#pragma once

#include <cstdint>
#include <vector>

namespace fedmobile {

// Discrete time index. One SGD step per client per slot.
using Slot = std::int64_t;

// Client identifiers are 1-indexed (client ids run 1..N).
using ClientId = std::int32_t;

// Dense model weights, dimension d.
using ModelVector = std::vector<double>;

// A relay search window given as offsets:
//   upload:   absolute slots [tau_last + lo, tau_last + hi]
//   download: absolute slots [tau_next - hi, tau_next - lo]
struct SearchWindow {
  Slot lo = 0;
  Slot hi = 0;

  Slot length() const { return hi - lo; }
  friend bool operator==(const SearchWindow&, const SearchWindow&) = default;
};

}  // namespace fedmobile
