#pragma once

#include <stdexcept>
#include <string>

#include "fedmobile/types.hpp"

namespace fedmobile {

// Bad parameters or malformed config, detected at load/validation time.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A protocol rule was broken (duplicate-step, duplicate-delivery,
// undefined-before-first-meeting, ...). Carries the offending slot/client
// when known.
class protocol_violation : public std::runtime_error {
 public:
  protocol_violation(const std::string& what, Slot slot = -1, ClientId client = -1)
      : std::runtime_error(what), slot(slot), client(client) {}

  Slot slot;
  ClientId client;
};

// Non-finite values appeared in a model update; carries the slot index.
class numerical_divergence : public std::runtime_error {
 public:
  explicit numerical_divergence(Slot slot, const std::string& what = "")
      : std::runtime_error(what.empty()
                               ? "numerical-divergence at slot " + std::to_string(slot)
                               : what),
        slot(slot) {}

  Slot slot;
};

}  // namespace fedmobile
