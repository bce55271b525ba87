#pragma once

#include <stdexcept>
#include <string>

namespace dgl {

/// A hypothesis of an analytic bound or a regime precondition does not hold for the inputs.
struct HypothesisError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Integration failed where it was expected to succeed (blow-up, step underflow).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. `key` is the dotted path of the offending field.
struct ConfigError : std::invalid_argument {
  ConfigError(std::string key_path, const std::string& what)
      : std::invalid_argument(key_path.empty() ? what : key_path + ": " + what),
        key(std::move(key_path)) {}
  std::string key;
};

}  // namespace dgl
