#pragma once

#include <stdexcept>
#include <string>

namespace bfly {

/// Violated operation precondition (e.g. endpoints too close for the
/// requested trust radius). Distinct from invalid_argument so the CLI can
/// map it to its own exit code.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Malformed wire-level input (duplicate channel ids, bad node literals,
/// unparsable edge lists).
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bfly
