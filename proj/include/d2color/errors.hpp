#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace d2c {

enum class ErrorKind {
  DisconnectedGraph,
  NotATree,
  DuplicateEdge,
  InvalidEdge,
  IdentityClashWithin2Hops,
  InfeasibleDegreeCap,
  DuplicateStart,
  ClashDetected,
  ProtocolViolation,
  MissingPairForUncoloredChild,
  ParentSaturated,
  DegreeMismatch,
  SaturatedEndpoint,
  IdentityPreconditionViolated,
  ConsistencyBroken,
  MalformedInput,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace d2c
