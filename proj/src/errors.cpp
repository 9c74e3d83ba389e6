#include "d2color/errors.hpp"

namespace d2c {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NotATree: return "NotATree";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::InvalidEdge: return "InvalidEdge";
    case ErrorKind::IdentityClashWithin2Hops: return "IdentityClashWithin2Hops";
    case ErrorKind::InfeasibleDegreeCap: return "InfeasibleDegreeCap";
    case ErrorKind::DuplicateStart: return "DuplicateStart";
    case ErrorKind::ClashDetected: return "ClashDetected";
    case ErrorKind::ProtocolViolation: return "ProtocolViolation";
    case ErrorKind::MissingPairForUncoloredChild: return "MissingPairForUncoloredChild";
    case ErrorKind::ParentSaturated: return "ParentSaturated";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::SaturatedEndpoint: return "SaturatedEndpoint";
    case ErrorKind::IdentityPreconditionViolated: return "IdentityPreconditionViolated";
    case ErrorKind::ConsistencyBroken: return "ConsistencyBroken";
    case ErrorKind::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace d2c
