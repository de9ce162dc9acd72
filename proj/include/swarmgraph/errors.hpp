#pragma once

#include <stdexcept>
#include <string>

namespace swarmgraph {

/// Base type for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph construction and traversal.
struct UnknownNode : Error { using Error::Error; };
struct CycleDetected : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

// Execution.
struct RoutineFailure : Error { using Error::Error; };
struct UnresolvedRoutine : Error { using Error::Error; };

// Edge distribution.
struct InfeasibleSample : Error { using Error::Error; };

// Optimizers.
struct LengthMismatch : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct OptimizationError : Error { using Error::Error; };

// Node optimization.
struct ReplayFailure : Error { using Error::Error; };

// Decision nodes.
struct EmptyInput : Error { using Error::Error; };

// Executors.
struct MissingTruth : Error { using Error::Error; };
struct AuthMissing : Error { using Error::Error; };
struct RateLimited : Error { using Error::Error; };
struct MalformedResponse : Error { using Error::Error; };
struct TransportError : Error { using Error::Error; };

// Tooling.
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace swarmgraph
