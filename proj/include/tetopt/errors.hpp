#pragma once

#include <stdexcept>

namespace tetopt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonManifoldFacet : Error { using Error::Error; };
struct DisconnectedSeed : Error { using Error::Error; };
struct OpenShell : Error { using Error::Error; };
struct VolumeMismatch : Error { using Error::Error; };
struct OrientationViolation : Error { using Error::Error; };
struct ShellMismatch : Error { using Error::Error; };
struct NotAdjacent : Error { using Error::Error; };
struct ConstrainedFacet : Error { using Error::Error; };
struct BoundaryVertex : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct DegenerateTet : Error { using Error::Error; };
struct TooManyPoints : Error { using Error::Error; };
struct NoCandidate : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UnsupportedElement : Error { using Error::Error; };
struct InvalidMesh : Error { using Error::Error; };

}  // namespace tetopt
