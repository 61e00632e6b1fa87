#pragma once

#include <stdexcept>
#include <string>

namespace cfx {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerics
struct DimensionMismatch : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// model / data handling
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct UnsupportedFamily : Error { using Error::Error; };
struct EvaluationError : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };

// engine / solvers
struct InvalidTarget : Error { using Error::Error; };
struct NoPrototypeForTarget : Error { using Error::Error; };
struct SubproblemFailure : Error { using Error::Error; };

// trees
struct InconsistentPath : Error { using Error::Error; };
struct NoSuchPrediction : Error { using Error::Error; };

}  // namespace cfx
