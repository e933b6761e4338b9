#pragma once

#include <stdexcept>
#include <string>

namespace lsngc {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// core
struct ConstantSeries : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct RaggedRows : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct InvalidEnsemble : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// embedding
struct SeriesTooShort : Error { using Error::Error; };
struct BadIndex : Error { using Error::Error; };

// grbf
struct TooFewPoints : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// causality
struct ShapeMismatch : Error { using Error::Error; };
struct DegenerateSystem : Error { using Error::Error; };
struct BadDegreesOfFreedom : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// baselines
struct BadConfig : Error { using Error::Error; };

// simulate
struct DivergedTrajectory : Error { using Error::Error; };

// evaluate
struct DegenerateTruth : Error { using Error::Error; };

} // namespace lsngc
