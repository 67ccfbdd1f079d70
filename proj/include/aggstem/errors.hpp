#ifndef AGGSTEM_ERRORS_HPP
#define AGGSTEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aggstem {

// Error hierarchy shared by all modules. Each condition the pipeline can
// signal gets its own type so callers can react per condition.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidParams : Error { using Error::Error; };

// Geometry: log denominator of the fractal-dimension formula vanishes.
struct DegenerateGeometry : Error { using Error::Error; };

// Aggregation: the target fractal dimension cannot be met for a pair
// (negative radicand in the placement-distance formula).
struct InfeasiblePlacement : Error { using Error::Error; };

// Aggregation: position rejection budget exhausted for one attachment.
struct PlacementExhausted : Error { using Error::Error; };

// Aggregation: restart budget exhausted; no valid aggregate produced.
struct GenerationFailed : Error { using Error::Error; };

struct LabelAbsent : Error { using Error::Error; };

// Rendering: a particle (plus blur margin) leaves the image grid.
struct FieldOfViewOverflow : Error { using Error::Error; };

struct ConstantImage : Error { using Error::Error; };
struct ConstantTruth : Error { using Error::Error; };
struct SplitInfeasible : Error { using Error::Error; };
struct InsufficientEntries : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

} // namespace aggstem

#endif
