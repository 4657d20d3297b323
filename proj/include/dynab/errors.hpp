#pragma once

#include <stdexcept>
#include <string>

namespace dynab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CoverageGap : Error { using Error::Error; };
struct NotCovered : Error { using Error::Error; };
struct EmptyRegion : Error { using Error::Error; };
struct Divergence : Error { using Error::Error; };
struct NotContractive : Error { using Error::Error; };
struct OrderViolation : Error { using Error::Error; };
struct TooManyUnresolved : Error { using Error::Error; };
struct LevelSetEmpty : Error { using Error::Error; };
struct NotOverApproximation : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct UnsupportedDimension : Error { using Error::Error; };

}  // namespace dynab
