#pragma once

#include <stdexcept>
#include <string>

namespace crt {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A stratum-arm cell required by a formula contains no clusters.
struct EmptyCell : Error {
    using Error::Error;
};

// A stratum label was requested that the sample does not know about.
struct UnknownStratum : Error {
    using Error::Error;
};

// One of the treatment arms contains no clusters.
struct EmptyArm : Error {
    using Error::Error;
};

// The total cluster size in one arm is zero, so size weights are undefined.
struct ZeroSizeArm : Error {
    using Error::Error;
};

// A variance estimate came out negative; refusing to build intervals from it.
struct DegenerateVariance : Error {
    using Error::Error;
};

// Subsample size outside [1, N].
struct BadSubsampleSize : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of the function.
struct DomainError : Error {
    using Error::Error;
};

// A regression design matrix does not have full column rank.
struct RankDeficient : Error {
    using Error::Error;
};

// An enumeration was asked for more states than the guard allows.
struct TooLarge : Error {
    using Error::Error;
};

}  // namespace crt
