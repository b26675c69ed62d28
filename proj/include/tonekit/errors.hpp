#pragma once

#include <stdexcept>
#include <string>

namespace tonekit {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// No pixel survived hair + lesion masking; the sample is unusable.
class EmptySkinRegion : public Error {
public:
    explicit EmptySkinRegion(const std::string& msg = "no skin pixels after masking") : Error(msg) {}
};

/// An operation requiring at least one value received none.
class EmptySample : public Error {
public:
    explicit EmptySample(const std::string& msg = "empty sample") : Error(msg) {}
};

/// Two distributions with different binnings were combined.
class MixedBinning : public Error {
public:
    explicit MixedBinning(const std::string& msg = "binnings do not match") : Error(msg) {}
};

/// KDE fitted on an empty support set.
class EmptySupport : public Error {
public:
    explicit EmptySupport(const std::string& msg = "KDE support is empty") : Error(msg) {}
};

/// Container lengths disagree.
class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& msg = "shape mismatch") : Error(msg) {}
};

/// A prediction vector does not sum to one.
class NonDistributionPrediction : public Error {
public:
    explicit NonDistributionPrediction(const std::string& msg = "prediction is not a distribution")
        : Error(msg) {}
};

/// Bin edges requested over a zero-width value range.
class DegenerateRange : public Error {
public:
    explicit DegenerateRange(const std::string& msg = "degenerate value range") : Error(msg) {}
};

/// Fewer than two usable bins for a correlation.
class TooFewBins : public Error {
public:
    explicit TooFewBins(const std::string& msg = "need at least two non-empty bins") : Error(msg) {}
};

/// A synthetic dataset spec failed validation.
class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& msg) : Error(msg) {}
};

/// An input file failed schema validation; message carries the line number.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

} // namespace tonekit
