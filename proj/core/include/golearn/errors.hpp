#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace golearn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define GOLEARN_DEFINE_ERROR(Name)          \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

GOLEARN_DEFINE_ERROR(DimMismatch);
GOLEARN_DEFINE_ERROR(ConfigError);
GOLEARN_DEFINE_ERROR(InsufficientChain);
GOLEARN_DEFINE_ERROR(SpecMismatch);
GOLEARN_DEFINE_ERROR(MissingNoise);
GOLEARN_DEFINE_ERROR(UnnormalizedDensity);
GOLEARN_DEFINE_ERROR(NegativeInput);
GOLEARN_DEFINE_ERROR(SingularSystem);
GOLEARN_DEFINE_ERROR(BoundaryTooClose);
GOLEARN_DEFINE_ERROR(ZeroMass);
GOLEARN_DEFINE_ERROR(EmptyDataset);
GOLEARN_DEFINE_ERROR(StalePathError);
GOLEARN_DEFINE_ERROR(DivergedLoss);
GOLEARN_DEFINE_ERROR(IoError);

#undef GOLEARN_DEFINE_ERROR

/// Drift evaluated to NaN/Inf. `index` is the step (or path) at which it happened.
class NonFiniteDrift : public Error {
public:
    explicit NonFiniteDrift(std::size_t index, const std::string& where = "step")
        : Error("non-finite drift at " + where + " " + std::to_string(index)), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace golearn
