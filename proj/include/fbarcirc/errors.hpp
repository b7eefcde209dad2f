#pragma once

#include <stdexcept>
#include <string>

namespace fbarcirc {

/// Base class for every error raised by the library. `kind()` returns the
/// stable class name that the CLI prints on failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define FBARCIRC_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                            \
    public:                                                                \
        using Error::Error;                                                \
        const char* kind() const noexcept override { return #Name; }      \
    }

FBARCIRC_DEFINE_ERROR(InvalidArgument);
FBARCIRC_DEFINE_ERROR(FitDiverged);
FBARCIRC_DEFINE_ERROR(DegenerateData);
FBARCIRC_DEFINE_ERROR(ParseError);
FBARCIRC_DEFINE_ERROR(ConfigError);
FBARCIRC_DEFINE_ERROR(SingularStructure);
FBARCIRC_DEFINE_ERROR(NumericallySingular);
FBARCIRC_DEFINE_ERROR(StepTooLarge);
FBARCIRC_DEFINE_ERROR(Diverged);
FBARCIRC_DEFINE_ERROR(IllConditionedBasis);
FBARCIRC_DEFINE_ERROR(FrequencyOffGrid);
FBARCIRC_DEFINE_ERROR(Cancelled);

#undef FBARCIRC_DEFINE_ERROR

}  // namespace fbarcirc
