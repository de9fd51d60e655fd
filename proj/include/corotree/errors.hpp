#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace corotree {

// Error categories map onto CLI exit codes: validation -> 1, io -> 2, internal -> 3.
enum class ErrorKind { validation = 1, io = 2, internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

#define COROTREE_DEFINE_ERROR(Name, Kind)                                     \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message)                             \
            : Error(ErrorKind::Kind, std::string(#Name ": ") + message) {}    \
    }

COROTREE_DEFINE_ERROR(ParseError, validation);
COROTREE_DEFINE_ERROR(ValidationError, validation);
COROTREE_DEFINE_ERROR(GeometryError, validation);
COROTREE_DEFINE_ERROR(TooShortError, validation);
COROTREE_DEFINE_ERROR(NoBifurcationError, validation);
COROTREE_DEFINE_ERROR(OutOfVolumeError, validation);
COROTREE_DEFINE_ERROR(NoSegmentsError, validation);
COROTREE_DEFINE_ERROR(NoModelsError, validation);
COROTREE_DEFINE_ERROR(UndefinedMetricError, validation);
COROTREE_DEFINE_ERROR(SpecError, validation);
COROTREE_DEFINE_ERROR(IoError, io);
COROTREE_DEFINE_ERROR(InternalError, internal);

#undef COROTREE_DEFINE_ERROR

}  // namespace corotree
