#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsense {

/// Broad failure class, mapped onto CLI exit codes by the front end.
enum class ErrorKind { input, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(what), kind_(kind), name_(std::move(name)) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Short error class name, e.g. "DegenerateState".
    const std::string& name() const noexcept { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what)
        : Error(ErrorKind::input, "InvalidInput", what) {}
};

/// A violated scenario invariant. `field` is the offending config key.
struct ValidationError : Error {
    ValidationError(std::string field, const std::string& constraint)
        : Error(ErrorKind::input, "ValidationError", field + ": " + constraint),
          field(std::move(field)) {}
    std::string field;
};

struct InvalidParameter : Error {
    explicit InvalidParameter(const std::string& what)
        : Error(ErrorKind::input, "InvalidParameter", what) {}
};

struct SingularMatrix : Error {
    SingularMatrix(std::size_t pivot, const std::string& what)
        : Error(ErrorKind::numerical, "SingularMatrix", what), pivot(pivot) {}
    std::size_t pivot;
};

struct DegenerateState : Error {
    explicit DegenerateState(const std::string& what)
        : Error(ErrorKind::numerical, "DegenerateState", what) {}
};

struct CapExceeded : Error {
    explicit CapExceeded(const std::string& what)
        : Error(ErrorKind::input, "CapExceeded", what) {}
};

struct UnidentifiableParameter : Error {
    explicit UnidentifiableParameter(const std::string& what)
        : Error(ErrorKind::numerical, "UnidentifiableParameter", what) {}
};

struct NotProductState : Error {
    explicit NotProductState(const std::string& what)
        : Error(ErrorKind::numerical, "NotProductState", what) {}
};

struct SingularFormula : Error {
    SingularFormula(std::string formula, const std::string& what)
        : Error(ErrorKind::numerical, "SingularFormula", formula + ": " + what),
          formula(std::move(formula)) {}
    std::string formula;
};

} // namespace qsense
