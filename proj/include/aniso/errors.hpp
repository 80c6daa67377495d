#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

// Base for every recoverable failure raised by the library. The CLI maps the
// concrete types to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class MeshMismatchError : public Error {
public:
    MeshMismatchError() : Error("fields live on different meshes") {}
};

class ConvexityError : public Error {
public:
    ConvexityError(const std::string& what, double min_eigenvalue)
        : Error(what), min_eigenvalue(min_eigenvalue) {}
    double min_eigenvalue;
};

class PositivityError : public Error {
public:
    PositivityError(const std::string& what, double min_value) : Error(what), min_value(min_value) {}
    double min_value;
};

// Carries the offending vertex indices so callers can report diagnostics.
class SingularCurvatureError : public Error {
public:
    SingularCurvatureError(const std::string& what, std::vector<int> vertices)
        : Error(what), vertices(std::move(vertices)) {}
    std::vector<int> vertices;
};

class DegenerateError : public Error {
public:
    using Error::Error;
};

class InfiniteRadiusError : public Error {
public:
    InfiniteRadiusError(const std::string& what, std::vector<int> samples = {})
        : Error(what), samples(std::move(samples)) {}
    std::vector<int> samples;
};

class OrientationError : public Error {
public:
    using Error::Error;
};

class NonConvexInputError : public Error {
public:
    using Error::Error;
};

class NotSpacelikeError : public Error {
public:
    NotSpacelikeError(const std::string& what, double margin) : Error(what), margin(margin) {}
    double margin;
};

class EmptyLevelSetError : public Error {
public:
    using Error::Error;
};

class GridTooSmallError : public Error {
public:
    using Error::Error;
};

class CFLViolationError : public Error {
public:
    CFLViolationError(const std::string& what, double dt, double dt_max)
        : Error(what), dt(dt), dt_max(dt_max) {}
    double dt;
    double dt_max;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual) : Error(what), residual(residual) {}
    double residual;
};

} // namespace aniso
