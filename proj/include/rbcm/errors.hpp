#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rbcm {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// SPD factorization hit a non-positive pivot.
class FactorizationFailure : public Error {
public:
    FactorizationFailure(std::size_t pivot_index, double pivot_value)
        : Error("matrix is not positive definite: pivot " + std::to_string(pivot_index) +
                " = " + std::to_string(pivot_value)),
          pivot_index(pivot_index),
          pivot_value(pivot_value) {}

    std::size_t pivot_index;
    double pivot_value;
};

// An iterative solver ran out of iterations. Carries the last iterate so the
// caller can decide whether the partial result is still usable.
class NonConvergence : public Error {
public:
    NonConvergence(std::string what, std::vector<double> last_iterate, std::size_t iterations)
        : Error(std::move(what)), last_iterate(std::move(last_iterate)), iterations(iterations) {}

    std::vector<double> last_iterate;
    std::size_t iterations;
};

class ZeroColumn : public Error {
public:
    explicit ZeroColumn(std::size_t index)
        : Error("column " + std::to_string(index) + " has (near-)zero norm"), index(index) {}

    std::size_t index;
};

class RankDeficientClass : public Error {
public:
    RankDeficientClass(std::size_t class_index, double condition_estimate)
        : Error("class " + std::to_string(class_index) +
                " has numerically singular Gram matrix (condition estimate " +
                std::to_string(condition_estimate) + ")"),
          class_index(class_index),
          condition_estimate(condition_estimate) {}

    std::size_t class_index;
    double condition_estimate;
};

class AllClassesDegenerate : public Error {
public:
    AllClassesDegenerate() : Error("every class slice of the coefficient vector is numerically zero") {}
};

class ZeroFusion : public Error {
public:
    ZeroFusion() : Error("fused coefficient vector has (near-)zero norm") {}
};

class ZeroCoefficientVector : public Error {
public:
    ZeroCoefficientVector() : Error("coefficient vector has (near-)zero l1 norm") {}
};

class EmptyRecordSet : public Error {
public:
    EmptyRecordSet() : Error("prediction record set is empty") {}
};

class MismatchedRecords : public Error {
public:
    explicit MismatchedRecords(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where + ": " + what), where(where) {}

    std::string where;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class EmptyClass : public Error {
public:
    explicit EmptyClass(std::size_t class_index)
        : Error("class " + std::to_string(class_index) + " has no samples"), class_index(class_index) {}

    std::size_t class_index;
};

class ClassTooSmall : public Error {
public:
    ClassTooSmall(std::size_t class_index, std::size_t size, std::size_t k)
        : Error("class " + std::to_string(class_index) + " has " + std::to_string(size) +
                " samples, cannot take " + std::to_string(k) + " for training and leave a test set"),
          class_index(class_index),
          size(size),
          k(k) {}

    std::size_t class_index;
    std::size_t size;
    std::size_t k;
};

// Non-fatal diagnostics (e.g. a test vector that was not unit norm) go through
// this hook. Replaceable so embedders and tests can capture or silence them.
inline std::function<void(const std::string&)>& warning_handler() {
    static std::function<void(const std::string&)> handler = [](const std::string& msg) {
        std::cerr << "rbcm: warning: " << msg << '\n';
    };
    return handler;
}

inline void warn(const std::string& msg) {
    if (warning_handler()) warning_handler()(msg);
}

}  // namespace rbcm
