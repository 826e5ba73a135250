#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fsmpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& where)
        : Error("dimension mismatch in " + where) {}
};

inline void require_dims(bool ok, const char* where) {
    if (!ok) throw DimensionMismatch(where);
}

} // namespace fsmpc
