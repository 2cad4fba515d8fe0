#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace curvwomb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable tag used by the CLI and the HTTP service.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define CURVWOMB_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(#Name, what) {}        \
    }

CURVWOMB_DEFINE_ERROR(UnsupportedSmoothness);
CURVWOMB_DEFINE_ERROR(SingularCovariance);
CURVWOMB_DEFINE_ERROR(ConfigError);
CURVWOMB_DEFINE_ERROR(EmptyCurve);
CURVWOMB_DEFINE_ERROR(DegenerateCurve);
CURVWOMB_DEFINE_ERROR(WrongFamily);
CURVWOMB_DEFINE_ERROR(EmptySamples);
CURVWOMB_DEFINE_ERROR(LengthMismatch);
CURVWOMB_DEFINE_ERROR(DuplicateLocation);
CURVWOMB_DEFINE_ERROR(Cancelled);

#undef CURVWOMB_DEFINE_ERROR

/// Parse failure in one of the text formats; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace curvwomb
