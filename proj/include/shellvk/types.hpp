#ifndef SHELLVK_TYPES_HPP
#define SHELLVK_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shellvk {

using Real = double;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<Real>;
using Triplet = Eigen::Triplet<Real>;

using Index = std::int64_t;

/// Error categories used by the exit-code contract of the CLI
/// (0 success, 1 config, 2 solver, 3 acceptance check).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};
struct StateError : std::runtime_error {
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DiagnosticsError : std::runtime_error {
    explicit DiagnosticsError(const std::string& msg) : std::runtime_error(msg) {}
};

inline Mat3 sym(const Mat3& m) { return 0.5 * (m + m.transpose()); }
inline Mat3 skw(const Mat3& m) { return 0.5 * (m - m.transpose()); }
inline Mat2 sym2(const Mat2& m) { return 0.5 * (m + m.transpose()); }

/// Frobenius inner product A:B = tr(A^T B).
inline Real ddot(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }
inline Real ddot2(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

} // namespace shellvk

#endif
