#ifndef SBFEM_COMMON_HPP
#define SBFEM_COMMON_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sbfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Error categories used across the library.  Configuration errors come from
// bad user input, geometry errors from inconsistent meshes/interfaces,
// solver errors from failed linear solves, and internal errors indicate a
// bug (e.g. a matrix that must be vertex-block-diagonal is not).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error("config error: " + m) {}
};
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& m) : std::runtime_error("geometry error: " + m) {}
};
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& m) : std::runtime_error("solver error: " + m) {}
};
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& m) : std::logic_error("internal error: " + m) {}
};

}  // namespace sbfem

#endif  // SBFEM_COMMON_HPP
