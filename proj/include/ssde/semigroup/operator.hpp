#pragma once

#include <Eigen/Sparse>
#include <span>
#include <string>

#include <json.hpp>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/grid.hpp"

namespace ssde::semigroup {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Rows whose stencil breaks the M-matrix sign pattern.
struct AssemblyAudit {
  std::size_t rows = 0;
  std::size_t violating_rows = 0;     // some off-diagonal entry > 0
  std::size_t dominance_failures = 0;  // diagonal < sum |off-diagonal|
  double violation_rate = 0.0;
  double max_positive_offdiag = 0.0;
};

/// Lambda_h = -a : D^2_h + b . D_h on a Dirichlet box.
///
/// Diagonal second derivatives use the 3-point stencil. Each mixed
/// derivative a_ij d_i d_j uses the one of the two 7-point cross stencils
/// whose diagonal neighbours carry the sign of a_ij, so the off-diagonal
/// entries stay nonpositive whenever a is diagonally dominant. The drift is
/// upwinded: backward differences where b_i > 0, forward where b_i < 0.
class DiscreteOperator {
 public:
  DiscreteOperator(Grid grid, SparseMatrix matrix, AssemblyAudit audit, std::string drift_kind,
                   std::string matrix_kind);

  const Grid& grid() const noexcept { return grid_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const AssemblyAudit& audit() const noexcept { return audit_; }
  const std::string& drift_kind() const noexcept { return drift_kind_; }
  const std::string& matrix_kind() const noexcept { return matrix_kind_; }

  /// y = Lambda_h u.
  void apply(std::span<const double> u, std::span<double> y) const;
  /// y = Lambda_h^T u.
  void apply_transpose(std::span<const double> u, std::span<double> y) const;

 private:
  Grid grid_;
  SparseMatrix matrix_;
  AssemblyAudit audit_;
  std::string drift_kind_;
  std::string matrix_kind_;
};

/// Samples a and b on the nodes and assembles Lambda_h. SingularOnGrid when
/// a node hits a singular point; NonPSDMatrix when a node value of a is not
/// positive semidefinite.
DiscreteOperator assemble_operator(const coefficients::DispersionSpec& a, const coefficients::FieldSpec& drift,
                                   const Grid& grid);

nlohmann::json to_json(const AssemblyAudit& a);

}  // namespace ssde::semigroup
