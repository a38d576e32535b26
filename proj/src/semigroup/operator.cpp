#include "ssde/semigroup/operator.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"

namespace ssde::semigroup {

DiscreteOperator::DiscreteOperator(Grid grid, SparseMatrix matrix, AssemblyAudit audit, std::string drift_kind,
                                   std::string matrix_kind)
    : grid_(grid),
      matrix_(std::move(matrix)),
      audit_(audit),
      drift_kind_(std::move(drift_kind)),
      matrix_kind_(std::move(matrix_kind)) {}

void DiscreteOperator::apply(std::span<const double> u, std::span<double> y) const {
  Eigen::Map<const Eigen::VectorXd> U(u.data(), static_cast<Eigen::Index>(u.size()));
  Eigen::Map<Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(y.size()));
  Y.noalias() = matrix_ * U;
}

void DiscreteOperator::apply_transpose(std::span<const double> u, std::span<double> y) const {
  Eigen::Map<const Eigen::VectorXd> U(u.data(), static_cast<Eigen::Index>(u.size()));
  Eigen::Map<Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(y.size()));
  Y.noalias() = matrix_.transpose() * U;
}

namespace {

struct RowEntries {
  // offsets in {-1,0,1}^3 -> 27 slots, index (di+1)*9 + (dj+1)*3 + (dk+1)
  std::array<double, 27> w{};
  void add(int di, int dj, int dk, double v) { w[(di + 1) * 9 + (dj + 1) * 3 + (dk + 1)] += v; }
};

}  // namespace

DiscreteOperator assemble_operator(const coefficients::DispersionSpec& a, const coefficients::FieldSpec& drift,
                                   const Grid& grid) {
  if (a.dimension() != 3 || drift.dimension() != 3) throw Error(ErrorKind::DimensionMismatch, "operator is 3-D");
  const double h = grid.spacing();
  const double ih2 = 1.0 / (h * h), ih = 1.0 / h;
  const std::size_t N = grid.size();

  std::vector<RowEntries> rows(N);
  parallel_for(0, N, [&](std::size_t p) {
    const Vec3 x = grid.point(p);
    std::array<double, 9> A;
    std::array<double, 3> b;
    try {
      a.a(x, A);
      drift.eval(x, b);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularPoint) throw Error(ErrorKind::SingularOnGrid, "coefficient singular on a node");
      throw;
    }
    if (coefficients::min_eigenvalue(A, 3) < -1e-12) {
      throw Error(ErrorKind::NonPSDMatrix, "diffusion matrix not positive semidefinite on a node");
    }
    for (double v : b)
      if (!std::isfinite(v)) throw Error(ErrorKind::SingularOnGrid, "drift not finite on a node");
    RowEntries& R = rows[p];
    auto off = [](int axis, int s) {
      std::array<int, 3> o{0, 0, 0};
      o[axis] = s;
      return o;
    };
    for (int i = 0; i < 3; ++i) {
      const double aii = A[i * 3 + i];
      const auto op = off(i, 1), om = off(i, -1);
      R.add(0, 0, 0, 2.0 * aii * ih2);
      R.add(op[0], op[1], op[2], -aii * ih2);
      R.add(om[0], om[1], om[2], -aii * ih2);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double aij = 0.5 * (A[i * 3 + j] + A[j * 3 + i]);
        if (aij == 0.0) continue;
        // -2 a_ij d_i d_j u
        const double c = std::abs(aij) * ih2;
        const int s = aij > 0 ? 1 : -1;
        std::array<int, 3> pp{0, 0, 0}, mm{0, 0, 0};
        pp[i] = 1;
        pp[j] = s;
        mm[i] = -1;
        mm[j] = -s;
        R.add(0, 0, 0, -2.0 * c);
        R.add(pp[0], pp[1], pp[2], -c);
        R.add(mm[0], mm[1], mm[2], -c);
        for (int ax : {i, j})
          for (int sg : {1, -1}) {
            const auto o = off(ax, sg);
            R.add(o[0], o[1], o[2], c);
          }
      }
    for (int i = 0; i < 3; ++i) {
      if (b[i] > 0.0) {
        const auto o = off(i, -1);
        R.add(0, 0, 0, b[i] * ih);
        R.add(o[0], o[1], o[2], -b[i] * ih);
      } else if (b[i] < 0.0) {
        const auto o = off(i, 1);
        R.add(0, 0, 0, -b[i] * ih);
        R.add(o[0], o[1], o[2], b[i] * ih);
      }
    }
  });

  AssemblyAudit audit;
  audit.rows = N;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(N * 19);
  for (std::size_t p = 0; p < N; ++p) {
    const auto [i, j, k] = grid.unflatten(p);
    const RowEntries& R = rows[p];
    bool violates = false;
    double offsum = 0.0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          const double w = R.w[(di + 1) * 9 + (dj + 1) * 3 + (dk + 1)];
          if (w == 0.0) continue;
          const bool centre = di == 0 && dj == 0 && dk == 0;
          if (!centre) {
            if (w > 1e-14 * ih2) {
              violates = true;
              audit.max_positive_offdiag = std::max(audit.max_positive_offdiag, w);
            }
            offsum += std::abs(w);
          }
          // neighbours outside the box carry zero Dirichlet values
          if (!grid.inside(i + di, j + dj, k + dk)) continue;
          triplets.emplace_back(static_cast<int>(p), static_cast<int>(grid.index(i + di, j + dj, k + dk)), w);
        }
    if (violates) ++audit.violating_rows;
    if (R.w[13] < offsum * (1.0 - 1e-12)) ++audit.dominance_failures;
  }
  audit.violation_rate = N ? static_cast<double>(audit.violating_rows) / N : 0.0;
  SparseMatrix L(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return DiscreteOperator(grid, std::move(L), audit, drift.kind_name(), a.kind_name());
}

nlohmann::json to_json(const AssemblyAudit& a) {
  return {{"rows", a.rows},
          {"violating_rows", a.violating_rows},
          {"dominance_failures", a.dominance_failures},
          {"violation_rate", a.violation_rate},
          {"max_positive_offdiag", a.max_positive_offdiag}};
}

}  // namespace ssde::semigroup
