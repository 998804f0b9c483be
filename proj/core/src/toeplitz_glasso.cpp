#include "cier/toeplitz_glasso.hpp"

#include "cier/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace cier::ticc {

namespace {

// Calls fn(entries) once per group of tied entries. Each group lists
// (row, col) index pairs; symmetric duplicates of diagonal entries are
// listed once.
template <typename Fn>
void for_each_toeplitz_group(Eigen::Index dim, Eigen::Index block, Fn&& fn) {
  const Eigen::Index w = dim / block;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> group;
  for (Eigen::Index o = 0; o < w; ++o) {
    for (Eigen::Index p = 0; p < block; ++p) {
      for (Eigen::Index q = (o == 0 ? p : 0); q < block; ++q) {
        group.clear();
        for (Eigen::Index i = 0; i + o < w; ++i) {
          const Eigen::Index r = i * block + p;
          const Eigen::Index c = (i + o) * block + q;
          group.emplace_back(r, c);
          if (r != c) group.emplace_back(c, r);
        }
        fn(group);
      }
    }
  }
}

void check_shape(const Eigen::MatrixXd& m, Eigen::Index block) {
  if (block < 1 || m.rows() != m.cols() || m.rows() % block != 0) {
    fail(Errc::ShapeError, "matrix of size " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                               " is not block-square with block " + std::to_string(block));
  }
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

Eigen::MatrixXd project_block_toeplitz(const Eigen::MatrixXd& m, Eigen::Index block) {
  check_shape(m, block);
  Eigen::MatrixXd out(m.rows(), m.cols());
  for_each_toeplitz_group(m.rows(), block, [&](const auto& group) {
    double sum = 0.0;
    for (auto [r, c] : group) sum += m(r, c);
    const double avg = sum / static_cast<double>(group.size());
    for (auto [r, c] : group) out(r, c) = avg;
  });
  return out;
}

double toeplitz_deviation(const Eigen::MatrixXd& m, Eigen::Index block) {
  check_shape(m, block);
  double worst = 0.0;
  for_each_toeplitz_group(m.rows(), block, [&](const auto& group) {
    const double ref = m(group.front().first, group.front().second);
    for (auto [r, c] : group) worst = std::max(worst, std::abs(m(r, c) - ref));
  });
  return worst;
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

GlassoResult solve_toeplitz_glasso(const Eigen::MatrixXd& empirical_cov, Eigen::Index block, double lambda,
                                   const AdmmOptions& options) {
  check_shape(empirical_cov, block);
  if (lambda < 0.0) fail(Errc::InvalidParams, "lambda must be >= 0");
  const Eigen::Index p = empirical_cov.rows();
  const Eigen::MatrixXd& S = empirical_cov;

  double rho = options.rho;
  Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd z = theta;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);

  GlassoResult result;
  const double scale = static_cast<double>(p);
  for (int it = 0; it < options.max_iters; ++it) {
    // Theta-step: closed form through the eigendecomposition of rho(Z - U) - S.
    Eigen::MatrixXd a = rho * (z - u) - S;
    a = 0.5 * (a + a.transpose());
    eig.compute(a);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    Eigen::VectorXd d(p);
    for (Eigen::Index i = 0; i < p; ++i) d[i] = (ev[i] + std::sqrt(ev[i] * ev[i] + 4.0 * rho)) / (2.0 * rho);
    theta = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();

    // Z-step: group average then soft-threshold.
    const Eigen::MatrixXd z_old = z;
    const Eigen::MatrixXd v = theta + u;
    const double t = lambda / rho;
    for_each_toeplitz_group(p, block, [&](const auto& group) {
      double sum = 0.0;
      for (auto [r, c] : group) sum += v(r, c);
      const double val = soft_threshold(sum / static_cast<double>(group.size()), t);
      for (auto [r, c] : group) z(r, c) = val;
    });

    u += theta - z;

    const double primal = (theta - z).norm();
    const double dual = rho * (z - z_old).norm();
    result.iterations = it + 1;
    const double eps_primal = options.tol * (scale + std::max(theta.norm(), z.norm()));
    const double eps_dual = options.tol * (scale + rho * u.norm());
    if (primal < eps_primal && dual < eps_dual) {
      result.converged = true;
      break;
    }
    // Residual balancing; U is the scaled dual and must be rescaled with rho.
    if (primal > 10.0 * dual) {
      rho *= 2.0;
      u /= 2.0;
    } else if (dual > 10.0 * primal) {
      rho /= 2.0;
      u *= 2.0;
    }
  }

  // Z carries the exact Toeplitz/sparsity structure; ridge it into PD if the
  // last iterate is not quite there.
  result.precision = z;
  double ridge = options.ridge;
  while (!is_positive_definite(result.precision)) {
    if (!std::isfinite(ridge) || ridge > 1e12) fail(Errc::NotPositiveDefinite, "ridge repair failed");
    result.precision = z + (result.ridge_added + ridge) * Eigen::MatrixXd::Identity(p, p);
    result.ridge_added += ridge;
    ridge *= 2.0;
  }
  if (result.ridge_added > 0.0) {
    result.precision = z + result.ridge_added * Eigen::MatrixXd::Identity(p, p);
  }
  return result;
}

}  // namespace cier::ticc
