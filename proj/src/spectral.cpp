#include "tfcl/spectral.hpp"

#include <limits>
#include <stdexcept>

namespace tfcl {

EigenSystem sym_eig(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw std::invalid_argument("sym_eig: matrix must be square, N >= 1");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("sym_eig: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (A + A.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double truncated_eig_sum(const Eigen::MatrixXd& A, int k) {
  const int N = static_cast<int>(A.rows());
  if (k < 1 || k > N)
    throw std::invalid_argument("truncated_eig_sum: k out of range");
  return sym_eig(A).values.head(k).sum();
}

SpectralSolution u_update(const Eigen::MatrixXd& L, int k, double gap_tol) {
  const int N = static_cast<int>(L.rows());
  if (k < 1 || k >= N)
    throw std::invalid_argument("u_update: requires 1 <= k < N");
  if (gap_tol <= 0) throw std::invalid_argument("u_update: gap_tol must be > 0");
  if (L.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("u_update: zero matrix is degenerate");

  SpectralSolution sol;
  sol.eig = sym_eig(L);
  const Eigen::VectorXd& lam = sol.eig.values;  // 0-based: lam(i) = lambda_{i+1}

  // lambda_i and lambda_{i+1} count as tied when closer than this
  const double tie = gap_tol * (1.0 + std::abs(lam(k - 1)));
  // strict gap between one-based index i and i+1; sentinel lambda_0 = 0
  auto gap_after = [&](int i) {
    const double lo = (i == 0) ? 0.0 : lam(i - 1);
    const double hi = (i == N) ? std::numeric_limits<double>::infinity()
                               : lam(i);
    return hi - lo;
  };
  auto strict = [&](int i) { return gap_after(i) > tie; };

  int p = 0;
  for (int i = k - 1; i >= 1; --i)
    if (strict(i)) {
      p = i;
      break;
    }
  int q = k;
  while (q < N && !strict(q)) ++q;

  sol.p = p;
  sol.q = q;
  sol.breve_delta = std::min(gap_after(p), gap_after(q));

  sol.c = Eigen::VectorXd::Zero(N);
  const double frac = static_cast<double>(k - p) / static_cast<double>(q - p);
  for (int i = 0; i < N; ++i) {
    if (i < p)
      sol.c(i) = 1.0;
    else if (i < q)
      sol.c(i) = frac;
  }
  sol.U = sol.eig.vectors * sol.c.asDiagonal() * sol.eig.vectors.transpose();
  return sol;
}

}  // namespace tfcl
