#include "tfcl/bipartite.hpp"

#include <numeric>
#include <stdexcept>

namespace tfcl {

BipartiteLaplacian build_laplacian(const TaskMatrix& W) {
  if (W.rows() < 1 || W.cols() < 1)
    throw std::invalid_argument("build_laplacian: empty weight matrix");
  if (!W.allFinite())
    throw std::invalid_argument("build_laplacian: non-finite entries in W");

  const int d = static_cast<int>(W.rows());
  const int T = static_cast<int>(W.cols());
  const int N = d + T;
  const Eigen::MatrixXd absW = W.cwiseAbs();

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
  L.block(0, d, d, T) = -absW;
  L.block(d, 0, T, d) = -absW.transpose();
  // diag(A*1): row sums of the affinity
  for (int i = 0; i < d; ++i) L(i, i) = absW.row(i).sum();
  for (int j = 0; j < T; ++j) L(d + j, d + j) = absW.col(j).sum();

  return {std::move(L), d, T};
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& U, int d, int T) {
  if (U.rows() != U.cols() || U.rows() != d + T)
    throw std::invalid_argument("distance_matrix: dimension mismatch");

  Eigen::MatrixXd D(d, T);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < T; ++j) {
      const double v = U(i, i) + U(d + j, d + j) - 2.0 * U(i, d + j);
      if (v < -1e-10)
        throw std::invalid_argument(
            "distance_matrix: negative squared distance beyond tolerance");
      D(i, j) = v < 0 ? 0.0 : v;
    }
  return D;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

Grouping connected_components(const TaskMatrix& W, double threshold) {
  if (threshold < 0)
    throw std::invalid_argument("connected_components: negative threshold");

  const int d = static_cast<int>(W.rows());
  const int T = static_cast<int>(W.cols());
  UnionFind uf(d + T);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < T; ++j)
      if (std::abs(W(i, j)) > threshold) uf.unite(i, d + j);

  Grouping g;
  g.labels.assign(d + T, -1);
  for (int v = 0; v < d + T; ++v) {
    const int root = uf.find(v);
    if (g.labels[root] < 0) g.labels[root] = g.count++;
    g.labels[v] = g.labels[root];
  }
  return g;
}

std::vector<Eigen::VectorXd> embeddings(const Eigen::MatrixXd& V) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(V.rows());
  for (int i = 0; i < V.rows(); ++i) rows.push_back(V.row(i).transpose());
  return rows;
}

double default_support_threshold(const TaskMatrix& W) {
  return W.size() == 0 ? 0.0 : 1e-8 * W.cwiseAbs().maxCoeff();
}

}  // namespace tfcl
