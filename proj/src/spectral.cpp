#include "roelab/spectral.hpp"

#include "roelab/geometry.hpp"

#include <lapacke.h>

namespace roelab::spectral {

namespace {

Eigensystem run_zheevr(const Eigen::MatrixXcd& a, bool vectors) {
  if (a.rows() != a.cols()) throw UsageError("eigendecomposition needs a square matrix");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigensystem es;
  if (n == 0) return es;
  Eigen::MatrixXcd work = a;
  es.values.resize(n);
  if (vectors) es.vectors.resize(n, n);
  Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> support(2 * n);
  lapack_int found = 0;
  lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'A', 'L', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n, 0.0, 0.0, 0, 0, 0.0, &found,
      es.values.data(), vectors ? reinterpret_cast<lapack_complex_double*>(es.vectors.data()) : nullptr,
      n, support.data());
  if (info != 0 || found != n)
    throw ComputationError("Hermitian eigensolver failed (info " + std::to_string(info) + ")");
  return es;
}

}  // namespace

Eigensystem eigh(const Eigen::MatrixXcd& a) { return run_zheevr(a, true); }

Eigen::VectorXd eigvalsh(const Eigen::MatrixXcd& a) { return run_zheevr(a, false).values; }

Eigen::MatrixXcd apply_function(const Eigensystem& es,
                                const std::function<std::complex<double>(double)>& f) {
  Eigen::VectorXcd fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(es.values[i]);
  Eigen::MatrixXcd scaled = es.vectors * fv.asDiagonal();
  Eigen::MatrixXcd out(es.vectors.rows(), es.vectors.rows());
  out.noalias() = scaled * es.vectors.adjoint();
  return out;
}

Eigen::MatrixXcd spectral_projection(const Eigensystem& es, double a, double b) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > a && es.values[i] < b) keep.push_back(i);
  Eigen::MatrixXcd v(es.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]);
  Eigen::MatrixXcd out(es.vectors.rows(), es.vectors.rows());
  out.noalias() = v * v.adjoint();
  return out;
}

Eigen::MatrixXcd sign_function(const Eigensystem& es, double fermi) {
  return apply_function(es, [fermi](double x) { return std::complex<double>(x < fermi ? -1.0 : 1.0); });
}

double operator_norm(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && a.isApprox(a.adjoint(), 1e-13)) {
    Eigen::VectorXd w = eigvalsh(a);
    return std::max(std::abs(w[0]), std::abs(w[w.size() - 1]));
  }
  Eigen::MatrixXcd g = a.adjoint() * a;
  Eigen::VectorXd w = eigvalsh(g);
  return std::sqrt(std::max(0.0, w[w.size() - 1]));
}

}  // namespace roelab::spectral
