#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace roelab::spectral {

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

/// Dense Hermitian eigendecomposition (LAPACK zheevr). Only the lower triangle is read.
Eigensystem eigh(const Eigen::MatrixXcd& a);
Eigen::VectorXd eigvalsh(const Eigen::MatrixXcd& a);

/// V f(D) V^* for a real-argument function of the eigenvalues.
Eigen::MatrixXcd apply_function(const Eigensystem& es,
                                const std::function<std::complex<double>(double)>& f);

/// Projection onto eigenvectors with eigenvalue in the open interval (a, b).
Eigen::MatrixXcd spectral_projection(const Eigensystem& es, double a, double b);

/// sgn(H) = 1 - 2 P(-inf, fermi).
Eigen::MatrixXcd sign_function(const Eigensystem& es, double fermi = 0.0);

/// Largest singular value (operator 2-norm).
double operator_norm(const Eigen::MatrixXcd& a);

}  // namespace roelab::spectral
