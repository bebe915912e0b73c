#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critfield/covariance.hpp"
#include "critfield/types.hpp"

namespace critfield {

/// Zero-mean Gaussian vector described by a labeled covariance matrix.
struct GaussianSpec {
  std::vector<std::string> labels;
  Eigen::MatrixXd cov;

  int size() const { return static_cast<int>(cov.rows()); }
  /// Sub-vector on the given positions.
  GaussianSpec select(const std::vector<int>& idx) const;
  /// Indices whose label starts with the prefix.
  std::vector<int> find(const std::string& prefix) const;
};

/// Symmetrizes and clips eigenvalues in [-1e-10 scale, 0) to zero; anything
/// more negative raises ErrorCode::not_psd. Scale is the largest |diagonal|.
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& cov);

/// Symmetric square root factor L with L L^T = cov (after PSD repair).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

/// Conditional covariance of X2 given X1 = 0:
///   sigma22 - sigma21 sigma11^{-1} sigma12.
/// sigma21 is cov[X2, X1]. Raises ErrorCode::degenerate when the smallest
/// eigenvalue of sigma11 is below 1e-12 times its scale.
Eigen::MatrixXd regression_covariance(const Eigen::MatrixXd& sigma22, const Eigen::MatrixXd& sigma21,
                                      const Eigen::MatrixXd& sigma11);

/// Number of independent entries m(m+1)/2 of a symmetric m x m matrix; they
/// are ordered (0,0), (0,1), ..., (0,m-1), (1,1), ...
inline int sym_size(int m) { return m * (m + 1) / 2; }
Mat unpack_symmetric(const double* entries, int m);

/// Monte Carlo means of several determinant functionals sharing the same
/// standard-normal draws. Functional j draws x = factors[j] z and evaluates
/// prod_p |det H_p(x)| over the `blocks` consecutive symmetric matrices packed
/// in x. Batches of 2048 draws use streams (seed, batch) and are reduced in
/// batch order, so results do not depend on the thread count.
struct DetMonteCarlo {
  Eigen::VectorXd mean;
  Eigen::MatrixXd mean_cov;  ///< covariance of the sample means
  long samples = 0;

  Estimate estimate(int j, const std::string& method) const;
  /// a . mean with its propagated standard error.
  Estimate combination(const Eigen::VectorXd& a, const std::string& method) const;
};

DetMonteCarlo abs_det_monte_carlo(const std::vector<Eigen::MatrixXd>& factors, int m, int blocks,
                                  long n, std::uint64_t seed);

/// E|det H| for a Gaussian symmetric matrix whose m(m+1)/2 entries have the
/// given covariance.
Estimate expected_abs_det(const Eigen::MatrixXd& cov_hessian, int m, long n_mc, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Jets of a stationary field with covariance kernel K.

/// d^alpha Phi at point `point` (0 at the origin, 1 at the separation z).
struct JetLabel {
  int point = 0;
  MultiIndex alpha;
  std::string name() const;
};

std::vector<JetLabel> gradient_labels(int m, int point);
std::vector<JetLabel> hessian_labels(int m, int point);
/// Value, gradient and (for k = 2) Hessian entries.
std::vector<JetLabel> jet_labels(int m, int k, int point);

/// Covariance of the labeled derivatives:
///   cov(d^a Phi(x_p), d^b Phi(x_q)) = (-1)^{|a|} d^{a+b} K(x_q - x_p)
/// with x_0 = 0 and x_1 = z. Kernel values at -z are obtained from +z by
/// parity, so swapping the points permutes the matrix exactly. Single source
/// for every covariance assembled in the library.
GaussianSpec jet_covariance(const KernelSource& kernel, const Vec& z, const std::vector<JetLabel>& labels);

/// True when z is lexicographically positive (first nonzero coordinate > 0).
bool lex_positive(const Vec& z);

}  // namespace critfield
