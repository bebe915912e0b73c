#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critfield/amplitude.hpp"
#include "critfield/covariance.hpp"
#include "critfield/gaussian.hpp"
#include "critfield/types.hpp"

namespace critfield {

/// Default Monte Carlo sizes.
inline constexpr long kDefaultMcOne = 200000;
inline constexpr long kDefaultMcPair = 100000;
inline constexpr int kDefaultQuadNodes = 64;

/// rho = E|det Hess| (2 pi)^{-m/2} det(Var grad)^{-1/2}. At a single point the
/// gradient and Hessian are independent, so no conditioning is needed. With a
/// continuum kernel this is the mean density C_m.
Estimate one_point_density(const KernelSource& kernel, long n_mc, std::uint64_t seed);

/// Same formula from explicit blocks (for injected or degenerate inputs).
Estimate one_point_density(const Eigen::MatrixXd& var_grad, const Eigen::MatrixXd& cov_hessian, int m,
                           long n_mc, std::uint64_t seed);

struct TwoPointReport {
  Estimate rho_hat;    ///< two-point density of critical points at separation z
  Estimate rho_tilde;  ///< same with all cross-covariances removed
  Estimate delta;      ///< rho_hat - rho_tilde from common random numbers
  double min_eig = 0.0;  ///< smallest eigenvalue of the conditioning covariance
};

/// The separation is replaced by whichever of z, -z is lexicographically
/// positive, so rho_hat(z) and rho_hat(-z) coincide bit for bit.
TwoPointReport two_point_density(const KernelSource& kernel, const Vec& z, long n_mc, std::uint64_t seed);

/// Joint covariance of (grad at 0, grad at z, Hessian at 0, Hessian at z).
GaussianSpec pair_covariance(const KernelSource& kernel, const Vec& z);
/// The same built from two points; only y - x enters.
GaussianSpec pair_covariance(const KernelSource& kernel, const Vec& x, const Vec& y);

struct BlowUpReport {
  double r = 0.0;
  Estimate w;          ///< r^{m-2} rho_hat(r nu)
  Estimate rho_hat;
  Estimate rho_tilde;
  Estimate delta;
  double min_eig = 0.0;  ///< of the gauge-changed conditioning covariance
};

/// rho_hat at separation r nu computed by conditioning on
/// (grad(0), (grad(r nu) - grad(0)) / r), which stays nondegenerate as r -> 0.
BlowUpReport blow_up_density(const KernelSource& kernel, double r, const Vec& nu, long n_mc,
                             std::uint64_t seed);

struct RadialNode {
  double r = 0.0;
  double weight = 0.0;
  bool gauge = false;
  Estimate rho_hat;
  Estimate delta;
};

struct ConstantReport {
  Estimate value;
  double r_max = 0.0;
  double tail_bound = 0.0;
  double decay_constant = 0.0;  ///< fitted C in |delta| <= C T^{1/2}
  double corr_len = 0.0;
  Estimate rho_one;             ///< one-point density used for the cutoff
  std::vector<RadialNode> nodes;
};

/// Z_m = |S^{m-1}| \int_0^infinity r^{m-1} delta(r) dr for a radial kernel,
/// by composite Gauss-Legendre (panels of 8 nodes) with independent Monte
/// Carlo per node. The standard error includes the tail bound.
ConstantReport Z_m_const(const KernelSource& kernel, long n_mc_pair, int quad_nodes, std::uint64_t seed);
ConstantReport Z_m_const(const Amplitude& amp, int m, long n_mc_pair, int quad_nodes, std::uint64_t seed);

struct VarianceConstant {
  Estimate C;
  Estimate Z;
  Estimate V;
  ConstantReport detail;
};

VarianceConstant V_m_const(const Amplitude& amp, int m, long n_mc_one, long n_mc_pair, int quad_nodes,
                           std::uint64_t seed);

struct HolderCheck {
  Estimate lhs;      ///< |I_{A0} - I_A| for I_A = E|det H|, H with entry covariance A
  double rhs = 0.0;  ///< ||A - A0||_F^{1/2}
};

/// Common random numbers through symmetric square-root factors of A0 and A.
HolderCheck holder_continuity_check(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& A, int m, long n_mc,
                                    std::uint64_t seed);

/// Correlation length sqrt(Var d_1 Phi / Var d_11 Phi) of a kernel.
double correlation_length(const KernelSource& kernel);

}  // namespace critfield
