#pragma once

#include <string>
#include <vector>

#include "critfield/amplitude.hpp"
#include "critfield/covariance.hpp"
#include "critfield/types.hpp"

namespace critfield {

struct AmplenessReport {
  std::string check;        ///< "jet1", "jet2" or "pair"
  double min_eigenvalue = 0.0;
  double threshold = 0.0;   ///< 1e-12 * trace / dim
  Vec z;                    ///< separation for pair checks, empty otherwise
  bool pass = false;
};

/// Smallest eigenvalue of Var[J_k Phi(0)] (value, gradient and, for k = 2,
/// the Hessian entries).
AmplenessReport min_eig_jet(const KernelSource& kernel, int k);
AmplenessReport min_eig_jet(const LatticeSpectrum& spec, int k);

/// Smallest eigenvalue of Var[grad Phi(0) (+) grad Phi(z)].
AmplenessReport min_eig_pair(const KernelSource& kernel, const Vec& z);
AmplenessReport min_eig_pair(const LatticeSpectrum& spec, const Vec& z);

/// Separations used by scans: `points` values of t in (0, R/2] along e_1 and,
/// for m >= 2, along the main diagonal.
std::vector<Vec> default_z_grid(int m, double R, int points);

struct AmplenessScanRow {
  double R = 0.0;
  AmplenessReport jet;
  AmplenessReport worst_pair;
  std::vector<AmplenessReport> pairs;
  bool pass = false;
};

struct AmplenessScan {
  std::vector<AmplenessScanRow> rows;
  /// Smallest tested R from which every larger tested R also passes; 0 when
  /// the largest R fails.
  double empirical_R0 = 0.0;
};

AmplenessScan ampleness_scan(const Amplitude& amp, int m, const std::vector<double>& R_values, int k,
                             int z_points, double eps_trunc = LatticeSpectrum::kDefaultEps,
                             long max_modes = -1);

}  // namespace critfield
