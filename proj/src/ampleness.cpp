#include "critfield/ampleness.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "critfield/gaussian.hpp"

namespace critfield {

namespace {

AmplenessReport report_for(const Eigen::MatrixXd& cov, const std::string& check) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  AmplenessReport r;
  r.check = check;
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.threshold = 1e-12 * cov.trace() / static_cast<double>(cov.rows());
  r.pass = r.min_eigenvalue > r.threshold && r.threshold > 0.0;
  return r;
}

}  // namespace

AmplenessReport min_eig_jet(const KernelSource& kernel, int k) {
  if (k != 1 && k != 2) throw Error(ErrorCode::invalid_argument, "jet order must be 1 or 2");
  const int m = kernel.dim();
  const GaussianSpec g = jet_covariance(kernel, Vec::Zero(m), jet_labels(m, k, 0));
  return report_for(g.cov, "jet" + std::to_string(k));
}

AmplenessReport min_eig_jet(const LatticeSpectrum& spec, int k) { return min_eig_jet(LatticeKernel(spec), k); }

AmplenessReport min_eig_pair(const KernelSource& kernel, const Vec& z) {
  const int m = kernel.dim();
  if (z.size() != m) throw Error(ErrorCode::invalid_argument, "separation has wrong dimension");
  std::vector<JetLabel> labels = gradient_labels(m, 0);
  for (auto& l : gradient_labels(m, 1)) labels.push_back(l);
  AmplenessReport r = report_for(jet_covariance(kernel, z, labels).cov, "pair");
  r.z = z;
  return r;
}

AmplenessReport min_eig_pair(const LatticeSpectrum& spec, const Vec& z) {
  return min_eig_pair(LatticeKernel(spec), z);
}

std::vector<Vec> default_z_grid(int m, double R, int points) {
  check_dimension(m);
  if (points < 1) throw Error(ErrorCode::invalid_argument, "z grid needs at least one point");
  std::vector<Vec> out;
  for (int j = 1; j <= points; ++j) {
    const double t = 0.5 * R * j / points;
    Vec z = Vec::Zero(m);
    z[0] = t;
    out.push_back(z);
    if (m >= 2) out.push_back(Vec::Constant(m, t));
  }
  return out;
}

AmplenessScan ampleness_scan(const Amplitude& amp, int m, const std::vector<double>& R_values, int k,
                             int z_points, double eps_trunc, long max_modes) {
  AmplenessScan scan;
  std::vector<double> Rs = R_values;
  std::sort(Rs.begin(), Rs.end());
  for (double R : Rs) {
    LatticeSpectrum spec = LatticeSpectrum::build(amp, m, R, eps_trunc);
    if (max_modes >= 0) spec = spec.first_modes(static_cast<std::size_t>(max_modes));
    const LatticeKernel K(spec);
    AmplenessScanRow row;
    row.R = R;
    row.jet = min_eig_jet(K, k);
    row.pass = row.jet.pass;
    bool first = true;
    for (const Vec& z : default_z_grid(m, R, z_points)) {
      AmplenessReport p = min_eig_pair(K, z);
      row.pass = row.pass && p.pass;
      if (first || p.min_eigenvalue < row.worst_pair.min_eigenvalue) row.worst_pair = p;
      first = false;
      row.pairs.push_back(std::move(p));
    }
    scan.rows.push_back(std::move(row));
  }
  for (auto it = scan.rows.rbegin(); it != scan.rows.rend() && it->pass; ++it) scan.empirical_R0 = it->R;
  return scan;
}

}  // namespace critfield
