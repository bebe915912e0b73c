#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace critfield {

/// Largest torus dimension supported. Everything here is desk-scale.
inline constexpr int kMaxDim = 3;

/// Points and frequencies in R^m, m <= kMaxDim, without heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

enum class ErrorCode {
  invalid_argument = 1,
  uncertified_tail,
  quadrature,
  degenerate,
  not_psd,
  unsupported,
  resolution,
  io,
  config,
  invariant,  ///< a run-level check failed (ampleness gate, too many exclusions)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Derivative multi-index alpha in N^m.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim) : dim_(dim) { check_dim(dim); }
  MultiIndex(int dim, std::initializer_list<int> entries) : dim_(dim) {
    check_dim(dim);
    if (static_cast<int>(entries.size()) > dim)
      throw Error(ErrorCode::invalid_argument, "multi-index longer than dimension");
    int i = 0;
    for (int e : entries) set(i++, e);
  }

  static MultiIndex unit(int dim, int i) {
    MultiIndex a(dim);
    a.set(i, 1);
    return a;
  }
  static MultiIndex pair(int dim, int i, int j) {
    MultiIndex a(dim);
    a.e_[i] += 1;
    a.e_[j] += 1;
    return a;
  }

  int dim() const { return dim_; }
  int operator[](int i) const { return e_[i]; }
  void set(int i, int v) {
    if (v < 0) throw Error(ErrorCode::invalid_argument, "negative multi-index entry");
    e_[i] = v;
  }
  int order() const {
    int s = 0;
    for (int i = 0; i < dim_; ++i) s += e_[i];
    return s;
  }
  bool any_odd() const {
    for (int i = 0; i < dim_; ++i)
      if (e_[i] % 2) return true;
    return false;
  }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex c(a.dim_);
    for (int i = 0; i < a.dim_; ++i) c.e_[i] = a.e_[i] + b.e_[i];
    return c;
  }
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.dim_ == b.dim_ && a.e_ == b.e_;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) s += ',';
      s += std::to_string(e_[i]);
    }
    return s + ")";
  }

 private:
  static void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim)
      throw Error(ErrorCode::invalid_argument,
                  "dimension must be in [1," + std::to_string(kMaxDim) + "]");
  }
  int dim_ = 1;
  std::array<int, kMaxDim> e_{};
};

/// Lattice vector in Z^m.
using LatticeVec = std::array<int, kMaxDim>;

inline void check_dimension(int m) {
  if (m < 1 || m > kMaxDim)
    throw Error(ErrorCode::invalid_argument,
                "dimension m must be in [1," + std::to_string(kMaxDim) + "], got " +
                    std::to_string(m));
}

/// Monte Carlo or deterministic estimate carried through the Kac-Rice code.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::string method;
};

}  // namespace critfield
