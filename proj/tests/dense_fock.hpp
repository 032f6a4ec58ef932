#pragma once

// Brute-force two-mode Fock space: explicit ladder matrices on the truncated
// space {|n0, n1> : n0, n1 <= cutoff}. Slow and simple on purpose.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "mwi/fock.hpp"

namespace dense {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Space {
  int cutoff;
  int dim() const { return (cutoff + 1) * (cutoff + 1); }
  int index(int n0, int n1) const { return n0 * (cutoff + 1) + n1; }

  Mat annihilator(int mode) const {
    Mat a = Mat::Zero(dim(), dim());
    for (int n0 = 0; n0 <= cutoff; ++n0)
      for (int n1 = 0; n1 <= cutoff; ++n1) {
        if (mode == 0 && n0 > 0) a(index(n0 - 1, n1), index(n0, n1)) = std::sqrt(double(n0));
        if (mode == 1 && n1 > 0) a(index(n0, n1 - 1), index(n0, n1)) = std::sqrt(double(n1));
      }
    return a;
  }

  // CI vector over |N-m, m> embedded in the full space
  Vec embed(const std::vector<cplx>& c) const {
    const int n = static_cast<int>(c.size()) - 1;
    Vec v = Vec::Zero(dim());
    for (int m = 0; m <= n; ++m) v(index(n - m, m)) = c[m];
    return v;
  }

  std::vector<cplx> extract(const Vec& v, int n) const {
    std::vector<cplx> c(n + 1);
    for (int m = 0; m <= n; ++m) c[m] = v(index(n - m, m));
    return c;
  }
};

inline Eigen::Matrix2cd rho1(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  const Space sp{n};
  const Mat a[2] = {sp.annihilator(0), sp.annihilator(1)};
  const Vec psi = sp.embed(c);
  Eigen::Matrix2cd r;
  for (int k = 0; k < 2; ++k)
    for (int q = 0; q < 2; ++q) r(k, q) = psi.dot(a[k].adjoint() * a[q] * psi);
  return r;
}

inline mwi::fock::Tensor4 rho2(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  const Space sp{n};
  const Mat a[2] = {sp.annihilator(0), sp.annihilator(1)};
  const Vec psi = sp.embed(c);
  mwi::fock::Tensor4 r;
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      for (int q = 0; q < 2; ++q)
        for (int l = 0; l < 2; ++l)
          r(k, s, q, l) =
              psi.dot(a[k].adjoint() * a[s].adjoint() * a[q] * a[l] * psi);
  return r;
}

// H restricted to the N-particle sector, as an (N+1)x(N+1) matrix over m
inline Mat hamiltonian(int n, const Eigen::Matrix2cd& h, const mwi::fock::Tensor4& w) {
  const Space sp{n};
  const Mat a[2] = {sp.annihilator(0), sp.annihilator(1)};
  Mat full = Mat::Zero(sp.dim(), sp.dim());
  for (int k = 0; k < 2; ++k)
    for (int q = 0; q < 2; ++q) full += h(k, q) * a[k].adjoint() * a[q];
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      for (int q = 0; q < 2; ++q)
        for (int l = 0; l < 2; ++l)
          full += 0.5 * w(k, s, q, l) * a[k].adjoint() * a[s].adjoint() * a[q] * a[l];
  Mat out(n + 1, n + 1);
  for (int m = 0; m <= n; ++m)
    for (int mp = 0; mp <= n; ++mp) out(m, mp) = full(sp.index(n - m, m), sp.index(n - mp, mp));
  return out;
}

inline std::vector<cplx> randomCi(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> c(n + 1);
  double norm = 0.0;
  for (auto& v : c) {
    v = {g(gen), g(gen)};
    norm += std::norm(v);
  }
  for (auto& v : c) v /= std::sqrt(norm);
  return c;
}

}  // namespace dense
