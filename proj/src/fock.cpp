#include "mwi/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace mwi::fock {

CiVector annihilate(int mode, std::span<const cplx> c) {
  if (c.empty()) throw std::invalid_argument("fock: empty CI vector");
  const std::size_t n = c.size() - 1;
  if (n == 0) return CiVector{};
  CiVector out(n, 0.0);
  if (mode == 0) {
    // a_0 |n-m, m> = sqrt(n-m) |n-1-m, m>
    for (std::size_t m = 0; m < n; ++m)
      out[m] = std::sqrt(static_cast<double>(n - m)) * c[m];
  } else {
    // a_1 |n-m, m> = sqrt(m) |n-m, m-1>
    for (std::size_t m = 1; m <= n; ++m)
      out[m - 1] = std::sqrt(static_cast<double>(m)) * c[m];
  }
  return out;
}

CiVector create(int mode, std::span<const cplx> c) {
  const std::size_t n = c.size();  // particles after creation
  CiVector out(n + 1, 0.0);
  if (mode == 0) {
    // a_0^dagger |n-1-m, m> = sqrt(n-m) |n-m, m>
    for (std::size_t m = 0; m < n; ++m)
      out[m] = std::sqrt(static_cast<double>(n - m)) * c[m];
  } else {
    // a_1^dagger |n-1-m, m> = sqrt(m+1) |n-1-m, m+1>
    for (std::size_t m = 0; m < n; ++m)
      out[m + 1] = std::sqrt(static_cast<double>(m + 1)) * c[m];
  }
  return out;
}

Eigen::Matrix2cd oneBodyDensity(std::span<const cplx> c) {
  if (c.size() < 2) throw std::invalid_argument("fock: need N >= 1");
  const std::size_t n = c.size() - 1;
  double r11 = 0.0, r22 = 0.0;
  cplx r12 = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const double w = std::norm(c[m]);
    r11 += w * static_cast<double>(n - m);
    r22 += w * static_cast<double>(m);
    if (m < n)
      r12 += std::conj(c[m]) * c[m + 1] *
             std::sqrt(static_cast<double>((n - m) * (m + 1)));
  }
  Eigen::Matrix2cd rho;
  rho << r11, r12, std::conj(r12), r22;
  return rho;
}

namespace {

cplx dot(const CiVector& a, const CiVector& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// pairs[q][l] = a_q a_l C
std::array<std::array<CiVector, 2>, 2> annihilatePairs(std::span<const cplx> c) {
  const auto a0 = annihilate(0, c);
  const auto a1 = annihilate(1, c);
  std::array<std::array<CiVector, 2>, 2> pairs;
  pairs[0][0] = annihilate(0, a0);
  pairs[0][1] = annihilate(0, a1);
  pairs[1][0] = pairs[0][1];
  pairs[1][1] = annihilate(1, a1);
  return pairs;
}

}  // namespace

Tensor4 twoBodyDensity(std::span<const cplx> c) {
  if (c.size() < 3) throw std::invalid_argument("fock: need N >= 2");
  const auto pairs = annihilatePairs(c);
  Tensor4 rho;
  // <a_k^+ a_s^+ a_q a_l> = <a_s a_k psi | a_q a_l psi>
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      for (int q = 0; q < 2; ++q)
        for (int l = 0; l < 2; ++l)
          rho(k, s, q, l) = dot(pairs[s][k], pairs[q][l]);
  return rho;
}

CiVector applyHamiltonian(std::span<const cplx> c, const Eigen::Matrix2cd& h,
                          const Tensor4& w) {
  if (c.size() < 3) throw std::invalid_argument("fock: need N >= 2");
  const std::size_t dim = c.size();
  CiVector out(dim, 0.0);

  const std::array<CiVector, 2> single = {annihilate(0, c), annihilate(1, c)};
  for (int k = 0; k < 2; ++k) {
    CiVector b(single[0].size(), 0.0);
    for (int q = 0; q < 2; ++q)
      for (std::size_t i = 0; i < b.size(); ++i) b[i] += h(k, q) * single[q][i];
    const auto up = create(k, b);
    for (std::size_t i = 0; i < dim; ++i) out[i] += up[i];
  }

  const auto pairs = annihilatePairs(c);
  const std::size_t pdim = pairs[0][0].size();
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s) {
      CiVector b(pdim, 0.0);
      for (int q = 0; q < 2; ++q)
        for (int l = 0; l < 2; ++l) {
          const cplx wk = 0.5 * w(k, s, q, l);
          for (std::size_t i = 0; i < pdim; ++i) b[i] += wk * pairs[q][l][i];
        }
      const auto up = create(k, create(s, b));
      for (std::size_t i = 0; i < dim; ++i) out[i] += up[i];
    }
  return out;
}

double energy(const Eigen::Matrix2cd& rho1, const Tensor4& rho2,
              const Eigen::Matrix2cd& h, const Tensor4& w) {
  cplx e = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int q = 0; q < 2; ++q) e += rho1(k, q) * h(k, q);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 2; ++s)
      for (int q = 0; q < 2; ++q)
        for (int l = 0; l < 2; ++l) e += 0.5 * rho2(k, s, q, l) * w(k, s, q, l);
  return e.real();
}

}  // namespace mwi::fock
