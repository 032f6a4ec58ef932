#pragma once

// Second-quantized algebra on the two-mode Fock ladder |N-m, m>, m = 0..N.
// A CI vector of length n+1 represents an n-particle state; mode 0 holds
// N-m bosons and mode 1 holds m.

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "mwi/grid.hpp"

namespace mwi::fock {

using CiVector = std::vector<cplx>;

/// a_mode |psi>, mapping n particles to n-1.
CiVector annihilate(int mode, std::span<const cplx> c);
/// a_mode^dagger |psi>, mapping n particles to n+1.
CiVector create(int mode, std::span<const cplx> c);

/// Rank-4 tensor over two modes, indexed (k, s, q, l).
class Tensor4 {
 public:
  cplx& operator()(int k, int s, int q, int l) { return v_[index(k, s, q, l)]; }
  cplx operator()(int k, int s, int q, int l) const { return v_[index(k, s, q, l)]; }

 private:
  static constexpr int index(int k, int s, int q, int l) {
    return ((k * 2 + s) * 2 + q) * 2 + l;
  }
  std::array<cplx, 16> v_{};
};

/// rho_kq = <a_k^dagger a_q> from the closed-form ladder sums.
Eigen::Matrix2cd oneBodyDensity(std::span<const cplx> c);

/// rho_ksql = <a_k^dagger a_s^dagger a_q a_l>.
Tensor4 twoBodyDensity(std::span<const cplx> c);

/// H C for H = sum h_kq a_k^dagger a_q + 1/2 sum W_ksql a_k^dagger a_s^dagger a_q a_l.
/// The result is banded: it couples m only to m' with |m - m'| <= 2.
CiVector applyHamiltonian(std::span<const cplx> c, const Eigen::Matrix2cd& h,
                          const Tensor4& w);

/// <H> = sum rho_kq h_kq + 1/2 sum rho_ksql W_ksql.
double energy(const Eigen::Matrix2cd& rho1, const Tensor4& rho2,
              const Eigen::Matrix2cd& h, const Tensor4& w);

}  // namespace mwi::fock
