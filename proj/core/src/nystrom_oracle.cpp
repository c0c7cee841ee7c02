#include <cmath>
#include <stdexcept>
#include <vector>

#include "detlab/identity_lab.hpp"

namespace detlab::lab {

namespace {

// Uniform nodes r_i = i/m (i = 1..m) with composite trapezoid weights for
// [0, 1]; the r = 0 endpoint drops because the radial measure vanishes there.
void uniform_trapezoid(int m, std::vector<double>& nodes, std::vector<double>& w) {
  const double h = 1.0 / m;
  nodes.resize(m);
  w.resize(m);
  for (int i = 1; i <= m; ++i) {
    nodes[i - 1] = i * h;
    w[i - 1] = (i == m) ? 0.5 * h : h;
  }
}

Complex single_level_det(const ModalDomain& dom, Bc bc, const FiniteRankPotential& V,
                         const SpectralPoint& z, int m, bool* flag) {
  std::vector<double> nodes, tw;
  uniform_trapezoid(m, nodes, tw);

  Matrix red = Matrix::Zero(V.rank, V.rank);
  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    const int n = dom.mode_at(idx);

    // Weighted factor samples on the oracle grid; skip silent modes.
    Matrix alpha(V.rank, m), beta(V.rank, m);
    bool active = false;
    for (int k = 0; k < V.rank; ++k) {
      const Vector psi = pot::sample_factor_mode(V.left_specs[k], n, nodes);
      const Vector phi = pot::sample_factor_mode(V.right_specs[k], n, nodes);
      for (int i = 0; i < m; ++i) {
        const double wm = tw[i] * dom.measure(nodes[i]);
        alpha(k, i) = std::conj(phi(i)) * wm;
        beta(k, i) = psi(i) * wm;
        active |= (alpha(k, i) != Complex(0, 0)) || (beta(k, i) != Complex(0, 0));
      }
    }
    if (!active) continue;

    const geom::RadialSolutionPair p = geom::radial_solutions_at(dom, n, bc, z, nodes);
    if (flag && p.eigenvalue_flag) *flag = true;
    Matrix g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const int lo = std::min(i, j), hi = std::max(i, j);
        g(i, j) = -p.regular[lo] * p.matched[hi] / p.wronskian_norm;
      }
    red += dom.angle_factor() * (alpha * g * beta.transpose());
  }
  for (int k = 0; k < V.rank; ++k) red.col(k) *= V.couplings[k];
  return det_I_plus(red).value;
}

} // namespace

DetValue nystrom_interior_det(const ModalDomain& dom, Bc bc, const FiniteRankPotential& V,
                              const SpectralPoint& z, const NystromParams& prm) {
  if (prm.n_radial < 8) throw std::invalid_argument("nystrom oracle: n_radial too small");
  if (dom.kind == geom::DomainKind::Disk && prm.n_theta <= 2 * dom.mode_cutoff)
    throw std::invalid_argument("nystrom oracle: angular rule aliases the mode content");

  DetValue out;
  bool flag = false;
  const Complex fine = single_level_det(dom, bc, V, z, prm.n_radial, &flag);
  if (!prm.richardson) {
    out.value = fine;
    out.eigenvalue_flag = flag;
    return out;
  }
  if (prm.n_radial % 2 != 0)
    throw std::invalid_argument("nystrom oracle: richardson needs even n_radial");
  const Complex coarse = single_level_det(dom, bc, V, z, prm.n_radial / 2, &flag);
  out.value = (4.0 * fine - coarse) / 3.0;
  out.eigenvalue_flag = flag;
  return out;
}

DetValue nystrom_interior_det_dense(const ModalDomain& dom, Bc bc,
                                    const FiniteRankPotential& V, const SpectralPoint& z,
                                    int n_radial, int n_theta) {
  std::vector<double> nodes, tw;
  uniform_trapezoid(n_radial, nodes, tw);
  const bool disk = dom.kind == geom::DomainKind::Disk;
  const int nth = disk ? n_theta : 1;
  const int N = n_radial * nth;

  std::vector<geom::RadialSolutionPair> pairs;
  pairs.reserve(dom.n_modes());
  bool flag = false;
  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    pairs.push_back(geom::radial_solutions_at(dom, dom.mode_at(idx), bc, z, nodes));
    flag |= pairs.back().eigenvalue_flag;
  }

  // Mode-truncated kernel and the potential kernel, sampled on the product grid.
  Matrix G(N, N), K(N, N);
  std::vector<std::vector<Vector>> psi(V.rank), phi(V.rank);
  for (int k = 0; k < V.rank; ++k)
    for (int idx = 0; idx < dom.n_modes(); ++idx) {
      psi[k].push_back(pot::sample_factor_mode(V.left_specs[k], dom.mode_at(idx), nodes));
      phi[k].push_back(pot::sample_factor_mode(V.right_specs[k], dom.mode_at(idx), nodes));
    }

  for (int p = 0; p < N; ++p) {
    const int ip = p / nth, ap = p % nth;
    const double thp = disk ? 2.0 * M_PI * ap / nth : 0.0;
    for (int q = 0; q < N; ++q) {
      const int iq = q / nth, aq = q % nth;
      const double thq = disk ? 2.0 * M_PI * aq / nth : 0.0;
      Complex gsum(0, 0), ksum(0, 0);
      for (int idx = 0; idx < dom.n_modes(); ++idx) {
        const int n = dom.mode_at(idx);
        const auto& pr = pairs[idx];
        const int lo = std::min(ip, iq), hi = std::max(ip, iq);
        const Complex gn = -pr.regular[lo] * pr.matched[hi] / pr.wronskian_norm;
        gsum += gn * std::exp(Complex(0.0, n * (thp - thq))) / dom.angle_factor();
      }
      for (int k = 0; k < V.rank; ++k) {
        Complex pv(0, 0), fv(0, 0);
        for (int idx = 0; idx < dom.n_modes(); ++idx) {
          const int n = dom.mode_at(idx);
          pv += psi[k][idx](ip) * std::exp(Complex(0.0, n * thp));
          fv += phi[k][idx](iq) * std::exp(Complex(0.0, n * thq));
        }
        ksum += V.couplings[k] * pv * std::conj(fv);
      }
      G(p, q) = gsum;
      K(p, q) = ksum;
    }
  }

  Vector wq(N);
  for (int q = 0; q < N; ++q) {
    const int iq = q / nth;
    const double ang = disk ? 2.0 * M_PI / nth : 4.0 * M_PI;
    wq(q) = tw[iq] * dom.measure(nodes[iq]) * ang;
  }
  const Matrix A = G * wq.asDiagonal() * K * wq.asDiagonal();
  return DetValue{det_I_plus(A).value, flag};
}

} // namespace detlab::lab
