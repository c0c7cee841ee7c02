#include "detlab/potential.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace detlab::pot {

Vector sample_factor_mode(const FactorSpec& spec, int mode, const std::vector<double>& nodes) {
  Vector v = Vector::Zero(nodes.size());
  for (const auto& [m, coeffs] : spec.modes) {
    if (m != mode) continue;
    for (std::size_t i = 0; i < nodes.size(); ++i) v(i) += poly_eval(coeffs, nodes[i]);
  }
  return v;
}

ModalField sample_factor(const FactorSpec& spec, const ModalDomain& dom) {
  ModalField f = ModalField::zero(dom);
  for (const auto& [m, coeffs] : spec.modes) {
    if (!f.has_mode(m)) throw std::invalid_argument("factor mode above the domain cutoff");
    Vector& v = f.mode(m);
    for (std::size_t i = 0; i < dom.radial.size(); ++i)
      v(i) += poly_eval(coeffs, dom.radial.x[i]);
  }
  return f;
}

namespace {

double field_norm(const ModalDomain& dom, const ModalField& f) {
  return std::sqrt(std::abs(geom::inner_product(dom, f, f)));
}

// Kernel Hermiticity K(x,y) = conj(K(y,x)) checked blockwise on the modal grid.
bool hermitian_kernel(const FiniteRankPotential& V, const ModalDomain& dom) {
  std::set<int> active;
  for (const auto& fs : V.left_specs)
    for (const auto& [m, c] : fs.modes) active.insert(m);
  for (const auto& fs : V.right_specs)
    for (const auto& [m, c] : fs.modes) active.insert(m);

  const std::size_t nr = dom.radial.size();
  double scale = 0.0, dev = 0.0;
  for (int m1 : active) {
    for (int m2 : active) {
      for (std::size_t i = 0; i < nr; i += 3) {
        for (std::size_t j = 0; j < nr; j += 3) {
          Complex k12(0, 0), k21(0, 0);
          for (int l = 0; l < V.rank; ++l) {
            k12 += V.couplings[l] * V.left[l].mode(m1)(i) * std::conj(V.right[l].mode(m2)(j));
            k21 += V.couplings[l] * V.left[l].mode(m2)(j) * std::conj(V.right[l].mode(m1)(i));
          }
          dev = std::max(dev, std::abs(k12 - std::conj(k21)));
          scale = std::max(scale, std::abs(k12));
        }
      }
    }
  }
  return dev <= 1e-12 * std::max(scale, 1.0);
}

} // namespace

FiniteRankPotential make_potential(const std::vector<Complex>& couplings,
                                   const std::vector<FactorSpec>& left,
                                   const std::vector<FactorSpec>& right,
                                   const ModalDomain& dom) {
  const int r = static_cast<int>(couplings.size());
  if (r < 1 || r > 64) throw std::invalid_argument("make_potential: rank outside [1, 64]");
  if (left.size() != couplings.size() || right.size() != couplings.size())
    throw std::invalid_argument("make_potential: factor count must match the couplings");

  FiniteRankPotential V;
  V.rank = r;
  V.couplings = couplings;
  V.left_specs = left;
  V.right_specs = right;
  for (int j = 0; j < r; ++j) {
    V.left.push_back(sample_factor(left[j], dom));
    V.right.push_back(sample_factor(right[j], dom));
    const double nl = field_norm(dom, V.left.back());
    const double nrm = field_norm(dom, V.right.back());
    if (couplings[j] != Complex(0.0, 0.0) && (nl == 0.0 || nrm == 0.0))
      throw std::invalid_argument("make_potential: zero-norm factor");
    V.trace_norm += std::abs(couplings[j]) * nl * nrm;
  }
  V.self_adjoint = hermitian_kernel(V, dom);
  return V;
}

ModalField apply(const FiniteRankPotential& V, const ModalField& f, const ModalDomain& dom) {
  ModalField out = ModalField::zero(dom);
  for (int j = 0; j < V.rank; ++j) {
    const Complex c = V.couplings[j] * geom::inner_product(dom, V.right[j], f);
    if (c != Complex(0.0, 0.0)) out = geom::field_axpy(c, V.left[j], out);
  }
  return out;
}

Complex trace(const FiniteRankPotential& V, const ModalDomain& dom) {
  Complex t(0.0, 0.0);
  for (int j = 0; j < V.rank; ++j)
    t += V.couplings[j] * geom::inner_product(dom, V.right[j], V.left[j]);
  return t;
}

Vector FactorPair::coordinates(const ModalField& f) const {
  Vector c(potential->rank);
  for (int j = 0; j < potential->rank; ++j)
    c(j) = geom::inner_product(*domain, potential->right[j], f);
  return c;
}

ModalField FactorPair::synthesize(const Vector& c) const {
  ModalField out = ModalField::zero(*domain);
  for (int j = 0; j < potential->rank; ++j) {
    const Complex a = potential->couplings[j] * c(j);
    if (a != Complex(0.0, 0.0)) out = geom::field_axpy(a, potential->left[j], out);
  }
  return out;
}

FactorPair factorize(const FiniteRankPotential& V, const ModalDomain& dom) {
  return FactorPair{&V, &dom};
}

} // namespace detlab::pot
