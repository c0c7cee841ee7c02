#include "detlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace detlab::geom {

namespace {

// Dormand-Prince 5(4) with adaptive step, marching through `targets` in order
// and emitting the state at each. Direction follows the target ordering.
template <int N, typename Rhs, typename Emit>
void integrate(Rhs&& rhs, double r_start, std::array<Complex, N> y,
               const std::vector<double>& targets, Emit&& emit, double rtol = 1e-12,
               double atol = 1e-14) {
  using State = std::array<Complex, N>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  auto axpy = [](const State& base, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = base;
    for (const auto& [c, k] : terms)
      for (int i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
    return out;
  };

  double r = r_start;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double rt = targets[t];
    const double dir = (rt > r) ? 1.0 : -1.0;
    double h = dir * std::max(1e-6, std::abs(rt - r) / 16.0);
    while (dir * (rt - r) > 1e-15) {
      if (dir * (r + h) > dir * rt) h = rt - r;
      const State k1 = rhs(r, y);
      const State k2 = rhs(r + c2 * h, axpy(y, h, {{a21, &k1}}));
      const State k3 = rhs(r + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
      const State k4 = rhs(r + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const State k5 =
          rhs(r + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const State k6 = rhs(
          r + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      const State y5 =
          axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      const State k7 = rhs(r + h, y5);
      double err = 0.0;
      for (int i = 0; i < N; ++i) {
        const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (err <= 1.0) {
        r += h;
        y = y5;
      }
      h *= std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
      if (std::abs(h) < 1e-15) throw std::runtime_error("radial integration stalled");
    }
    r = rt;
    emit(t, y);
  }
}

constexpr double kFrobeniusStart = 1e-8;

RealVector barycentric_weights(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  RealVector b = RealVector::Ones(n);
  // Scale factors by 4/(b-a) ~ 4 to keep products in range for n ~ 100.
  for (int i = 0; i < n; ++i) {
    double prod = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) prod *= 4.0 * (x[i] - x[j]);
    b(i) = 1.0 / prod;
  }
  return b;
}

void finish_domain(ModalDomain& dom) {
  dom.radial_ops = make_spectral_ops(dom.radial, 0.0, 1.0);
  dom.radial_bary = barycentric_weights(dom.radial.x);
}

} // namespace

ModalDomain make_disk(int n_radial, int mode_cutoff, int n_boundary) {
  if (n_radial < 4) throw std::invalid_argument("make_disk: n_radial >= 4 required");
  if (mode_cutoff < 0 || mode_cutoff > 48)
    throw std::invalid_argument("make_disk: mode_cutoff outside [0, 48]");
  if (n_boundary < 2 * mode_cutoff + 2)
    throw std::invalid_argument("make_disk: boundary rule too coarse for the mode cutoff");
  ModalDomain dom;
  dom.kind = DomainKind::Disk;
  dom.mode_cutoff = mode_cutoff;
  dom.radial = gauss_interval(n_radial, 0.0, 1.0);
  dom.boundary = circle_rule(n_boundary);
  finish_domain(dom);
  return dom;
}

ModalDomain make_ball_radial(int n_radial) {
  if (n_radial < 4) throw std::invalid_argument("make_ball_radial: n_radial >= 4 required");
  ModalDomain dom;
  dom.kind = DomainKind::BallRadial;
  dom.mode_cutoff = 0;
  dom.radial = gauss_interval(n_radial, 0.0, 1.0);
  dom.boundary.geometry = GridGeometry::Circle;
  dom.boundary.x = {0.0};
  dom.boundary.w = {4.0 * M_PI};
  finish_domain(dom);
  return dom;
}

ModalField ModalField::zero(const ModalDomain& dom) {
  ModalField f;
  if (dom.kind == DomainKind::Disk) {
    f.mode_lo = -dom.mode_cutoff;
    f.mode_hi = dom.mode_cutoff;
  }
  f.radial.assign(dom.n_modes(), Vector::Zero(dom.radial.size()));
  return f;
}

ModalField field_axpy(Complex a, const ModalField& x, const ModalField& y) {
  ModalField out = y;
  for (int n = x.mode_lo; n <= x.mode_hi; ++n) {
    if (!out.has_mode(n)) throw std::invalid_argument("field_axpy: mode range mismatch");
    out.mode(n) += a * x.mode(n);
  }
  return out;
}

Complex inner_product(const ModalDomain& dom, const ModalField& f, const ModalField& g) {
  Complex sum(0.0, 0.0);
  const int lo = std::max(f.mode_lo, g.mode_lo), hi = std::min(f.mode_hi, g.mode_hi);
  for (int n = lo; n <= hi; ++n) {
    const Vector& a = f.mode(n);
    const Vector& b = g.mode(n);
    Complex s(0.0, 0.0);
    for (std::size_t i = 0; i < dom.radial.size(); ++i)
      s += dom.radial.w[i] * dom.measure(dom.radial.x[i]) * std::conj(a(i)) * b(i);
    sum += s;
  }
  return dom.angle_factor() * sum;
}

RadialSolutionPair radial_solutions_at(const ModalDomain& dom, int mode, Bc bc,
                                       const SpectralPoint& z,
                                       const std::vector<double>& nodes) {
  const int nu = std::abs(mode);
  if (dom.kind == DomainKind::BallRadial && mode != 0)
    throw std::invalid_argument("radial_solutions: ball sector carries mode 0 only");
  const double alpha = (dom.kind == DomainKind::Disk) ? 2.0 * nu + 1.0 : 2.0;
  const Complex zz = z.z;

  RadialSolutionPair out;
  out.mode = mode;
  out.nodes = nodes;
  const std::size_t m = nodes.size();
  out.regular.resize(m);
  out.regular_deriv.resize(m);
  out.matched.resize(m);
  out.matched_deriv.resize(m);

  // Regular branch via u = r^nu * w; w solves w'' + (alpha/r) w' + z w = 0 and
  // stays O(1), which keeps large modes clear of under/overflow.
  auto rhs_reduced = [alpha, zz](double r, const std::array<Complex, 2>& y) {
    return std::array<Complex, 2>{y[1], -(alpha / r) * y[1] - zz * y[0]};
  };
  std::vector<double> up = nodes;
  up.push_back(1.0);
  std::array<Complex, 2> y0{Complex(1.0, 0.0), -zz * kFrobeniusStart / (alpha + 1.0)};
  auto u_from_w = [nu](double r, const std::array<Complex, 2>& w) {
    if (nu == 0) return w;
    const double rn = std::pow(r, nu);
    return std::array<Complex, 2>{rn * w[0], rn * w[1] + nu * std::pow(r, nu - 1) * w[0]};
  };
  integrate<2>(rhs_reduced, kFrobeniusStart, y0, up,
               [&](std::size_t t, const std::array<Complex, 2>& w) {
                 const auto u = u_from_w(up[t], w);
                 if (t < m) {
                   out.regular[t] = u[0];
                   out.regular_deriv[t] = u[1];
                 } else {
                   out.regular_at_1 = u[0];
                   out.regular_deriv_at_1 = u[1];
                 }
               });

  // Matched branch integrated inward from the boundary condition at r = 1.
  auto rhs_full = [&](double r, const std::array<Complex, 2>& y) {
    if (dom.kind == DomainKind::Disk)
      return std::array<Complex, 2>{
          y[1], -(1.0 / r) * y[1] + (double(nu) * nu / (r * r) - zz) * y[0]};
    return std::array<Complex, 2>{y[1], -(2.0 / r) * y[1] - zz * y[0]};
  };
  std::array<Complex, 2> y1 = (bc == Bc::Dirichlet)
                                  ? std::array<Complex, 2>{Complex(0, 0), Complex(-1, 0)}
                                  : std::array<Complex, 2>{Complex(1, 0), Complex(0, 0)};
  out.matched_at_1 = y1[0];
  out.matched_deriv_at_1 = y1[1];
  std::vector<double> down(nodes.rbegin(), nodes.rend());
  integrate<2>(rhs_full, 1.0, y1, down, [&](std::size_t t, const std::array<Complex, 2>& u) {
    const std::size_t i = m - 1 - t;
    out.matched[i] = u[0];
    out.matched_deriv[i] = u[1];
  });

  out.wronskian_norm = out.regular_at_1 * out.matched_deriv_at_1 -
                       out.regular_deriv_at_1 * out.matched_at_1;
  out.eigenvalue_flag = std::abs(out.wronskian_norm) < 1e-12;
  return out;
}

RadialSolutionPair radial_solutions(const ModalDomain& dom, int mode, Bc bc,
                                    const SpectralPoint& z) {
  return radial_solutions_at(dom, mode, bc, z, dom.radial.x);
}

namespace {

// Weight matrix for int_{r_i}^1 u2 f meas over nodal samples of f: panels
// between consecutive nodes, geometrically subdivided where the matched branch
// steepens, 12-point Gauss per sub-panel. Entries can be large toward the
// origin, but they always meet the regular branch through the bounded product
// u1 u2, so absolute round-off stays at the Wronskian scale.
Matrix make_tail_weights(const ModalDomain& dom, int mode, Bc bc, const SpectralPoint& z) {
  const std::size_t n = dom.radial.size();
  const QuadratureGrid sub = gauss_interval(12, 0.0, 1.0);

  struct Panel {
    double a, b;
    std::size_t row; // F2 row this panel starts contributing to (nodes <= a)
  };
  std::vector<Panel> panels;
  std::vector<double> edges = dom.radial.x;
  edges.push_back(1.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::log(b / a) / std::log(1.2))));
    for (int k = 0; k < pieces; ++k) {
      Panel p;
      p.a = a * std::pow(b / a, double(k) / pieces);
      p.b = a * std::pow(b / a, double(k + 1) / pieces);
      p.row = i;
      panels.push_back(p);
    }
  }

  // One inward sweep of the matched branch through every sub-panel point.
  std::vector<double> pts;
  for (const Panel& p : panels)
    for (std::size_t q = 0; q < sub.size(); ++q) pts.push_back(p.a + (p.b - p.a) * sub.x[q]);
  std::sort(pts.begin(), pts.end(), std::greater<double>());

  const int nu = std::abs(mode);
  const Complex zz = z.z;
  auto rhs = [&](double r, const std::array<Complex, 2>& y) {
    if (dom.kind == DomainKind::Disk)
      return std::array<Complex, 2>{y[1],
                                    -(1.0 / r) * y[1] + (double(nu) * nu / (r * r) - zz) * y[0]};
    return std::array<Complex, 2>{y[1], -(2.0 / r) * y[1] - zz * y[0]};
  };
  std::array<Complex, 2> y1 = (bc == Bc::Dirichlet)
                                  ? std::array<Complex, 2>{Complex(0, 0), Complex(-1, 0)}
                                  : std::array<Complex, 2>{Complex(1, 0), Complex(0, 0)};
  std::vector<Complex> u2(pts.size());
  integrate<2>(rhs, 1.0, y1, pts,
               [&](std::size_t t, const std::array<Complex, 2>& y) { u2[t] = y[0]; });
  std::reverse(u2.begin(), u2.end());
  std::reverse(pts.begin(), pts.end()); // ascending again

  // Accumulate panel contributions from the top; snapshot each node row when
  // every panel above it has been added.
  Matrix out = Matrix::Zero(n, n);
  Vector row = Vector::Zero(n);
  std::vector<double> card(n);
  std::size_t next_row = n; // rows snapshotted in descending node order
  for (std::size_t pi = panels.size(); pi-- > 0;) {
    const Panel& p = panels[pi];
    // nodes strictly above this panel have all of their panels accumulated
    while (next_row > p.row + 1) {
      --next_row;
      out.row(next_row) = row.transpose();
    }
    for (std::size_t q = 0; q < sub.size(); ++q) {
      const std::size_t pt = pi * sub.size() + q;
      const double t = pts[pt];
      const double glw = (p.b - p.a) * sub.w[q];
      // Lagrange cardinals via the barycentric form
      double den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        card[j] = dom.radial_bary(j) / (t - dom.radial.x[j]);
        den += card[j];
      }
      const Complex common = glw * u2[pt] * dom.measure(t) / den;
      for (std::size_t j = 0; j < n; ++j) row(j) += common * card[j];
    }
  }
  while (next_row > 0) {
    --next_row;
    out.row(next_row) = row.transpose();
  }
  return out;
}

} // namespace

ModalGreen make_modal_green(const ModalDomain& dom, Bc bc, const SpectralPoint& z) {
  ModalGreen g;
  g.bc = bc;
  g.z = z;
  g.per_mode.reserve(dom.n_modes());
  for (int i = 0; i < dom.n_modes(); ++i) {
    g.per_mode.push_back(radial_solutions(dom, dom.mode_at(i), bc, z));
    g.tail_weights.push_back(make_tail_weights(dom, dom.mode_at(i), bc, z));
    g.any_eigenvalue_flag |= g.per_mode.back().eigenvalue_flag;
  }
  return g;
}

KernelValue green_kernel(const ModalDomain& dom, Bc bc, const SpectralPoint& z, double r,
                         double theta, double rp, double thetap) {
  if (r == rp && theta == thetap)
    throw std::invalid_argument("green_kernel: diagonal evaluation excluded");
  const double lo = std::min(r, rp), hi = std::max(r, rp);

  KernelValue kv;
  double last = 0.0;
  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    const int n = dom.mode_at(idx);
    const RadialSolutionPair p = radial_solutions_at(dom, n, bc, z, {lo, hi});
    const Complex g = -p.regular[0] * p.matched[1] / p.wronskian_norm;
    Complex term;
    if (dom.kind == DomainKind::Disk) {
      term = g * std::exp(Complex(0.0, n * (theta - thetap))) / (2.0 * M_PI);
    } else {
      term = g / (4.0 * M_PI);
    }
    kv.value += term;
    if (std::abs(n) == dom.mode_cutoff) last = std::max(last, std::abs(term));
  }
  kv.truncation_flag = dom.mode_cutoff > 0 && last > 1e-10 * std::max(std::abs(kv.value), 1e-30);
  return kv;
}

ModeValue free_dtn_mode(const ModalDomain& dom, int mode, const SpectralPoint& z) {
  const RadialSolutionPair p = radial_solutions_at(dom, mode, Bc::Dirichlet, z, {});
  ModeValue mv;
  mv.eigenvalue_flag =
      std::abs(p.regular_at_1) < 1e-12 * std::max(1.0, std::abs(p.regular_deriv_at_1));
  if (!mv.eigenvalue_flag) mv.value = -p.regular_deriv_at_1 / p.regular_at_1;
  return mv;
}

ModeValue free_ntd_mode(const ModalDomain& dom, int mode, const SpectralPoint& z) {
  const RadialSolutionPair p = radial_solutions_at(dom, mode, Bc::Dirichlet, z, {});
  ModeValue mv;
  mv.eigenvalue_flag =
      std::abs(p.regular_deriv_at_1) < 1e-12 * std::max(1.0, std::abs(p.regular_at_1));
  if (!mv.eigenvalue_flag) mv.value = p.regular_at_1 / p.regular_deriv_at_1;
  return mv;
}

namespace {

// Real collocation matrix applied to a complex vector.
Vector apply_real(const RealMatrix& M, const Vector& v) {
  const RealVector re = v.real(), im = v.imag();
  Vector out = (M * re).cast<Complex>();
  out += Complex(0.0, 1.0) * (M * im).cast<Complex>();
  return out;
}

} // namespace

GreenApplied apply_free_resolvent(const ModalDomain& dom, const ModalGreen& green,
                                  const ModalField& f) {
  GreenApplied out;
  out.field = ModalField::zero(dom);
  out.dirichlet_trace.assign(dom.n_modes(), Complex(0, 0));
  out.neumann_trace.assign(dom.n_modes(), Complex(0, 0));

  const std::size_t nr = dom.radial.size();
  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    const int n = dom.mode_at(idx);
    if (!f.has_mode(n)) continue;
    const Vector& fn = f.mode(n);
    if (fn.isZero(0.0)) continue;
    const RadialSolutionPair& p = green.per_mode[idx];

    Vector q1(nr);
    for (std::size_t i = 0; i < nr; ++i)
      q1(i) = p.regular[i] * fn(i) * dom.measure(dom.radial.x[i]);
    const Vector F1 = apply_real(dom.radial_ops.integrate_below, q1);
    const Vector F2 = green.tail_weights[idx] * fn;

    Vector w(nr);
    for (std::size_t i = 0; i < nr; ++i)
      w(i) = -(p.matched[i] * F1(i) + p.regular[i] * F2(i)) / p.wronskian_norm;
    out.field.mode(n) = w;

    Complex full(0.0, 0.0);
    for (std::size_t i = 0; i < nr; ++i) full += dom.radial.w[i] * q1(i);
    out.dirichlet_trace[idx] = -p.matched_at_1 * full / p.wronskian_norm;
    out.neumann_trace[idx] = -p.matched_deriv_at_1 * full / p.wronskian_norm;
  }
  return out;
}

BoundaryTraceKernels boundary_trace_kernels(const ModalDomain& dom, const ModalGreen& green_d,
                                            const ModalGreen& green_n) {
  if (green_d.bc != Bc::Dirichlet || green_n.bc != Bc::Neumann)
    throw std::invalid_argument("boundary_trace_kernels: pass (Dirichlet, Neumann) machinery");

  const std::size_t nb = dom.boundary.size();
  const std::size_t nr = dom.radial.size();
  QuadratureGrid interior = (dom.kind == DomainKind::Disk)
                                ? disk_product(dom.radial, dom.boundary)
                                : [&] {
                                    QuadratureGrid g = dom.radial;
                                    g.geometry = GridGeometry::RadialBall;
                                    for (std::size_t i = 0; i < g.size(); ++i)
                                      g.w[i] *= 4.0 * M_PI * g.x[i] * g.x[i];
                                    return g;
                                  }();
  const std::size_t ni = interior.size();

  BoundaryTraceKernels out;
  out.a_dirichlet.entries = Matrix::Zero(nb, ni);
  out.a_dirichlet.row_grid = dom.boundary;
  out.a_dirichlet.col_grid = interior;
  out.b_neumann.entries = Matrix::Zero(ni, nb);
  out.b_neumann.row_grid = interior;
  out.b_neumann.col_grid = dom.boundary;

  if (dom.kind == DomainKind::BallRadial) {
    const RadialSolutionPair& pd = green_d.per_mode[0];
    const RadialSolutionPair& pn = green_n.per_mode[0];
    for (std::size_t i = 0; i < nr; ++i) {
      out.a_dirichlet.entries(0, i) =
          -pd.regular[i] * pd.matched_deriv_at_1 / pd.wronskian_norm / (4.0 * M_PI);
      out.b_neumann.entries(i, 0) =
          -pn.regular[i] * pn.matched_at_1 / pn.wronskian_norm / (4.0 * M_PI);
    }
    return out;
  }

  const std::size_t nth = nb; // product grid angular count equals the boundary rule
  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    const int n = dom.mode_at(idx);
    const RadialSolutionPair& pd = green_d.per_mode[idx];
    const RadialSolutionPair& pn = green_n.per_mode[idx];
    std::vector<Complex> phase(nb);
    for (std::size_t p = 0; p < nb; ++p)
      phase[p] = std::exp(Complex(0.0, n * dom.boundary.x[p]));
    for (std::size_t i = 0; i < nr; ++i) {
      const Complex ad = -pd.regular[i] * pd.matched_deriv_at_1 / pd.wronskian_norm / (2.0 * M_PI);
      const Complex bn = -pn.regular[i] * pn.matched_at_1 / pn.wronskian_norm / (2.0 * M_PI);
      for (std::size_t j = 0; j < nth; ++j) {
        const std::size_t q = i * nth + j;
        for (std::size_t p = 0; p < nb; ++p) {
          out.a_dirichlet.entries(p, q) += ad * phase[p] * std::conj(phase[j]);
          out.b_neumann.entries(q, p) += bn * phase[j] * std::conj(phase[p]);
        }
      }
    }
  }
  return out;
}

BvpSolution solve_helmholtz_bvp(const ModalDomain& dom, Bc bc,
                                const std::vector<Complex>& boundary_modes,
                                const SpectralPoint& z) {
  if (boundary_modes.size() != static_cast<std::size_t>(dom.n_modes()))
    throw std::invalid_argument("solve_helmholtz_bvp: one coefficient per domain mode required");

  BvpSolution sol;
  sol.field = ModalField::zero(dom);
  sol.dirichlet_trace.assign(dom.n_modes(), Complex(0, 0));
  sol.neumann_trace.assign(dom.n_modes(), Complex(0, 0));

  for (int idx = 0; idx < dom.n_modes(); ++idx) {
    const Complex c = boundary_modes[idx];
    if (c == Complex(0.0, 0.0)) continue;
    const int n = dom.mode_at(idx);
    const RadialSolutionPair p = radial_solutions(dom, n, bc, z);
    const Complex denom = (bc == Bc::Dirichlet) ? p.regular_at_1 : p.regular_deriv_at_1;
    if (std::abs(denom) < 1e-12 * std::max(1.0, std::abs(p.regular_at_1) +
                                                    std::abs(p.regular_deriv_at_1))) {
      sol.eigenvalue_flag = true;
      continue;
    }
    const Complex scale = c / denom;
    Vector w(dom.radial.size());
    for (std::size_t i = 0; i < dom.radial.size(); ++i) w(i) = scale * p.regular[i];
    sol.field.mode(n) = w;
    sol.dirichlet_trace[idx] = scale * p.regular_at_1;
    sol.neumann_trace[idx] = scale * p.regular_deriv_at_1;
  }
  return sol;
}

} // namespace detlab::geom
