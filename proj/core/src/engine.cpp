#include "detlab/engine.hpp"

#include <cmath>
#include <mutex>
#include <thread>

namespace detlab::cli {

namespace {

using lab::IdentityReport;

halfline::LocalPotential make_1d(const Potential1d& p) {
  if (p.name == "square_well") return halfline::square_well(p.depth, p.width);
  return halfline::gaussian_bump(p.amplitude, p.center, p.width);
}

pot::FactorSpec truncate_spec(const pot::FactorSpec& spec, int cutoff) {
  pot::FactorSpec out;
  for (const auto& [m, c] : spec.modes)
    if (std::abs(m) <= cutoff) out.modes.emplace_back(m, c);
  if (out.modes.empty()) out.modes.emplace_back(0, std::vector<Complex>{Complex(0, 0)});
  return out;
}

IdentityReport jost_pais_report(const ExperimentConfig& cfg,
                                const halfline::LocalPotential& V, Complex z) {
  const SpectralPoint sp(z);
  IdentityReport rep;
  rep.z = sp;
  rep.resolution = cfg.resolution.describe(cfg.geometry);

  const auto dd = halfline::bs_determinant_halfline(Bc::Dirichlet, V, sp,
                                                    cfg.halfline_length, cfg.resolution.n);
  const auto dn = halfline::bs_determinant_halfline(Bc::Neumann, V, sp,
                                                    cfg.halfline_length, cfg.resolution.n);
  const auto m = halfline::m_functions(V, sp);
  const Complex ref_d = m.jost_value;
  const Complex ref_n = m.jost_slope / (Complex(0, 1) * sp.root);

  rep.quantities = {{"dirichlet_det", dd.value},
                    {"dirichlet_reference", ref_d},
                    {"neumann_det", dn.value},
                    {"neumann_reference", ref_n}};
  rep.residuals = {{"dirichlet", residual(dd.value, ref_d)},
                   {"neumann", residual(dn.value, ref_n)}};
  if (dd.truncation_flag || dn.truncation_flag) rep.flags.push_back("support-truncation");
  if (m.dirichlet_eigenvalue_hit || m.neumann_eigenvalue_hit) {
    rep.flags.push_back("eigenvalue-proximity");
    rep.excluded = true;
  }
  return rep;
}

IdentityReport ratio_report(const ExperimentConfig& cfg, const halfline::LocalPotential& V,
                            Complex z) {
  const SpectralPoint sp(z);
  const auto r = halfline::ratio_identity_check(V, sp, cfg.halfline_length, cfg.resolution.n);
  IdentityReport rep;
  rep.z = sp;
  rep.resolution = cfg.resolution.describe(cfg.geometry);
  rep.quantities = {{"det_ratio", r.det_ratio},
                    {"jost_ratio", r.jost_ratio},
                    {"m_dirichlet_ratio", r.m_dirichlet_ratio},
                    {"m_neumann_ratio", r.m_neumann_ratio}};
  rep.residuals = {{"det_vs_jost", residual(r.det_ratio, r.jost_ratio)},
                   {"det_vs_m_dirichlet", residual(r.det_ratio, r.m_dirichlet_ratio)},
                   {"det_vs_m_neumann", residual(r.det_ratio, r.m_neumann_ratio)},
                   {"max_pairwise", r.max_residual}};
  if (r.dirichlet_eigenvalue_flag) {
    rep.flags.push_back("dirichlet-eigenvalue");
    rep.excluded = true;
  }
  return rep;
}

IdentityReport determinant_chain_report(const ExperimentConfig& cfg, const geom::ModalDomain& dom,
                                const pot::FiniteRankPotential& V, Complex z) {
  const SpectralPoint sp(z);
  IdentityReport rep = lab::verify_determinant_chain(dom, V, sp);
  rep.resolution = cfg.resolution.describe(cfg.geometry);
  if (cfg.oracle.enabled) {
    const Complex lhs = rep.quantities.at(0).second;
    lab::NystromParams base{cfg.oracle.n_radial, cfg.oracle.n_theta, true};
    lab::NystromParams fine{cfg.oracle.refined_n_radial, cfg.oracle.refined_n_theta, true};
    const Complex o1 = lab::nystrom_interior_det(dom, Bc::Neumann, V, sp, base).value /
                       lab::nystrom_interior_det(dom, Bc::Dirichlet, V, sp, base).value;
    const Complex o2 = lab::nystrom_interior_det(dom, Bc::Neumann, V, sp, fine).value /
                       lab::nystrom_interior_det(dom, Bc::Dirichlet, V, sp, fine).value;
    const double r1 = residual(lhs, o1), r2 = residual(lhs, o2);
    rep.quantities.emplace_back("nystrom_oracle", o1);
    rep.quantities.emplace_back("nystrom_oracle_refined", o2);
    rep.quantities.emplace_back("oracle_improvement_factor",
                                Complex(r2 > 0.0 ? r1 / r2 : INFINITY, 0.0));
    rep.residuals.emplace_back("lhs_vs_oracle", r1);
    rep.residuals.emplace_back("lhs_vs_oracle_refined", r2);
  }
  return rep;
}

IdentityReport reciprocal_chain_report(const ExperimentConfig& cfg, const geom::ModalDomain& dom,
                               const pot::FiniteRankPotential& V, Complex z) {
  const SpectralPoint sp(z);
  IdentityReport rep = lab::verify_reciprocal_chain(dom, V, sp);
  rep.resolution = cfg.resolution.describe(cfg.geometry);
  // Reciprocity against the forward chain: the two boundary determinants are
  // exact reciprocals.
  const IdentityReport fwd = lab::verify_determinant_chain(dom, V, sp);
  const Complex prod = rep.quantities.at(1).second * fwd.quantities.at(1).second;
  rep.quantities.emplace_back("reciprocity_product", prod);
  rep.residuals.emplace_back("reciprocity", std::abs(prod - Complex(1.0, 0.0)));
  rep.excluded = rep.excluded || fwd.excluded;
  return rep;
}

IdentityReport dtn_inverse_report(const ExperimentConfig& cfg, const geom::ModalDomain& dom,
                                  Complex z) {
  const SpectralPoint sp(z);
  IdentityReport rep;
  rep.z = sp;
  rep.resolution = cfg.resolution.describe(cfg.geometry);
  double dev = 0.0;
  bool flagged = false;
  const int range = (dom.kind == geom::DomainKind::Disk) ? cfg.mode_range : 0;
  for (int n = -range; n <= range; ++n) {
    const auto dtn = geom::free_dtn_mode(dom, n, sp);
    const auto ntd = geom::free_ntd_mode(dom, n, sp);
    if (dtn.eigenvalue_flag || ntd.eigenvalue_flag) {
      flagged = true;
      continue;
    }
    dev = std::max(dev, std::abs(ntd.value + 1.0 / dtn.value));
  }
  rep.quantities = {{"max_modal_deviation", Complex(dev, 0.0)}};
  rep.residuals = {{"ntd_vs_dtn_inverse", dev}};
  if (flagged) {
    rep.flags.push_back("eigenvalue-proximity");
    rep.excluded = true;
  }
  return rep;
}

IdentityReport det_swap_report(const ExperimentConfig& cfg) {
  const auto st = lab::det_swap_property(cfg.trials, cfg.seed);
  IdentityReport rep;
  rep.z = SpectralPoint(Complex(0, 0));
  rep.resolution = "trials=" + std::to_string(st.trials);
  rep.quantities = {{"max_rel_deviation", Complex(st.max_rel_deviation, 0.0)}};
  rep.residuals = {{"swap_deviation", st.max_rel_deviation}};
  return rep;
}

void finalize_summary(const ExperimentConfig& cfg, RunReport& out) {
  out.summary = Summary{};
  for (const auto& rep : out.reports) {
    if (rep.excluded) {
      ++out.summary.excluded_count;
      continue;
    }
    for (const auto& [name, value] : rep.residuals) {
      out.summary.max_residual = std::max(out.summary.max_residual, value);
      if (value > tolerance_for(cfg, name)) out.summary.pass = false;
    }
  }
}

std::vector<IdentityReport> reports_for(const ExperimentConfig& cfg, const Resolution& res,
                                        int jobs) {
  ExperimentConfig local = cfg;
  local.resolution = res;

  // Experiment-wide fixtures built once, shared read-only across workers.
  halfline::LocalPotential v1d;
  geom::ModalDomain dom;
  pot::FiniteRankPotential vnd;
  const bool is_1d = cfg.geometry == Geometry::Halfline;
  if (is_1d) {
    v1d = make_1d(*cfg.potential_1d);
  } else {
    Resolution r = res;
    if (cfg.kind == ExperimentKind::DtnInverse && cfg.geometry == Geometry::Disk) {
      r.mode_cutoff = cfg.mode_range;
      r.n_boundary = 2 * cfg.mode_range + 2;
    }
    dom = build_domain(cfg.geometry, r);
    if (cfg.potential_nd) vnd = build_potential_nd(local, dom);
  }

  std::vector<IdentityReport> reports(cfg.z_list.size());
  auto work = [&](std::size_t i) {
    const Complex z = cfg.z_list[i];
    switch (cfg.kind) {
      case ExperimentKind::JostPais1d: reports[i] = jost_pais_report(local, v1d, z); break;
      case ExperimentKind::Ratio1d: reports[i] = ratio_report(local, v1d, z); break;
      case ExperimentKind::DeterminantChain: reports[i] = determinant_chain_report(local, dom, vnd, z); break;
      case ExperimentKind::ReciprocalChain: reports[i] = reciprocal_chain_report(local, dom, vnd, z); break;
      case ExperimentKind::DtnInverse: reports[i] = dtn_inverse_report(local, dom, z); break;
      case ExperimentKind::DetSwap: break; // handled by the caller
    }
  };

  const std::size_t nz = cfg.z_list.size();
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(nz)));
  if (workers == 1) {
    for (std::size_t i = 0; i < nz; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < nz; i += workers) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return reports;
}

} // namespace

double tolerance_for(const ExperimentConfig& cfg, const std::string& name) {
  if (name == "swap_deviation") return cfg.tol_swap;
  if (name == "ntd_vs_dtn_inverse") return cfg.tol_modal;
  if (cfg.kind == ExperimentKind::JostPais1d || cfg.kind == ExperimentKind::Ratio1d)
    return cfg.tol_oracle;
  if (name.find("oracle") != std::string::npos) return cfg.tol_oracle;
  return cfg.tol_exact;
}

halfline::LocalPotential build_potential_1d(const ExperimentConfig& cfg) {
  if (!cfg.potential_1d) throw ConfigError("potential: missing 1D potential");
  return make_1d(*cfg.potential_1d);
}

geom::ModalDomain build_domain(Geometry g, const Resolution& res) {
  if (g == Geometry::Disk) return geom::make_disk(res.n_radial, res.mode_cutoff, res.n_boundary);
  if (g == Geometry::BallRadial) return geom::make_ball_radial(res.n_radial);
  throw ConfigError("geometry: no modal domain on the half-line");
}

pot::FiniteRankPotential build_potential_nd(const ExperimentConfig& cfg,
                                            const geom::ModalDomain& dom) {
  if (!cfg.potential_nd) throw ConfigError("potential: missing finite-rank potential");
  std::vector<pot::FactorSpec> left, right;
  for (const auto& s : cfg.potential_nd->left_factors)
    left.push_back(truncate_spec(s, dom.mode_cutoff));
  for (const auto& s : cfg.potential_nd->right_factors)
    right.push_back(truncate_spec(s, dom.mode_cutoff));
  try {
    return pot::make_potential(cfg.potential_nd->couplings, left, right, dom);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
}

RunReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  RunReport out;
  out.experiment = experiment_name(cfg.kind);
  out.geometry = geometry_name(cfg.geometry);
  out.config_hash = cfg.config_hash;
  out.version = kVersion;

  if (cfg.kind == ExperimentKind::DetSwap) {
    out.reports.push_back(det_swap_report(cfg));
  } else {
    out.reports = reports_for(cfg, cfg.resolution, jobs);
  }
  finalize_summary(cfg, out);
  return out;
}

RunReport run_convergence(const ExperimentConfig& cfg, int jobs) {
  if (cfg.ladder.size() < 3) throw ConfigError("ladder: at least 3 rungs required");
  if (cfg.kind == ExperimentKind::DetSwap || cfg.kind == ExperimentKind::DtnInverse)
    throw ConfigError("experiment: no convergence ladder for this kind");

  RunReport out;
  out.experiment = experiment_name(cfg.kind);
  out.geometry = geometry_name(cfg.geometry);
  out.config_hash = cfg.config_hash;
  out.version = kVersion;

  const bool is_1d = cfg.geometry == Geometry::Halfline;
  std::vector<std::vector<IdentityReport>> rungs;
  for (const Resolution& res : cfg.ladder) rungs.push_back(reports_for(cfg, res, jobs));
  out.reports = rungs.back();

  std::vector<double> residuals;
  std::vector<std::string> labels;
  if (is_1d) {
    // The ODE route is the per-rung reference, so each rung carries its own residual.
    for (std::size_t k = 0; k < rungs.size(); ++k) {
      double r = 0.0;
      for (const auto& rep : rungs[k])
        if (!rep.excluded) r = std::max(r, rep.max_residual());
      residuals.push_back(r);
      labels.push_back(cfg.ladder[k].describe(cfg.geometry));
    }
  } else {
    // Successive differences of the leading quantity.
    for (std::size_t k = 0; k + 1 < rungs.size(); ++k) {
      double r = 0.0;
      for (std::size_t i = 0; i < rungs[k].size(); ++i)
        if (!rungs[k][i].excluded && !rungs[k + 1][i].excluded)
          r = std::max(r, residual(rungs[k][i].quantities.at(0).second,
                                   rungs[k + 1][i].quantities.at(0).second));
      residuals.push_back(r);
      labels.push_back(cfg.ladder[k].describe(cfg.geometry));
    }
  }

  constexpr double kFloor = 1e-13;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    ConvergenceRow row;
    row.resolution = labels[k];
    row.residual = residuals[k];
    row.saturated = residuals[k] < kFloor;
    if (k + 1 < residuals.size() && !row.saturated && residuals[k + 1] >= kFloor) {
      row.order = std::log2(residuals[k] / residuals[k + 1]);
      row.has_order = true;
    }
    out.convergence.push_back(row);
  }

  finalize_summary(cfg, out);
  // Tolerance judgment applies to the finest rung only.
  if (!residuals.empty()) {
    out.summary.max_residual = residuals.back();
    out.summary.pass = true;
    const double tol =
        (cfg.kind == ExperimentKind::DeterminantChain || cfg.kind == ExperimentKind::ReciprocalChain)
            ? cfg.tol_exact
            : cfg.tol_oracle;
    if (residuals.back() > tol) out.summary.pass = false;
  }
  return out;
}

} // namespace detlab::cli
