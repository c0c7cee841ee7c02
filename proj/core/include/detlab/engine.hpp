#pragma once

#include "detlab/config.hpp"
#include "detlab/halfline.hpp"
#include "detlab/report.hpp"

namespace detlab::cli {

/// Evaluate the configured experiment over its z list. `jobs` parallelizes
/// across spectral points; report ordering follows z_list regardless.
RunReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Evaluate the experiment along the resolution ladder and attach per-rung
/// residuals with empirical order estimates.
RunReport run_convergence(const ExperimentConfig& cfg, int jobs = 1);

/// Tolerance tier applied to a residual entry of this experiment.
double tolerance_for(const ExperimentConfig& cfg, const std::string& residual_name);

halfline::LocalPotential build_potential_1d(const ExperimentConfig& cfg);
geom::ModalDomain build_domain(Geometry g, const Resolution& res);
pot::FiniteRankPotential build_potential_nd(const ExperimentConfig& cfg,
                                            const geom::ModalDomain& dom);

} // namespace detlab::cli
