#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "detlab/potential.hpp"
#include "detlab/types.hpp"

namespace detlab::cli {

/// Config validation failure; the message carries the offending field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { JostPais1d, Ratio1d, DeterminantChain, ReciprocalChain, DetSwap, DtnInverse };
enum class Geometry { Halfline, Disk, BallRadial };

struct Resolution {
  int n = 0; // 1D Nystrom size
  int n_radial = 0;
  int mode_cutoff = 0;
  int n_boundary = 0;

  std::string describe(Geometry g) const;
};

struct Potential1d {
  std::string name; // square_well | gaussian
  Complex depth{};  // square_well
  double width = 0.0;
  double amplitude = 0.0, center = 0.0; // gaussian
};

struct PotentialNd {
  std::vector<Complex> couplings;
  std::vector<pot::FactorSpec> left_factors;
  std::vector<pot::FactorSpec> right_factors;
};

struct OracleSpec {
  bool enabled = false;
  int n_radial = 48;
  int n_theta = 64;
  int refined_n_radial = 96;
  int refined_n_theta = 128;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DeterminantChain;
  Geometry geometry = Geometry::Disk;
  std::vector<Complex> z_list;
  Resolution resolution;
  std::vector<Resolution> ladder;

  double tol_exact = 1e-8;
  double tol_oracle = 1e-4;
  double tol_swap = 1e-10;
  double tol_modal = 1e-10;

  double halfline_length = 30.0;
  std::optional<Potential1d> potential_1d;
  std::optional<PotentialNd> potential_nd;
  OracleSpec oracle;

  int trials = 200;
  std::uint64_t seed = 1;
  int mode_range = 20;

  std::uint64_t config_hash = 0;
};

/// Parse and validate a config from JSON text. Tolerance tiers absent from the
/// config fall back to DETLAB_TOL_EXACT / DETLAB_TOL_ORACLE when set.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::string experiment_name(ExperimentKind k);
std::string geometry_name(Geometry g);

} // namespace detlab::cli
