#pragma once

#include <string>
#include <vector>

#include "detlab/config.hpp"
#include "detlab/identity_lab.hpp"

namespace detlab::cli {

struct Summary {
  double max_residual = 0.0;
  bool pass = true;
  int excluded_count = 0;
};

struct ConvergenceRow {
  std::string resolution;
  double residual = 0.0;
  double order = 0.0; // log2(res_k / res_{k+1}); meaningful when has_order
  bool has_order = false;
  bool saturated = false; // at the rounding floor
};

struct RunReport {
  std::string experiment;
  std::string geometry;
  std::vector<lab::IdentityReport> reports;
  std::vector<ConvergenceRow> convergence; // populated by ladder runs
  Summary summary;
  std::uint64_t config_hash = 0;
  std::string version;
};

/// Lossless structured record of a report (JSON text, deterministic bytes).
std::string to_record(const RunReport& report);
RunReport from_record(const std::string& record_text);

/// CSV with the fixed column set:
/// experiment,z_re,z_im,quantity_name,value_re,value_im,residual,resolution,flag
std::string to_csv(const RunReport& report);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace detlab::cli
