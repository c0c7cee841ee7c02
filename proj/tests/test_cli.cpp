#include <doctest.h>

#include <cstdlib>

#include "detlab/engine.hpp"
#include "detlab/report.hpp"

using namespace detlab;
using namespace detlab::cli;

namespace {

const char* kTheorem42Config = R"({
  "experiment": "theorem42",
  "geometry": "disk",
  "z_list": [[-1, 0], [-1, 1]],
  "resolution": {"n_radial": 24, "mode_cutoff": 4, "n_boundary": 12},
  "potential": {
    "couplings": [[0.85, 0], [-0.6, 0]],
    "left_factors": [
      [{"mode": 0, "coeffs": [0.9, 0, -0.9]}, {"mode": 2, "coeffs": [0, 0, 0.7, -0.7]}],
      [{"mode": 1, "coeffs": [0, 1.1, -1.1]}]
    ],
    "right_factors": [
      [{"mode": 0, "coeffs": [0.9, 0, -0.9]}, {"mode": 2, "coeffs": [0, 0, 0.7, -0.7]}],
      [{"mode": 1, "coeffs": [0, 1.1, -1.1]}]
    ]
  }
})";

const char* kZeroPotentialConfig = R"({
  "experiment": "theorem42",
  "geometry": "disk",
  "z_list": [[-1, 0]],
  "resolution": {"n_radial": 20, "mode_cutoff": 3, "n_boundary": 10},
  "potential": {
    "couplings": [[0, 0]],
    "left_factors": [[{"mode": 0, "coeffs": [1, 0, -1]}]],
    "right_factors": [[{"mode": 0, "coeffs": [1, 0, -1]}]]
  }
})";

const char* kRatioConfig = R"({
  "experiment": "ratio-1d",
  "geometry": "halfline",
  "z_list": [[-1, 0]],
  "resolution": {"n": 200},
  "ladder": [{"n": 100}, {"n": 200}, {"n": 400}],
  "halfline_length": 30.0,
  "tolerances": {"oracle_route": 1e-4},
  "potential": {"name": "square_well", "depth": [2, 0], "width": 1.0}
})";

} // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config("{nope"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment":"bogus","geometry":"disk"})"), ConfigError);

  // z on the cut rejected unless opted in
  const std::string cut = R"({
    "experiment": "dtn-inverse", "geometry": "disk",
    "z_list": [[2, 0]], "mode_range": 4})";
  CHECK_THROWS_AS(parse_config(cut), ConfigError);
  const std::string cut_ok = R"({
    "experiment": "dtn-inverse", "geometry": "disk",
    "z_list": [[-2, 0]], "mode_range": 4})";
  CHECK_NOTHROW(parse_config(cut_ok));

  const ExperimentConfig cfg = parse_config(kTheorem42Config);
  CHECK(cfg.kind == ExperimentKind::DeterminantChain);
  CHECK(cfg.geometry == Geometry::Disk);
  CHECK(cfg.z_list.size() == 2);
  CHECK(cfg.potential_nd->couplings.size() == 2);
  CHECK(cfg.config_hash != 0);

  // ladder must increase
  const std::string bad_ladder = R"({
    "experiment": "ratio-1d", "geometry": "halfline", "z_list": [[-1,0]],
    "resolution": {"n": 100}, "ladder": [{"n": 100}, {"n": 90}, {"n": 200}],
    "potential": {"name": "square_well", "depth": 2, "width": 1}})";
  CHECK_THROWS_AS(parse_config(bad_ladder), ConfigError);
}

TEST_CASE("tolerance environment overrides") {
  setenv("DETLAB_TOL_EXACT", "1e-5", 1);
  const ExperimentConfig cfg = parse_config(kTheorem42Config);
  CHECK(cfg.tol_exact == 1e-5);
  unsetenv("DETLAB_TOL_EXACT");
  const ExperimentConfig cfg2 = parse_config(kTheorem42Config);
  CHECK(cfg2.tol_exact == 1e-8);
}

TEST_CASE("run: zero potential passes with zero residuals") {
  const ExperimentConfig cfg = parse_config(kZeroPotentialConfig);
  const RunReport rep = run_experiment(cfg);
  CHECK(rep.summary.pass);
  CHECK(rep.summary.max_residual <= 1e-12);
  CHECK(rep.summary.excluded_count == 0);
  for (const auto& q : rep.reports.at(0).quantities)
    CHECK(std::abs(q.second - Complex(1, 0)) <= 1e-12);
}

TEST_CASE("run: theorem42 chain within the exact tier") {
  const ExperimentConfig cfg = parse_config(kTheorem42Config);
  const RunReport rep = run_experiment(cfg);
  CHECK(rep.summary.pass);
  CHECK(rep.summary.max_residual <= 1e-8);
  CHECK(rep.reports.size() == 2);

  // summary is recomputable from the per-z records
  double mx = 0.0;
  for (const auto& r : rep.reports)
    for (const auto& [name, v] : r.residuals) mx = std::max(mx, v);
  CHECK(mx == rep.summary.max_residual);
}

TEST_CASE("determinism: identical configs give identical bytes") {
  const ExperimentConfig cfg = parse_config(kTheorem42Config);
  const std::string r1 = to_record(run_experiment(cfg));
  const std::string r2 = to_record(run_experiment(cfg));
  CHECK(r1 == r2);

  // jobs > 1 must not change the bytes either
  const std::string r4 = to_record(run_experiment(cfg, 4));
  CHECK(r1 == r4);
}

TEST_CASE("structured record round trip") {
  const ExperimentConfig cfg = parse_config(kTheorem42Config);
  const RunReport rep = run_experiment(cfg);
  const std::string rec = to_record(rep);
  const RunReport back = from_record(rec);
  CHECK(to_record(back) == rec);
  CHECK(back.experiment == "theorem42");
  CHECK(back.config_hash == cfg.config_hash);
}

TEST_CASE("csv emission") {
  // header-only for an empty report
  RunReport empty;
  empty.experiment = "theorem42";
  const std::string header = to_csv(empty);
  CHECK(header ==
        "experiment,z_re,z_im,quantity_name,value_re,value_im,residual,resolution,flag\n");

  // single-z report: one row per quantity, residual entries alongside
  ExperimentConfig cfg = parse_config(kZeroPotentialConfig);
  const RunReport rep = run_experiment(cfg);
  const std::string csv = to_csv(rep);
  int lines = 0;
  for (char c : csv) lines += (c == '\n');
  CHECK(lines == 1 + 3); // header + three quantities
  CHECK(csv.find("lhs_ratio") != std::string::npos);
  CHECK(csv.find("boundary_det") != std::string::npos);
  CHECK(csv.find("dtn_det") != std::string::npos);
}

TEST_CASE("convergence ladder: half-line") {
  const ExperimentConfig cfg = parse_config(kRatioConfig);
  const RunReport rep = run_convergence(cfg);
  REQUIRE(rep.convergence.size() == 3);
  // residual decreases along the Nystrom ladder with positive order
  CHECK(rep.convergence[0].residual > rep.convergence[1].residual);
  CHECK(rep.convergence[1].residual > rep.convergence[2].residual);
  for (std::size_t k = 0; k + 1 < rep.convergence.size(); ++k)
    if (rep.convergence[k].has_order) CHECK(rep.convergence[k].order > 0.0);
  CHECK(rep.summary.pass);
}

TEST_CASE("convergence ladder: disk mode cutoff") {
  std::string cfg_text = R"({
    "experiment": "theorem42",
    "geometry": "disk",
    "z_list": [[-1, 0]],
    "resolution": {"n_radial": 24, "mode_cutoff": 12, "n_boundary": 28},
    "ladder": [
      {"n_radial": 24, "mode_cutoff": 3, "n_boundary": 28},
      {"n_radial": 24, "mode_cutoff": 6, "n_boundary": 28},
      {"n_radial": 24, "mode_cutoff": 9, "n_boundary": 28},
      {"n_radial": 24, "mode_cutoff": 12, "n_boundary": 28}
    ],
    "potential": {
      "couplings": [[0.9, 0]],
      "left_factors": [[
        {"mode": 0, "coeffs": [1, -1]},
        {"mode": 1, "coeffs": [0, 0.5, -0.5]},
        {"mode": 2, "coeffs": [0, 0, 0.25, -0.25]},
        {"mode": 3, "coeffs": [0, 0, 0, 0.125, -0.125]},
        {"mode": 4, "coeffs": [0, 0, 0, 0, 0.0625, -0.0625]},
        {"mode": 5, "coeffs": [0, 0, 0, 0, 0, 0.03125, -0.03125]},
        {"mode": 6, "coeffs": [0, 0, 0, 0, 0, 0, 0.015625, -0.015625]},
        {"mode": 7, "coeffs": [0, 0, 0, 0, 0, 0, 0, 0.0078125, -0.0078125]},
        {"mode": 8, "coeffs": [0, 0, 0, 0, 0, 0, 0, 0, 0.00390625, -0.00390625]}
      ]],
      "right_factors": [[
        {"mode": 0, "coeffs": [1, -1]},
        {"mode": 1, "coeffs": [0, 0.5, -0.5]},
        {"mode": 2, "coeffs": [0, 0, 0.25, -0.25]},
        {"mode": 3, "coeffs": [0, 0, 0, 0.125, -0.125]},
        {"mode": 4, "coeffs": [0, 0, 0, 0, 0.0625, -0.0625]},
        {"mode": 5, "coeffs": [0, 0, 0, 0, 0, 0.03125, -0.03125]},
        {"mode": 6, "coeffs": [0, 0, 0, 0, 0, 0, 0.015625, -0.015625]},
        {"mode": 7, "coeffs": [0, 0, 0, 0, 0, 0, 0, 0.0078125, -0.0078125]},
        {"mode": 8, "coeffs": [0, 0, 0, 0, 0, 0, 0, 0, 0.00390625, -0.00390625]}
      ]]
    }
  })";
  const ExperimentConfig cfg = parse_config(cfg_text);
  const RunReport rep = run_convergence(cfg);
  REQUIRE(rep.convergence.size() == 3);
  // spectral decay: order estimates increase along the ladder
  CHECK(rep.convergence[0].residual > rep.convergence[1].residual);
  if (rep.convergence[0].has_order && rep.convergence[1].has_order)
    CHECK(rep.convergence[1].order >= rep.convergence[0].order);
}

TEST_CASE("convergence ladder: free case saturates") {
  const std::string cfg_text = R"({
    "experiment": "ratio-1d", "geometry": "halfline", "z_list": [[-1, 0]],
    "resolution": {"n": 400},
    "ladder": [{"n": 100}, {"n": 200}, {"n": 400}],
    "potential": {"name": "square_well", "depth": [0, 0], "width": 1.0}})";
  const RunReport rep = run_convergence(parse_config(cfg_text));
  for (const auto& row : rep.convergence) {
    CHECK(row.saturated);
    CHECK(row.residual <= 1e-13);
  }
}

TEST_CASE("det-swap and dtn-inverse experiments") {
  const std::string swap_cfg = R"({
    "experiment": "det-swap", "geometry": "disk", "trials": 40, "seed": 7})";
  const RunReport swap = run_experiment(parse_config(swap_cfg));
  CHECK(swap.summary.pass);
  CHECK(swap.summary.max_residual <= 1e-10);

  const std::string dtn_cfg = R"({
    "experiment": "dtn-inverse", "geometry": "ball-radial",
    "z_list": [[-1, 0], [-2, 0.5]], "mode_range": 0})";
  const RunReport dtn = run_experiment(parse_config(dtn_cfg));
  CHECK(dtn.summary.pass);
  CHECK(dtn.summary.max_residual <= 1e-10);
}
