#include "detlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace detlab::cli {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Complex parse_complex(const json& j, const std::string& field) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw ConfigError(field + ": expected a number or [re, im]");
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "jost-pais-1d") return ExperimentKind::JostPais1d;
  if (s == "ratio-1d") return ExperimentKind::Ratio1d;
  if (s == "theorem42") return ExperimentKind::DeterminantChain;
  if (s == "remark43") return ExperimentKind::ReciprocalChain;
  if (s == "det-swap") return ExperimentKind::DetSwap;
  if (s == "dtn-inverse") return ExperimentKind::DtnInverse;
  throw ConfigError("experiment: unknown kind '" + s + "'");
}

Geometry parse_geometry(const std::string& s) {
  if (s == "halfline") return Geometry::Halfline;
  if (s == "disk") return Geometry::Disk;
  if (s == "ball-radial") return Geometry::BallRadial;
  throw ConfigError("geometry: unknown geometry '" + s + "'");
}

Resolution parse_resolution(const json& j, Geometry g, const std::string& field) {
  Resolution r;
  if (!j.is_object()) throw ConfigError(field + ": expected an object");
  if (g == Geometry::Halfline) {
    if (!j.contains("n")) throw ConfigError(field + ".n: required for half-line runs");
    r.n = j.at("n").get<int>();
    if (r.n < 16) throw ConfigError(field + ".n: must be >= 16");
    return r;
  }
  for (const char* key : {"n_radial", "mode_cutoff", "n_boundary"})
    if (!j.contains(key) && !(g == Geometry::BallRadial && std::string(key) != "n_radial"))
      throw ConfigError(field + "." + key + ": required");
  r.n_radial = j.at("n_radial").get<int>();
  if (r.n_radial < 4) throw ConfigError(field + ".n_radial: must be >= 4");
  if (g == Geometry::Disk) {
    r.mode_cutoff = j.at("mode_cutoff").get<int>();
    r.n_boundary = j.at("n_boundary").get<int>();
    if (r.mode_cutoff < 0) throw ConfigError(field + ".mode_cutoff: must be >= 0");
    if (r.n_boundary < 2 * r.mode_cutoff + 2)
      throw ConfigError(field + ".n_boundary: must exceed twice the mode cutoff");
  }
  return r;
}

pot::FactorSpec parse_factor(const json& j, const std::string& field) {
  pot::FactorSpec spec;
  if (!j.is_array() || j.empty()) throw ConfigError(field + ": expected a non-empty array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("mode") || !e.contains("coeffs"))
      throw ConfigError(f + ": expected {mode, coeffs}");
    const int mode = e.at("mode").get<int>();
    std::vector<Complex> coeffs;
    for (std::size_t c = 0; c < e.at("coeffs").size(); ++c)
      coeffs.push_back(parse_complex(e.at("coeffs")[c], f + ".coeffs"));
    if (coeffs.empty()) throw ConfigError(f + ".coeffs: empty");
    spec.modes.emplace_back(mode, std::move(coeffs));
  }
  return spec;
}

double env_tolerance(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  char* end = nullptr;
  const double parsed = std::strtod(v, &end);
  if (end == v || parsed <= 0.0) return fallback;
  return parsed;
}

} // namespace

std::string Resolution::describe(Geometry g) const {
  std::ostringstream os;
  if (g == Geometry::Halfline) {
    os << "n=" << n;
  } else if (g == Geometry::Disk) {
    os << "r" << n_radial << " m" << mode_cutoff << " b" << n_boundary;
  } else {
    os << "r" << n_radial;
  }
  return os.str();
}

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::JostPais1d: return "jost-pais-1d";
    case ExperimentKind::Ratio1d: return "ratio-1d";
    case ExperimentKind::DeterminantChain: return "theorem42";
    case ExperimentKind::ReciprocalChain: return "remark43";
    case ExperimentKind::DetSwap: return "det-swap";
    case ExperimentKind::DtnInverse: return "dtn-inverse";
  }
  return "?";
}

std::string geometry_name(Geometry g) {
  switch (g) {
    case Geometry::Halfline: return "halfline";
    case Geometry::Disk: return "disk";
    case Geometry::BallRadial: return "ball-radial";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.config_hash = fnv1a(text);

  if (!j.contains("experiment")) throw ConfigError("experiment: required");
  cfg.kind = parse_kind(j.at("experiment").get<std::string>());
  if (!j.contains("geometry")) throw ConfigError("geometry: required");
  cfg.geometry = parse_geometry(j.at("geometry").get<std::string>());

  const bool needs_z = cfg.kind != ExperimentKind::DetSwap;
  if (needs_z) {
    if (!j.contains("z_list") || !j.at("z_list").is_array() || j.at("z_list").empty())
      throw ConfigError("z_list: non-empty array required");
    for (std::size_t i = 0; i < j.at("z_list").size(); ++i)
      cfg.z_list.push_back(parse_complex(j.at("z_list")[i], "z_list[" + std::to_string(i) + "]"));
  }

  const bool needs_resolution =
      cfg.kind != ExperimentKind::DetSwap && cfg.kind != ExperimentKind::DtnInverse;
  if (needs_resolution) {
    if (!j.contains("resolution")) throw ConfigError("resolution: required");
    cfg.resolution = parse_resolution(j.at("resolution"), cfg.geometry, "resolution");
  } else if (j.contains("resolution")) {
    cfg.resolution = parse_resolution(j.at("resolution"), cfg.geometry, "resolution");
  } else if (cfg.kind == ExperimentKind::DtnInverse) {
    cfg.resolution.n_radial = 32; // radial rule is incidental for the modal check
  }

  if (j.contains("ladder")) {
    if (!j.at("ladder").is_array() || j.at("ladder").size() < 3)
      throw ConfigError("ladder: at least 3 rungs required");
    for (std::size_t i = 0; i < j.at("ladder").size(); ++i)
      cfg.ladder.push_back(
          parse_resolution(j.at("ladder")[i], cfg.geometry, "ladder[" + std::to_string(i) + "]"));
    for (std::size_t i = 1; i < cfg.ladder.size(); ++i) {
      const bool inc = (cfg.geometry == Geometry::Halfline)
                           ? cfg.ladder[i].n > cfg.ladder[i - 1].n
                           : cfg.ladder[i].n_radial >= cfg.ladder[i - 1].n_radial &&
                                 (cfg.geometry == Geometry::BallRadial ||
                                  cfg.ladder[i].mode_cutoff > cfg.ladder[i - 1].mode_cutoff ||
                                  cfg.ladder[i].n_radial > cfg.ladder[i - 1].n_radial);
      if (!inc) throw ConfigError("ladder: rungs must be strictly increasing");
    }
  }

  cfg.tol_exact = env_tolerance("DETLAB_TOL_EXACT", cfg.tol_exact);
  cfg.tol_oracle = env_tolerance("DETLAB_TOL_ORACLE", cfg.tol_oracle);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (t.contains("exact_route")) cfg.tol_exact = t.at("exact_route").get<double>();
    if (t.contains("oracle_route")) cfg.tol_oracle = t.at("oracle_route").get<double>();
    if (t.contains("swap")) cfg.tol_swap = t.at("swap").get<double>();
    if (t.contains("modal")) cfg.tol_modal = t.at("modal").get<double>();
    for (double tol : {cfg.tol_exact, cfg.tol_oracle, cfg.tol_swap, cfg.tol_modal})
      if (!(tol > 0.0)) throw ConfigError("tolerances: must be positive");
  }

  const bool is_1d = cfg.geometry == Geometry::Halfline;
  if (cfg.kind == ExperimentKind::JostPais1d || cfg.kind == ExperimentKind::Ratio1d) {
    if (!is_1d) throw ConfigError("geometry: 1D experiments require the half-line");
    if (!j.contains("potential")) throw ConfigError("potential: required");
    const json& p = j.at("potential");
    Potential1d pd;
    if (!p.contains("name")) throw ConfigError("potential.name: required");
    pd.name = p.at("name").get<std::string>();
    if (pd.name == "square_well") {
      if (!p.contains("depth") || !p.contains("width"))
        throw ConfigError("potential: square_well needs depth and width");
      pd.depth = parse_complex(p.at("depth"), "potential.depth");
      pd.width = p.at("width").get<double>();
      if (!(pd.width > 0.0)) throw ConfigError("potential.width: must be positive");
    } else if (pd.name == "gaussian") {
      for (const char* key : {"amplitude", "center", "width"})
        if (!p.contains(key)) throw ConfigError(std::string("potential.") + key + ": required");
      pd.amplitude = p.at("amplitude").get<double>();
      pd.center = p.at("center").get<double>();
      pd.width = p.at("width").get<double>();
      if (!(pd.width > 0.0)) throw ConfigError("potential.width: must be positive");
    } else {
      throw ConfigError("potential.name: unknown 1D potential '" + pd.name + "'");
    }
    cfg.potential_1d = pd;
    if (j.contains("halfline_length")) cfg.halfline_length = j.at("halfline_length").get<double>();
    if (!(cfg.halfline_length > 0.0)) throw ConfigError("halfline_length: must be positive");
  }

  if ((cfg.kind == ExperimentKind::DeterminantChain || cfg.kind == ExperimentKind::ReciprocalChain)) {
    if (is_1d) throw ConfigError("geometry: multi-dimensional experiments need disk/ball-radial");
    if (!j.contains("potential")) throw ConfigError("potential: required");
    const json& p = j.at("potential");
    PotentialNd pn;
    if (!p.contains("couplings") || !p.at("couplings").is_array() || p.at("couplings").empty())
      throw ConfigError("potential.couplings: non-empty array required");
    for (std::size_t i = 0; i < p.at("couplings").size(); ++i)
      pn.couplings.push_back(
          parse_complex(p.at("couplings")[i], "potential.couplings[" + std::to_string(i) + "]"));
    for (const char* side : {"left_factors", "right_factors"}) {
      if (!p.contains(side))
        throw ConfigError(std::string("potential.") + side + ": required");
      const json& fs = p.at(side);
      if (!fs.is_array() || fs.size() != pn.couplings.size())
        throw ConfigError(std::string("potential.") + side + ": one factor per coupling");
      for (std::size_t i = 0; i < fs.size(); ++i) {
        auto spec = parse_factor(fs[i], std::string("potential.") + side + "[" +
                                            std::to_string(i) + "]");
        (std::string(side) == "left_factors" ? pn.left_factors : pn.right_factors)
            .push_back(std::move(spec));
      }
    }
    cfg.potential_nd = pn;

    if (j.contains("oracle")) {
      const json& o = j.at("oracle");
      cfg.oracle.enabled = true;
      if (o.contains("n_radial")) cfg.oracle.n_radial = o.at("n_radial").get<int>();
      if (o.contains("n_theta")) cfg.oracle.n_theta = o.at("n_theta").get<int>();
      if (o.contains("refined_n_radial"))
        cfg.oracle.refined_n_radial = o.at("refined_n_radial").get<int>();
      if (o.contains("refined_n_theta"))
        cfg.oracle.refined_n_theta = o.at("refined_n_theta").get<int>();
      if (cfg.oracle.n_radial < 8 || cfg.oracle.refined_n_radial <= cfg.oracle.n_radial)
        throw ConfigError("oracle: refined_n_radial must exceed n_radial (>= 8)");
    }
  }

  if (cfg.kind == ExperimentKind::DetSwap) {
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (cfg.kind == ExperimentKind::DtnInverse) {
    if (is_1d) throw ConfigError("geometry: dtn-inverse needs disk/ball-radial");
    if (j.contains("mode_range")) cfg.mode_range = j.at("mode_range").get<int>();
    if (cfg.mode_range < 0 || cfg.mode_range > 40)
      throw ConfigError("mode_range: outside [0, 40]");
  }

  // Spectral points on the positive real axis sit on the branch cut; the
  // experiments assume z off [0, inf) unless a run opts into cut-edge testing.
  const bool allow_cut = j.value("allow_cut_edge", false);
  if (!allow_cut) {
    for (const Complex& z : cfg.z_list)
      if (z.imag() == 0.0 && z.real() >= 0.0)
        throw ConfigError("z_list: points on [0, inf) need allow_cut_edge=true");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace detlab::cli
