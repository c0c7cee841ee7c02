#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "detlab/report.hpp"

namespace detlab::cli {

namespace {

using nlohmann::ordered_json;

// %.17g keeps doubles bit-faithful and the byte stream reproducible.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json complex_json(const Complex& c) { return ordered_json::array({c.real(), c.imag()}); }

Complex complex_from(const ordered_json& j) {
  return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

} // namespace

std::string to_record(const RunReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["geometry"] = r.geometry;
  j["provenance"] = {{"config_hash", r.config_hash}, {"version", r.version}};
  j["reports"] = ordered_json::array();
  for (const auto& rep : r.reports) {
    ordered_json q = ordered_json::array();
    for (const auto& [name, val] : rep.quantities)
      q.push_back({{"name", name}, {"value", complex_json(val)}});
    ordered_json res = ordered_json::array();
    for (const auto& [name, val] : rep.residuals) res.push_back({{"name", name}, {"value", val}});
    j["reports"].push_back({{"z", complex_json(rep.z.z)},
                            {"quantities", q},
                            {"residuals", res},
                            {"resolution", rep.resolution},
                            {"flags", rep.flags},
                            {"excluded", rep.excluded}});
  }
  j["convergence"] = ordered_json::array();
  for (const auto& row : r.convergence)
    j["convergence"].push_back({{"resolution", row.resolution},
                                {"residual", row.residual},
                                {"order", row.order},
                                {"has_order", row.has_order},
                                {"saturated", row.saturated}});
  j["summary"] = {{"max_residual", r.summary.max_residual},
                  {"pass", r.summary.pass},
                  {"excluded_count", r.summary.excluded_count}};
  return j.dump(2) + "\n";
}

RunReport from_record(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  RunReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.geometry = j.at("geometry").get<std::string>();
  r.config_hash = j.at("provenance").at("config_hash").get<std::uint64_t>();
  r.version = j.at("provenance").at("version").get<std::string>();
  for (const auto& rep : j.at("reports")) {
    lab::IdentityReport ir;
    ir.z = SpectralPoint(complex_from(rep.at("z")));
    for (const auto& q : rep.at("quantities"))
      ir.quantities.emplace_back(q.at("name").get<std::string>(), complex_from(q.at("value")));
    for (const auto& res : rep.at("residuals"))
      ir.residuals.emplace_back(res.at("name").get<std::string>(), res.at("value").get<double>());
    ir.resolution = rep.at("resolution").get<std::string>();
    for (const auto& f : rep.at("flags")) ir.flags.push_back(f.get<std::string>());
    ir.excluded = rep.at("excluded").get<bool>();
    r.reports.push_back(std::move(ir));
  }
  for (const auto& row : j.at("convergence")) {
    ConvergenceRow cr;
    cr.resolution = row.at("resolution").get<std::string>();
    cr.residual = row.at("residual").get<double>();
    cr.order = row.at("order").get<double>();
    cr.has_order = row.at("has_order").get<bool>();
    cr.saturated = row.at("saturated").get<bool>();
    r.convergence.push_back(std::move(cr));
  }
  r.summary.max_residual = j.at("summary").at("max_residual").get<double>();
  r.summary.pass = j.at("summary").at("pass").get<bool>();
  r.summary.excluded_count = j.at("summary").at("excluded_count").get<int>();
  return r;
}

std::string to_csv(const RunReport& r) {
  std::ostringstream os;
  os << "experiment,z_re,z_im,quantity_name,value_re,value_im,residual,resolution,flag\n";
  for (const auto& rep : r.reports) {
    std::string flag;
    for (const auto& f : rep.flags) flag += (flag.empty() ? "" : ";") + f;
    if (rep.excluded) flag = flag.empty() ? "excluded" : flag + ";excluded";
    for (std::size_t i = 0; i < rep.quantities.size(); ++i) {
      const auto& [name, val] = rep.quantities[i];
      os << r.experiment << ',' << num(rep.z.z.real()) << ',' << num(rep.z.z.imag()) << ','
         << name << ',' << num(val.real()) << ',' << num(val.imag()) << ',';
      if (i < rep.residuals.size()) os << num(rep.residuals[i].second);
      os << ',' << rep.resolution << ',' << flag << '\n';
    }
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace detlab::cli
