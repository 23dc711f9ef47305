#include "dpnls/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpnls/error.hpp"

namespace dpnls {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw Error(ErrorKind::InvalidParams, "csv: row width differs from header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::InvalidParams, "csv: no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& s = row[c];
    if (s == "nan") out.push_back(std::nan(""));
    else if (s == "inf") out.push_back(HUGE_VAL);
    else if (s == "-inf") out.push_back(-HUGE_VAL);
    else {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size()) throw Error(ErrorKind::InvalidParams, "csv: '" + s + "' is not a number");
      out.push_back(v);
    }
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(int v) { return std::to_string(v); }

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidParams, "cannot write " + path.string());
  out << join(table.header) << '\n';
  for (const auto& row : table.rows) out << join(row) << '\n';
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidParams, "cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidParams, path.string() + ": missing header");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.add_row(split(line));
  }
  return t;
}

void write_json(const std::filesystem::path& path, json doc) {
  if (doc.is_object() && !doc.contains("format_version")) doc["format_version"] = kFormatVersion;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidParams, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidParams, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidParams, path.string() + ": " + e.what());
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json to_json(const ModelParams& params) {
  return {{"dim", params.dim}, {"p", params.p}, {"q", params.q}, {"omega", params.omega}};
}

ModelParams params_from_json(const json& j) {
  ModelParams m;
  m.dim = j.at("dim").get<int>();
  m.p = j.at("p").get<double>();
  m.q = j.at("q").get<double>();
  m.omega = j.at("omega").get<double>();
  return m;
}

json to_json(const ShootingConfig& c) {
  return {{"amp_lo", c.amp_lo},
          {"amp_hi", c.amp_hi},
          {"ode_atol", c.ode_atol},
          {"ode_rtol", c.ode_rtol},
          {"r_max", c.r_max},
          {"bisection_tol", c.bisection_tol},
          {"origin_offset", c.origin_offset},
          {"mesh_h0", c.mesh_h0},
          {"stretch_radius", c.stretch_radius},
          {"agreement_tol", c.agreement_tol},
          {"decay_floor", c.decay_floor},
          {"max_expansions", c.max_expansions},
          {"max_mesh_refinements", c.max_mesh_refinements}};
}

ShootingConfig shooting_from_json(const json& j) {
  ShootingConfig c;
  c.amp_lo = j.at("amp_lo").get<double>();
  c.amp_hi = j.at("amp_hi").get<double>();
  c.ode_atol = j.at("ode_atol").get<double>();
  c.ode_rtol = j.at("ode_rtol").get<double>();
  c.r_max = j.at("r_max").get<double>();
  c.bisection_tol = j.at("bisection_tol").get<double>();
  c.origin_offset = j.at("origin_offset").get<double>();
  c.mesh_h0 = j.at("mesh_h0").get<double>();
  c.stretch_radius = j.at("stretch_radius").get<double>();
  c.agreement_tol = j.at("agreement_tol").get<double>();
  c.decay_floor = j.at("decay_floor").get<double>();
  c.max_expansions = j.at("max_expansions").get<int>();
  c.max_mesh_refinements = j.at("max_mesh_refinements").get<int>();
  return c;
}

// nlohmann writes NaN as null; keep that, readers treat null as "not available".
json to_json(const Norms& n) {
  return {{"L2_sq", n.L2_sq},
          {"gradL2_sq", n.gradL2_sq},
          {"Lp1", n.Lp1},
          {"Lq1", n.Lq1},
          {"l2_divergent", n.l2_divergent}};
}

json to_json(const FunctionalReport& r) {
  return {{"norms", to_json(r.norms)},
          {"S", r.S},
          {"K", r.K},
          {"J", r.J},
          {"P", r.P},
          {"pohozaev_residual_K", r.pohozaev_residual_K},
          {"pohozaev_residual_P", r.pohozaev_residual_P}};
}

json to_json(const TailModel& t) {
  return {{"kind", to_string(t.kind)}, {"coefficient", t.coefficient}, {"rate", t.rate},
          {"exponent", t.exponent},    {"log_power", t.log_power},     {"r_scale", t.r_scale}};
}

json to_json(const SolveInfo& i) {
  return {{"amplitude", static_cast<double>(i.amplitude)},
          {"bracket_width", i.bracket_width},
          {"bisection_steps", i.bisection_steps},
          {"mesh_refinements", i.mesh_refinements},
          {"mesh_h0", i.mesh_h0},
          {"max_error_ratio", i.max_error_ratio},
          {"tail_window_lo", i.tail_window_lo},
          {"tail_window_hi", i.tail_window_hi},
          {"tail_stabilized", i.tail_stabilized}};
}

json to_json(const DecayFit& f) {
  json j = {{"exponential", f.exponential}, {"r_a", f.r_a}, {"r_b", f.r_b}, {"residual_rms", f.residual_rms},
            {"coefficient", f.coefficient}};
  if (f.exponential) {
    j["fitted_rate"] = f.fitted_rate;
    j["theory_rate"] = f.theory.exponent;
  } else {
    j["fitted_exponent"] = f.fitted_exponent;
    j["fitted_log_power"] = f.fitted_log_power;
    j["theory_exponent"] = f.theory.exponent;
    j["theory_log_power"] = f.theory.log_power;
    if (f.kappa > 0.0) j["kappa"] = f.kappa;
  }
  return j;
}

json to_json(const CriterionResult& c) {
  return {{"verdict", to_string(c.verdict)},
          {"closed_form", c.closed_form},
          {"finite_difference", c.finite_difference},
          {"relative_disagreement", c.relative_disagreement},
          {"resolution", c.resolution}};
}

json to_json(const StraussMargin& m) {
  return {{"margin", m.margin},   {"corrected_margin", m.corrected_margin}, {"rhs", m.rhs},
          {"sup_lhs", m.sup_lhs}, {"r_at_sup", m.r_at_sup}};
}

CsvTable profile_table(const RadialProfile& prof) {
  CsvTable t{{"r", "phi", "dphi"}, {}};
  for (std::size_t i = 0; i < prof.size(); ++i) t.add_row({fmt(prof.r[i]), fmt(prof.phi[i]), fmt(prof.dphi[i])});
  return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t{{"p", "q", "gamma", "closed_form", "finite_difference", "fd_relative_error", "sign_closed_form",
              "sign_gamma_test", "agreement", "near_degenerate", "status"},
             {}};
  for (const auto& r : rows) {
    t.add_row({fmt(r.p), fmt(r.q), fmt(r.gamma), fmt(r.closed_form), fmt(r.finite_difference),
               fmt(r.fd_relative_error), fmt(r.sign_closed_form), fmt(r.sign_gamma_test), fmt(r.agreement),
               fmt(r.near_degenerate), r.status});
  }
  return t;
}

CsvTable limit_table(const LimitStudy& s) {
  CsvTable t{{"omega", "delta_H1dot", "delta_Lp1", "delta_L2", "d_gap", "mass_times_omega", "identity_residual",
              "status"},
             {}};
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    t.add_row({fmt(s.omega[i]), fmt(s.delta_H1dot[i]), fmt(s.delta_Lp1[i]), fmt(s.delta_L2[i]), fmt(s.d_gap[i]),
               fmt(s.mass_times_omega[i]), fmt(s.identity_residual[i]), s.status[i] == "ok" ? "ok" : "failed"});
  }
  return t;
}

CsvTable diagnostics_table(const EvolutionDiagnostics& d) {
  CsvTable t{{"t", "E", "M", "P", "V", "grad_norm", "distance", "blowup_flag"}, {}};
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    const bool last = i + 1 == d.t.size();
    t.add_row({fmt(d.t[i]), fmt(d.E[i]), fmt(d.M[i]), fmt(d.P[i]), fmt(d.V[i]), fmt(d.grad_norm[i]),
               fmt(d.distance[i]), fmt(last && d.blowup_flag)});
  }
  return t;
}

CsvTable field_table(const WaveField& f) {
  CsvTable t{{"x", "re_u", "im_u"}, {}};
  for (std::size_t j = 0; j < f.M; ++j) t.add_row({fmt(f.x(j)), fmt(f.u[j].real()), fmt(f.u[j].imag())});
  return t;
}

}  // namespace dpnls
