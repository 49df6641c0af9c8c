#pragma once

// JSON and CSV serialization of analysis results, plus atomic file output.
//
// Doubles are written in shortest round-trip form, so re-reading a report
// reproduces every finite value bit for bit. Non-finite values are written as
// the strings "inf", "-inf" and "nan".

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "specdamp/conditions.hpp"
#include "specdamp/krein.hpp"
#include "specdamp/semigroup.hpp"
#include "specdamp/spectrum.hpp"

namespace specdamp::io {

using nlohmann::json;

inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double read_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

inline json num(cplx z) { return json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json indices(const std::vector<std::size_t>& v) { return json(v); }

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Writes to a temporary sibling and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename '" + tmp.string() + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// sections

inline json model_json(const SystemModel& m) {
  json j;
  j["n"] = m.n();
  if (const auto* b = beam_spec(m)) {
    j["type"] = "beam";
    j["E"] = num(b->E);
    j["N"] = b->N;
    json ps = json::array();
    for (const auto& p : b->patches) ps.push_back({{"a", num(p.a)}, {"from", num(p.from)}, {"to", num(p.to)}});
    j["patches"] = ps;
  } else if (const auto* p = std::get_if<PerturbedSource>(&m.source)) {
    j["type"] = "perturbed";
    j["alpha"] = num(p->alpha);
    j["compactness_proxy"] = num(p->compactness_proxy);
  } else {
    j["type"] = "generic";
  }
  if (m.essential_spectrum_proxy) j["essential_spectrum_proxy"] = nums(*m.essential_spectrum_proxy);
  return j;
}

inline json tolerances_json(const ToleranceProfile& t) {
  return {{"residual_tol", num(t.residual_tol)}, {"snap_real_tol", num(t.snap_real_tol)},
          {"cluster_tol", num(t.cluster_tol)},   {"neutral_tol", num(t.neutral_tol)},
          {"orth_tol", num(t.orth_tol)},         {"rank_tol", num(t.rank_tol)}};
}

inline json spectrum_json(const SpectrumReport& r, double eigenvector_condition) {
  json ev = json::array();
  for (std::size_t i = 0; i < r.eigenpairs.size(); ++i) {
    const auto& p = r.eigenpairs[i];
    ev.push_back({{"index", i}, {"re", num(p.lambda.real())}, {"im", num(p.lambda.imag())},
                  {"residual", num(p.residual)}});
  }
  double min_abs = std::numeric_limits<double>::infinity(), max_re = -std::numeric_limits<double>::infinity();
  for (const auto& p : r.eigenpairs) min_abs = std::min(min_abs, std::abs(p.lambda)), max_re = std::max(max_re, p.lambda.real());
  return {{"eigenvalues", ev},
          {"lower_bound",
           {{"value", num(r.bound.value)},
            {"norm_AinvD", num(r.bound.norm_AinvD)},
            {"norm_Ainv", num(r.bound.norm_Ainv)},
            {"min_abs_eigenvalue", num(min_abs)},
            {"margin", num(min_abs - r.bound.value)}}},
          {"max_real_part", num(max_re)},
          {"resolvent_disk_radius", num(r.disk_radius)},
          {"operator_norm_frobenius", num(r.operator_norm_frobenius)},
          {"max_structure_defect", num(r.max_structure_defect)},
          {"eigenvector_condition_energy", num(eigenvector_condition)}};
}

inline json accumulation_json(const AccumulationReport& a) {
  json rows = json::array();
  for (const auto& row : a.rows) {
    json pts = json::array();
    for (const auto& p : row.points)
      pts.push_back({{"location", num(p.location)}, {"count", p.count}, {"nearest_distance", num(p.nearest_distance)}});
    rows.push_back({{"N", row.N}, {"points", pts}});
  }
  return {{"radius", num(a.radius)},
          {"predicted", nums(a.predicted)},
          {"rows", rows},
          {"counts_nondecreasing", a.counts_nondecreasing},
          {"note", "counts only; no accumulation rate is asserted"}};
}

inline json matrix_json(const ComplexMatrix& g) {
  json rows = json::array();
  for (std::size_t i = 0; i < g.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < g.cols(); ++k) row.push_back(num(g(i, k)));
    rows.push_back(row);
  }
  return rows;
}

inline json krein_json(const SignClassification& cls, const std::optional<Decomposition>& dec,
                       const std::string& decomposition_error) {
  json clusters = json::array();
  for (const auto& c : cls.clusters) {
    clusters.push_back({{"lambda", num(c.lambda)},
                        {"members", indices(c.members)},
                        {"sign_type", to_string(c.sign_type)},
                        {"gram", matrix_json(c.gram)},
                        {"gram_eigenvalues", nums(c.gram_eigenvalues)},
                        {"margin", num(c.margin)},
                        {"algebraic_multiplicity", c.algebraic_multiplicity},
                        {"geometric_multiplicity", c.geometric_multiplicity},
                        {"jordan_defect", c.jordan_defect},
                        {"nonpositive_directions", c.nonpositive_directions},
                        {"rank_threshold", num(c.rank_threshold)},
                        {"tau", num(c.tau)}});
  }
  json j{{"tau_neutral", num(cls.tau_neutral)}, {"clusters", clusters}};
  if (dec) {
    j["decomposition"] = {{"h_prime", indices(dec->h_prime)},
                          {"h_doubleprime", indices(dec->h_doubleprime)},
                          {"m_cut", num(dec->m_cut)},
                          {"cross_gram_norm", num(dec->cross_gram_norm)},
                          {"hprime_definiteness", num(dec->hprime_definiteness)},
                          {"tau_orth", num(dec->tau_orth)},
                          {"verified", dec->verified()}};
  } else {
    j["decomposition"] = {{"error", decomposition_error}};
  }
  return j;
}

inline json gram_check_json(const GramCheck& g) {
  json j{{"nondegenerate", g.nondegenerate},
         {"gram_eigenvalues", nums(g.gram_eigenvalues)},
         {"gram_norm", num(g.gram_norm)},
         {"tau", num(g.tau)}};
  if (g.witness) {
    json pos = json::array(), vel = json::array();
    for (auto z : g.witness->position) pos.push_back(num(z));
    for (auto z : g.witness->velocity) vel.push_back(num(z));
    j["witness"] = {{"position", pos}, {"velocity", vel}};
  }
  return j;
}

inline json conditions_json(const ConditionReport& c) {
  const auto& o = c.overdamping;
  json i{{"holds", c.condition_i_holds()},
         {"margin", num(o.margin)},
         {"minimizer", nums(o.minimizer)},
         {"line_search_value", num(o.line_search_value)},
         {"line_search_s", num(o.line_search_s)},
         {"certificate", o.certificate ? num(*o.certificate) : json(nullptr)},
         {"seed", o.seed},
         {"starts", o.starts}};
  json ii_items = json::array();
  for (const auto& it : c.condition_ii) {
    json e{{"mu", num(it.mu)},
           {"target", num(it.target)},
           {"verdict", to_string(it.verdict)},
           {"nearest_distance", num(it.nearest_distance)}};
    if (it.gram) e["gram"] = gram_check_json(*it.gram);
    ii_items.push_back(e);
  }
  json j{{"condition_i", i},
         {"condition_ii", {{"holds", c.condition_ii_holds()}, {"items", ii_items}}},
         {"equivalence_constants", {{"gamma", num(c.gamma_eq)}, {"alpha", num(c.alpha_eq)}}}};
  if (c.condition_iii) {
    const auto& t = *c.condition_iii;
    j["condition_iii"] = {{"holds", t.holds},
                          {"lhs", num(t.lhs)},
                          {"rhs", num(t.rhs)},
                          {"margin", num(t.margin())},
                          {"rhs_source", t.rhs_source}};
  }
  if (c.endee) {
    json ps = json::array();
    for (const auto& p : c.endee->patches)
      ps.push_back({{"a", num(p.patch.a)},
                    {"from", num(p.patch.from)},
                    {"to", num(p.patch.to)},
                    {"threshold_i_printed", num(p.threshold_i_printed)},
                    {"threshold_i_derived", num(p.threshold_i_derived)},
                    {"threshold_iii", num(p.threshold_iii)},
                    {"above_i_printed", p.above_i_printed},
                    {"above_i_derived", p.above_i_derived},
                    {"above_iii", p.above_iii}});
    j["beam_thresholds"] = {{"E", num(c.endee->E)},
                            {"N", c.endee->N},
                            {"patches", ps},
                            {"overdamping_margin", num(c.endee->overdamping_margin)}};
  }
  return j;
}

inline json scan_json(const ResolventScan& s) {
  json samples = json::array();
  for (const auto& x : s.samples)
    samples.push_back({{"re", num(x.lambda.real())}, {"im", num(x.lambda.imag())}, {"norm", num(x.norm)},
                       {"product", num(x.product)}});
  return {{"samples", samples},
          {"fitted_M", num(s.fitted_M)},
          {"tail_slope", num(s.tail_slope)},
          {"bounded", s.bounded},
          {"sector_ratio", num(s.sector_ratio)},
          {"sector_angle_deg", num(s.sector_angle_deg)},
          {"sectorial", s.sectorial},
          {"near_axis_m", s.near_axis_m ? num(*s.near_axis_m) : json(nullptr)},
          {"near_axis_eta", s.near_axis_eta ? num(*s.near_axis_eta) : json(nullptr)},
          {"note",
           "every finite truncation generates an analytic semigroup; compare fitted_M and the sector angle across N"}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string eigenvalue_csv(const SpectrumReport& r, const SignClassification* cls) {
  std::string out = "index,re_lambda,im_lambda,residual,sign_type,jordan_defect,gram_min_eig\n";
  for (std::size_t i = 0; i < r.eigenpairs.size(); ++i) {
    const auto& p = r.eigenpairs[i];
    out += std::to_string(i) + ',' + format_double(p.lambda.real()) + ',' + format_double(p.lambda.imag()) + ',' +
           format_double(p.residual) + ',';
    if (cls) {
      const auto& c = cls->of_eigenpair(i);
      double gmin = std::numeric_limits<double>::infinity();
      for (double g : c.gram_eigenvalues) gmin = std::min(gmin, g);
      out += std::string(to_string(c.sign_type)) + ',' + std::to_string(c.jordan_defect) + ',' + format_double(gmin);
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

inline std::string trajectory_csv(const TrajectoryReport& t) {
  std::string out = "t,energy,method\n";
  for (std::size_t i = 0; i < t.times.size(); ++i)
    out += format_double(t.times[i]) + ',' + format_double(t.energies[i]) + ',' + to_string(t.method) + '\n';
  return out;
}

}  // namespace specdamp::io
