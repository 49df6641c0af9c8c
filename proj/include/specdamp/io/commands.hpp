#pragma once

// The three batch commands behind the `specdamp` executable.
//
// Exit codes: 0 success, 1 a requested condition fails (check only),
// 2 invalid model or configuration, 3 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "specdamp/io/config.hpp"
#include "specdamp/io/report.hpp"
#include "specdamp/io/svg.hpp"

namespace specdamp::io {

enum ExitCode : int { kOk = 0, kConditionFails = 1, kInvalidInput = 2, kNumericalFailure = 3 };

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;  // --seed, beats SPECDAMP_SEED and the config
};

namespace detail {

// --seed, then SPECDAMP_SEED, then the config value.
inline std::uint64_t effective_seed(const CommandOptions& o, const RunConfig& c) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("SPECDAMP_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("SPECDAMP_SEED must be a nonnegative integer (got '" + s + "')");
    return v;
  }
  return c.seed;
}

inline std::filesystem::path prepare_out(const CommandOptions& o) {
  const std::filesystem::path dir = o.out_dir ? *o.out_dir : ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const InvalidModel& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const MissingEssentialSpectrumProxy& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

inline RealPhaseVector initial_state(const RunConfig& c, const SpectrumReport* spectrum) {
  const auto& x0 = c.simulate->x0;
  const std::size_t n = c.model.n();
  if (x0.vector) {
    if (x0.vector->position.size() != n || x0.vector->velocity.size() != n)
      throw ConfigError("simulate.x0 position and velocity need " + std::to_string(n) + " entries");
    return *x0.vector;
  }
  if (x0.modal_weights) {
    if (x0.modal_weights->size() != n)
      throw ConfigError("simulate.x0.modal_weights needs " + std::to_string(n) + " entries");
    const auto eig = linalg::sym_eig(c.model.K);
    RealPhaseVector x = RealPhaseVector::zero(n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) x.position[i] += (*x0.modal_weights)[k] * eig.vectors(i, k);
    return x;
  }
  const std::size_t k = *x0.eigenvector;
  if (k >= spectrum->eigenpairs.size())
    throw ConfigError("simulate.x0.eigenvector must be below " + std::to_string(spectrum->eigenpairs.size()));
  const auto& v = spectrum->eigenpairs[k].vector;
  RealPhaseVector x = RealPhaseVector::zero(n);
  for (std::size_t i = 0; i < n; ++i) x.position[i] = v.position[i].real(), x.velocity[i] = v.velocity[i].real();
  return x;
}

inline std::string verdict_line(const std::string& name, const std::string& verdict, double margin,
                                const std::string& detail) {
  std::ostringstream os;
  os << std::left << std::setw(6) << name << std::setw(18) << verdict << std::setw(25)
     << format_double(margin) << detail << "\n";
  return os.str();
}

}  // namespace detail

/// Spectrum and any requested analyses: report.json, eigenvalues.csv, spectrum.svg.
inline int run_analyze(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto c = load_config(o.config_path);
    const auto seed = detail::effective_seed(o, c);
    const auto dir = detail::prepare_out(o);
    const auto& m = c.model;
    const auto& tol = c.tolerances;

    const auto spectrum = solve_qep(m, tol);
    std::optional<SignClassification> cls;
    std::string cls_error;
    try {
      cls = classify_eigenpairs(m, spectrum, tol);
    } catch (const NumericalError& e) {
      if (c.wants(Analysis::krein)) throw;
      cls_error = e.what();
    }

    json report;
    report["model"] = model_json(m);
    report["tolerances"] = tolerances_json(tol);
    report["seed"] = seed;
    json analyses = json::array();
    for (auto a : c.analyses) analyses.push_back(to_string(a));
    report["analyses"] = analyses;

    if (c.wants(Analysis::spectrum))
      report["spectrum"] = spectrum_json(spectrum, energy_condition_number(m, spectrum));
    if (c.wants(Analysis::krein)) {
      std::optional<Decomposition> dec;
      std::string dec_error;
      try {
        dec = decompose(m, spectrum, *cls, tol);
      } catch (const MixedClusterObstruction& e) {
        dec_error = e.what();
      }
      report["krein"] = krein_json(*cls, dec, dec_error);
    }
    if (c.wants(Analysis::conditions)) report["conditions"] = conditions_json(check_conditions(m, spectrum, tol, seed));
    if (c.wants(Analysis::semigroup)) {
      const auto grid = log_grid(c.scan.im_min, c.scan.im_max, c.scan.points);
      json sg = scan_json(resolvent_scan(m, c.scan.re_offset, grid, tol));
      sg["re_offset"] = num(c.scan.re_offset);
      sg["resolvent_norm_at_zero"] = num(resolvent_norm_at(m, 0.0, tol));
      sg["norm"] = "energy";
      report["semigroup"] = sg;
    }
    if (c.wants(Analysis::accumulation))
      report["accumulation"] =
          accumulation_json(accumulation_experiment(*beam_spec(m), c.accumulation.orders, c.accumulation.radius, tol));

    std::vector<double> marks;
    if (const auto* b = beam_spec(m)) marks = predicted_accumulation_points(*b);
    write_atomic(dir / "report.json", detail::dump(report));
    write_atomic(dir / "eigenvalues.csv", eigenvalue_csv(spectrum, cls ? &*cls : nullptr));
    write_atomic(dir / "spectrum.svg", spectrum_svg(spectrum, cls ? &*cls : nullptr, marks));
    if (!cls) err << "note: sign classification unavailable (" << cls_error << "); CSV sign columns left empty\n";
    out << "wrote " << (dir / "report.json").string() << ", eigenvalues.csv, spectrum.svg (" << spectrum.eigenpairs.size()
        << " eigenvalues)\n";
    return int(kOk);
  });
}

/// Trajectory from the configured initial state: trajectory.csv, energy.svg, simulation.json.
inline int run_simulate(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto c = load_config(o.config_path);
    if (!c.simulate) throw ConfigError("simulate needs a 'simulate' block");
    const auto seed = detail::effective_seed(o, c);
    const auto dir = detail::prepare_out(o);
    const auto& s = *c.simulate;

    std::optional<SpectrumReport> spectrum;
    if (s.x0.eigenvector) spectrum = solve_qep(c.model, c.tolerances);
    const auto x0 = detail::initial_state(c, spectrum ? &*spectrum : nullptr);

    std::vector<double> times(s.samples);
    for (std::size_t i = 0; i < s.samples; ++i)
      times[i] = s.t_max * static_cast<double>(i) / static_cast<double>(s.samples - 1);
    times.back() = s.t_max;
    const auto traj = evolve(c.model, x0, times, c.tolerances);

    double max_increase = 0;
    for (std::size_t i = 1; i < traj.energies.size(); ++i)
      max_increase = std::max(max_increase, traj.energies[i] - traj.energies[i - 1]);
    json summary{{"model", model_json(c.model)},
                 {"seed", seed},
                 {"method", to_string(traj.method)},
                 {"step", num(traj.step)},
                 {"eigenvector_condition", num(traj.eigenvector_condition)},
                 {"t_max", num(s.t_max)},
                 {"samples", s.samples},
                 {"energy_initial", num(traj.energies.front())},
                 {"energy_final", num(traj.energies.back())},
                 {"max_energy_increase", num(max_increase)},
                 {"energy_nonincreasing", max_increase <= 1e-10}};
    write_atomic(dir / "trajectory.csv", trajectory_csv(traj));
    write_atomic(dir / "energy.svg", energy_svg(traj));
    write_atomic(dir / "simulation.json", detail::dump(summary));
    out << "wrote " << (dir / "trajectory.csv").string() << ", energy.svg, simulation.json (" << to_string(traj.method)
        << ", energy " << format_double(traj.energies.front()) << " -> " << format_double(traj.energies.back())
        << ")\n";
    return int(kOk);
  });
}

/// Condition table on stdout; exit 0 iff every requested condition holds.
inline int run_check(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto c = load_config(o.config_path);
    const auto seed = detail::effective_seed(o, c);
    const auto spectrum = solve_qep(c.model, c.tolerances);
    const auto rep = check_conditions(c.model, spectrum, c.tolerances, seed);

    std::set<std::string> want = c.conditions ? *c.conditions : std::set<std::string>{"i", "ii"};
    if (!c.conditions && rep.condition_iii) want.insert("iii");
    if (want.count("iii") && !rep.condition_iii) throw MissingEssentialSpectrumProxy();

    bool all = true;
    out << std::left << std::setw(6) << "cond" << std::setw(18) << "verdict" << std::setw(25) << "margin"
        << "detail\n";
    if (want.count("i")) {
      const auto& od = rep.overdamping;
      const bool h = rep.condition_i_holds();
      all = all && h;
      out << detail::verdict_line("i", h ? "holds" : "fails", od.margin,
                                  od.certificate ? "certificate s* = " + format_double(*od.certificate)
                                                 : std::string("no certificate"));
    }
    if (want.count("ii")) {
      const bool h = rep.condition_ii_holds();
      all = all && h;
      double worst = std::numeric_limits<double>::infinity();
      std::string items;
      for (const auto& it : rep.condition_ii) {
        if (it.gram)
          for (double g : it.gram->gram_eigenvalues) worst = std::min(worst, std::abs(g) - it.gram->tau);
        items += (items.empty() ? "" : "; ") + std::string("mu = ") + format_double(it.mu) + ": " +
                 to_string(it.verdict);
      }
      out << detail::verdict_line("ii", h ? "holds" : "fails", worst, items.empty() ? "no candidates" : items);
    }
    if (want.count("iii")) {
      const auto& t = *rep.condition_iii;
      all = all && t.holds;
      out << detail::verdict_line("iii", t.holds ? "holds" : "fails", t.margin(),
                                  format_double(t.lhs) + (t.holds ? " < " : " >= ") + format_double(t.rhs) + " (" + t.rhs_source + ")");
    }
    if (rep.endee) {
      for (const auto& p : rep.endee->patches)
        out << "beam patch a = " << format_double(p.patch.a) << ": threshold (i) printed "
            << format_double(p.threshold_i_printed) << ", derived " << format_double(p.threshold_i_derived)
            << "; threshold (iii) " << format_double(p.threshold_iii) << "\n";
    }
    out << "gamma = " << format_double(rep.gamma_eq) << ", alpha = " << format_double(rep.alpha_eq) << "\n";

    if (o.out_dir) {
      const auto dir = detail::prepare_out(o);
      json j = conditions_json(rep);
      j["model"] = model_json(c.model);
      j["seed"] = seed;
      j["all_requested_hold"] = all;
      write_atomic(dir / "conditions.json", detail::dump(j));
    }
    return int(all ? kOk : kConditionFails);
  });
}

}  // namespace specdamp::io
