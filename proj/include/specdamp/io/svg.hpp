#pragma once

// Self-contained SVG 1.1 plots: the spectrum scatter and the energy curve.
//
// The spectrum spans many decades (beam roots reach |lambda| ~ 1e8), so both
// axes use a symmetric log map v -> sign(v) log10(1 + |v| / c).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "specdamp/krein.hpp"
#include "specdamp/semigroup.hpp"
#include "specdamp/spectrum.hpp"

namespace specdamp::io {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Symlog {
  double c = 1.0;
  double operator()(double v) const { return std::copysign(std::log10(1.0 + std::abs(v) / c), v); }
  double inverse(double u) const { return std::copysign(c * (std::pow(10.0, std::abs(u)) - 1.0), u); }
};

inline const char* sign_color(SignType s) {
  switch (s) {
    case SignType::positive: return "#1f77b4";
    case SignType::negative: return "#d62728";
    case SignType::neutral: return "#2ca02c";
    case SignType::mixed: return "#9467bd";
  }
  return "#000000";
}

}  // namespace detail

/// Scatter of the spectrum colored by sign type, with the lower-bound circle
/// |lambda| = bound and the predicted accumulation points marked on the axis.
inline std::string spectrum_svg(const SpectrumReport& r, const SignClassification* cls,
                                const std::vector<double>& accumulation_points) {
  constexpr double W = 640, H = 480, pad = 56;
  const double c = std::max(r.bound.value, 1e-12) * 0.1;
  const detail::Symlog f{c};

  double xmax = f(r.bound.value), ymax = f(r.bound.value);
  for (const auto& p : r.eigenpairs) {
    xmax = std::max(xmax, std::abs(f(p.lambda.real())));
    ymax = std::max(ymax, std::abs(f(p.lambda.imag())));
  }
  for (double a : accumulation_points) xmax = std::max(xmax, std::abs(f(a)));
  xmax *= 1.05, ymax *= 1.05;
  auto X = [&](double v) { return pad + (f(v) + xmax) / (2 * xmax) * (W - 2 * pad); };
  auto Y = [&](double v) { return H - pad - (f(v) + ymax) / (2 * ymax) * (H - 2 * pad); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + detail::fmt(W) + "\" height=\"" +
       detail::fmt(H) + "\" viewBox=\"0 0 " + detail::fmt(W) + " " + detail::fmt(H) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt(W) + "\" height=\"" + detail::fmt(H) +
       "\" style=\"fill:#ffffff;stroke:none\"/>\n";
  // axes
  s += "<line x1=\"" + detail::fmt(pad) + "\" y1=\"" + detail::fmt(Y(0)) + "\" x2=\"" + detail::fmt(W - pad) +
       "\" y2=\"" + detail::fmt(Y(0)) + "\" style=\"stroke:#888888;stroke-width:1\"/>\n";
  s += "<line x1=\"" + detail::fmt(X(0)) + "\" y1=\"" + detail::fmt(pad) + "\" x2=\"" + detail::fmt(X(0)) +
       "\" y2=\"" + detail::fmt(H - pad) + "\" style=\"stroke:#888888;stroke-width:1\"/>\n";
  for (double u : {-xmax / 1.05, xmax / 1.05}) {
    const double v = f.inverse(u);
    s += "<text x=\"" + detail::fmt(X(v)) + "\" y=\"" + detail::fmt(H - pad + 18) +
         "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:middle\">" + detail::label(v) + "</text>\n";
  }
  for (double u : {-ymax / 1.05, ymax / 1.05}) {
    const double v = f.inverse(u);
    s += "<text x=\"" + detail::fmt(pad - 6) + "\" y=\"" + detail::fmt(Y(v) + 4) +
         "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:end\">" + detail::label(v) + "</text>\n";
  }
  s += "<text x=\"" + detail::fmt(W / 2) + "\" y=\"" + detail::fmt(H - 12) +
       "\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">Re lambda (symlog, c = " +
       detail::label(c) + ")</text>\n";
  s += "<text x=\"14\" y=\"" + detail::fmt(H / 2) + "\" transform=\"rotate(-90 14 " + detail::fmt(H / 2) +
       ")\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">Im lambda</text>\n";

  // lower-bound circle, traced through the symlog map
  std::string pts;
  for (int k = 0; k <= 256; ++k) {
    const double th = 2 * std::numbers::pi * k / 256;
    pts += detail::fmt(X(r.bound.value * std::cos(th))) + "," + detail::fmt(Y(r.bound.value * std::sin(th))) + " ";
  }
  s += "<polyline points=\"" + pts + "\" style=\"fill:none;stroke:#ff7f0e;stroke-width:1;stroke-dasharray:4 3\"/>\n";
  s += "<text x=\"" + detail::fmt(X(0) + 4) + "\" y=\"" + detail::fmt(Y(r.bound.value) - 4) +
       "\" style=\"font-family:sans-serif;font-size:11px;fill:#ff7f0e\">|lambda| = " + detail::label(r.bound.value) +
       "</text>\n";

  for (double a : accumulation_points) {
    const double x = X(a), y = Y(0);
    s += "<path d=\"M " + detail::fmt(x - 5) + " " + detail::fmt(y - 5) + " L " + detail::fmt(x + 5) + " " +
         detail::fmt(y + 5) + " M " + detail::fmt(x - 5) + " " + detail::fmt(y + 5) + " L " + detail::fmt(x + 5) +
         " " + detail::fmt(y - 5) + "\" style=\"stroke:#000000;stroke-width:1.5\"/>\n";
    s += "<text x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(y + 18) +
         "\" style=\"font-family:sans-serif;font-size:10px;text-anchor:middle\">" + detail::label(a) + "</text>\n";
  }

  for (std::size_t i = 0; i < r.eigenpairs.size(); ++i) {
    const auto l = r.eigenpairs[i].lambda;
    const char* color = cls ? detail::sign_color(cls->of_eigenpair(i).sign_type) : "#444444";
    s += "<circle cx=\"" + detail::fmt(X(l.real())) + "\" cy=\"" + detail::fmt(Y(l.imag())) + "\" r=\"3\" style=\"fill:" +
         color + ";fill-opacity:0.8;stroke:none\"/>\n";
  }

  if (cls) {
    double y = pad;
    for (auto t : {SignType::positive, SignType::negative, SignType::neutral, SignType::mixed}) {
      s += "<circle cx=\"" + detail::fmt(W - pad - 70) + "\" cy=\"" + detail::fmt(y) + "\" r=\"4\" style=\"fill:" +
           detail::sign_color(t) + "\"/>\n";
      s += "<text x=\"" + detail::fmt(W - pad - 60) + "\" y=\"" + detail::fmt(y + 4) +
           "\" style=\"font-family:sans-serif;font-size:11px\">" + to_string(t) + "</text>\n";
      y += 16;
    }
  }
  s += "</svg>\n";
  return s;
}

/// Energy against time, logarithmic energy axis when the energy stays positive.
inline std::string energy_svg(const TrajectoryReport& t) {
  constexpr double W = 640, H = 400, pad = 56;
  const double tmax = t.times.empty() ? 1.0 : std::max(t.times.back(), 1e-300);
  double emin = std::numeric_limits<double>::infinity(), emax = 0;
  for (double e : t.energies) emin = std::min(emin, e), emax = std::max(emax, e);
  const bool logy = emin > 0 && emax / emin > 10;
  auto g = [&](double e) { return logy ? std::log10(e) : e; };
  double lo = t.energies.empty() ? 0 : g(emin), hi = t.energies.empty() ? 1 : g(emax);
  if (!(hi > lo)) lo -= 0.5, hi += 0.5;
  auto X = [&](double v) { return pad + v / tmax * (W - 2 * pad); };
  auto Y = [&](double e) { return H - pad - (g(e) - lo) / (hi - lo) * (H - 2 * pad); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + detail::fmt(W) + "\" height=\"" +
       detail::fmt(H) + "\" viewBox=\"0 0 " + detail::fmt(W) + " " + detail::fmt(H) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt(W) + "\" height=\"" + detail::fmt(H) +
       "\" style=\"fill:#ffffff;stroke:none\"/>\n";
  s += "<polyline points=\"" + detail::fmt(pad) + "," + detail::fmt(pad) + " " + detail::fmt(pad) + "," +
       detail::fmt(H - pad) + " " + detail::fmt(W - pad) + "," + detail::fmt(H - pad) +
       "\" style=\"fill:none;stroke:#888888;stroke-width:1\"/>\n";
  std::string pts;
  for (std::size_t i = 0; i < t.times.size(); ++i)
    pts += detail::fmt(X(t.times[i])) + "," + detail::fmt(Y(t.energies[i])) + " ";
  s += "<polyline points=\"" + pts + "\" style=\"fill:none;stroke:#1f77b4;stroke-width:1.5\"/>\n";
  s += "<text x=\"" + detail::fmt(W / 2) + "\" y=\"" + detail::fmt(H - 16) +
       "\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">t (0 to " + detail::label(tmax) +
       ", " + to_string(t.method) + ")</text>\n";
  s += "<text x=\"" + detail::fmt(pad - 6) + "\" y=\"" + detail::fmt(pad + 4) +
       "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:end\">" + detail::label(emax) + "</text>\n";
  s += "<text x=\"" + detail::fmt(pad - 6) + "\" y=\"" + detail::fmt(H - pad + 4) +
       "\" style=\"font-family:sans-serif;font-size:11px;text-anchor:end\">" + detail::label(emin) + "</text>\n";
  s += "<text x=\"14\" y=\"" + detail::fmt(H / 2) + "\" transform=\"rotate(-90 14 " + detail::fmt(H / 2) +
       ")\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">energy" +
       std::string(logy ? " (log)" : "") + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace specdamp::io
