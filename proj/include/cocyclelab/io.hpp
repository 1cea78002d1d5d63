// Artifact serialization: CSV tables, JSON reports (schema_version 1), and
// static SVG plots. All floats print as %.17g so identical inputs give
// byte-identical files.
#pragma once

#include <json.hpp>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/cohomology.hpp"
#include "cocyclelab/config.hpp"
#include "cocyclelab/livsic.hpp"
#include "cocyclelab/structures.hpp"

namespace cocyclelab {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) { return detail::fmt17(v); }

// ---- CSV tables --------------------------------------------------------------

inline void csv_periodic_points(std::ostream& o, const LatticeAutomorphism& f, int n_max) {
  o << "period,a,b,d\n";
  for (const auto& orb : enumerate_orbits(f, n_max))
    for (const auto& p : orb.points)
      o << orb.period << ',' << p.a << ',' << p.b << ',' << p.d << '\n';
}

inline void csv_periodic_data(std::ostream& o, const Cocycle& A, int n_max, const JordanTols& tols = {}) {
  o << "period,a,b,d,tr,det,jordan_type,lyap_top,lyap_bot\n";
  for (const auto& orb : enumerate_orbits(A.base, n_max)) {
    PeriodicDatum d = periodic_datum(A, orb, tols);
    o << orb.period << ',' << orb.base.a << ',' << orb.base.b << ',' << orb.base.d << ',' << fmt17(d.tr) << ','
      << fmt17(d.det) << ',' << to_string(d.jordan_type) << ',' << fmt17(d.lyap_top) << ',' << fmt17(d.lyap_bot)
      << '\n';
  }
}

inline void csv_obstructions(std::ostream& o, const ObstructionReport& r) {
  o << "period,a,b,d,value\n";
  for (const auto& e : r.entries)
    o << e.orbit.period << ',' << e.orbit.base.a << ',' << e.orbit.base.b << ',' << e.orbit.base.d << ','
      << fmt17(e.value) << '\n';
}

inline void csv_trigpoly(std::ostream& o, const TrigPoly& p) {
  o << "m1,m2,re,im\n";
  for (const auto& [m, c] : p.coeffs()) o << m.m1 << ',' << m.m2 << ',' << fmt17(c.real()) << ',' << fmt17(c.imag()) << '\n';
}

inline void csv_line_field(std::ostream& o, const LineField& L) {
  o << "x1,x2,theta,residual\n";
  for (int i = 0; i < L.theta.N; ++i)
    for (int j = 0; j < L.theta.N; ++j) {
      Vec2 x = L.theta.node(i, j);
      o << fmt17(x.x) << ',' << fmt17(x.y) << ',' << fmt17(L.theta.at(i, j)) << ',' << fmt17(L.residual) << '\n';
    }
}

inline void csv_conformal_field(std::ostream& o, const ConformalField& F) {
  o << "x1,x2,S11,S12,S22\n";
  for (int i = 0; i < F.S.N; ++i)
    for (int j = 0; j < F.S.N; ++j) {
      Vec2 x = F.S.node(i, j);
      const Mat2& S = F.S.at(i, j);
      o << fmt17(x.x) << ',' << fmt17(x.y) << ',' << fmt17(S.a) << ',' << fmt17(S.b) << ',' << fmt17(S.d) << '\n';
    }
}

inline void csv_conjugator_table(std::ostream& o, const ConjugatorAnalysis& an) {
  o << "period,a,b,d,C11,C12,C21,C22,norm,in_ball\n";
  for (const auto& s : an.table)
    o << s.period << ',' << s.point.a << ',' << s.point.b << ',' << s.point.d << ',' << fmt17(s.C.a) << ','
      << fmt17(s.C.b) << ',' << fmt17(s.C.c) << ',' << fmt17(s.C.d) << ',' << fmt17(s.norm) << ','
      << (s.in_ball ? 1 : 0) << '\n';
}

// ---- JSON reports ------------------------------------------------------------

inline json orbit_json(const PeriodicOrbit& o) {
  return json{{"period", o.period}, {"a", o.base.a}, {"b", o.base.b}, {"d", o.base.d}};
}

inline json trigpoly_json(const TrigPoly& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.coeffs())
    terms.push_back(json{{"m1", m.m1}, {"m2", m.m2}, {"re", c.real()}, {"im", c.imag()}});
  return json{{"q1", p.q1()}, {"q2", p.q2()}, {"terms", terms}};
}

inline const char* to_string(CohomologyVerdict::Status s) {
  switch (s) {
    case CohomologyVerdict::Status::Cohomologous: return "cohomologous";
    case CohomologyVerdict::Status::NotCohomologous: return "not-cohomologous";
    default: return "undetermined";
  }
}

inline json verdict_json(const CohomologyVerdict& v) {
  json j{{"schema_version", 1}, {"report", "cohomology-verdict"}, {"status", to_string(v.status)}};
  if (v.c) j["c"] = *v.c;
  if (v.branch != 0) j["branch"] = v.branch;
  if (v.s) j["s"] = trigpoly_json(*v.s);
  if (v.s_winding != std::array<int, 2>{0, 0}) j["s_winding"] = {v.s_winding[0], v.s_winding[1]};
  if (v.log_phi) j["log_phi"] = trigpoly_json(*v.log_phi);
  if (!std::isnan(v.residual)) j["certificate_residual"] = v.residual;
  if (!v.witnesses.empty()) {
    json w = json::array();
    for (const auto& e : v.witnesses) {
      json je = orbit_json(e.orbit);
      je["value"] = e.value;
      w.push_back(je);
    }
    j["witnesses"] = w;
  }
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

inline json condition_json(const ConditionReport& r) {
  json j{{"schema_version", 1},
         {"report", "condition-check"},
         {"verdict", r.verdict},
         {"n_max", r.n_max},
         {"worst", r.worst}};
  if (r.witness) j["witness"] = orbit_json(*r.witness);
  if (!r.failures.empty()) j["failures"] = r.failures;
  return j;
}

inline json classification_json(const Classification& c) {
  json j{{"schema_version", 1},
         {"report", "classification"},
         {"type", to_string(c.type)},
         {"holonomy", {c.holonomy_signs[0], c.holonomy_signs[1]}}};
  if (c.reduction) {
    j["reduction_residual"] = c.reduction->residual;
    j["on_cover"] = c.reduction->on_cover;
  }
  if (!c.diagnostics.empty()) j["diagnostics"] = c.diagnostics;
  return j;
}

// ---- SVG plots ---------------------------------------------------------------

namespace detail {

inline void svg_open(std::ostream& o, int px) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px << "\" viewBox=\"0 0 "
    << px << ' ' << px << "\">\n<rect width=\"" << px << "\" height=\"" << px << "\" fill=\"white\"/>\n";
}

}  // namespace detail

// short strokes along the line direction, subsampled to at most 32x32 glyphs
inline void svg_line_field(std::ostream& o, const LineField& L, int px = 640) {
  detail::svg_open(o, px);
  int step = std::max(1, L.theta.N / 32);
  double half = 0.4 * px * step / L.theta.N;
  for (int i = 0; i < L.theta.N; i += step)
    for (int j = 0; j < L.theta.N; j += step) {
      Vec2 x = L.theta.node(i, j);
      double cx = px * x.x / L.theta.q1, cy = px * (1.0 - x.y / L.theta.q2);
      double th = L.theta.at(i, j);
      double dx = half * std::cos(th), dy = -half * std::sin(th);
      o << "<line x1=\"" << fmt17(cx - dx) << "\" y1=\"" << fmt17(cy - dy) << "\" x2=\"" << fmt17(cx + dx)
        << "\" y2=\"" << fmt17(cy + dy) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  o << "</svg>\n";
}

// ellipse glyphs: the unit ball of the metric S, axes from its eigensystem
inline void svg_conformal_field(std::ostream& o, const ConformalField& F, int px = 640) {
  detail::svg_open(o, px);
  int step = std::max(1, F.S.N / 24);
  double scale = 0.4 * px * step / F.S.N;
  for (int i = 0; i < F.S.N; i += step)
    for (int j = 0; j < F.S.N; j += step) {
      Vec2 x = F.S.node(i, j);
      const Mat2& S = F.S.at(i, j);
      double tr = S.a + S.d, det = S.det();
      double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
      double l1 = tr / 2 + disc, l2 = tr / 2 - disc;
      if (!(l1 > 0 && l2 > 0)) continue;
      double ang = 0.5 * std::atan2(2 * S.b, S.a - S.d);  // major axis of the quadratic form
      double cx = px * x.x / F.S.q1, cy = px * (1.0 - x.y / F.S.q2);
      o << "<ellipse cx=\"" << fmt17(cx) << "\" cy=\"" << fmt17(cy) << "\" rx=\"" << fmt17(scale / std::sqrt(l1))
        << "\" ry=\"" << fmt17(scale / std::sqrt(l2)) << "\" transform=\"rotate(" << fmt17(-ang * 180 / M_PI)
        << ' ' << fmt17(cx) << ' ' << fmt17(cy) << ")\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
    }
  o << "</svg>\n";
}

}  // namespace cocyclelab
