// Command-line surface: subcommand dispatch over the library plus the
// worked-example gallery. Kept in a header so the test suite can drive the
// CLI in-process.
#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "cocyclelab/gallery.hpp"
#include "cocyclelab/io.hpp"

namespace cocyclelab {

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Cocycle load_cocycle(const std::string& path, const LatticeAutomorphism& f) {
  return Cocycle(f, parse_matrix(read_text(path), f));
}

inline std::string artifact_path(const LabConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

template <typename Fn>
std::string write_artifact(const LabConfig& cfg, const std::string& name, Fn&& writer) {
  std::string path = artifact_path(cfg, name);
  std::ofstream o(path);
  writer(o);
  return path;
}

inline int verdict_exit(const CohomologyVerdict& v, const LabConfig& cfg, std::ostream& out) {
  out << "verdict: " << to_string(v.status) << '\n';
  if (v.status == CohomologyVerdict::Status::Cohomologous)
    out << "  certificate residual " << fmt17(v.residual) << " (gate 1e-06)\n";
  for (const auto& w : v.witnesses)
    out << "  witness orbit period " << w.orbit.period << " at (" << w.orbit.base.a << '/' << w.orbit.base.d
        << ", " << w.orbit.base.b << '/' << w.orbit.base.d << "), value " << fmt17(w.value) << '\n';
  if (!v.detail.empty()) out << "  " << v.detail << '\n';
  std::string path = write_artifact(cfg, "verdict.json", [&](std::ostream& o) { o << verdict_json(v).dump(2) << '\n'; });
  out << "wrote " << path << '\n';
  return v.status == CohomologyVerdict::Status::Undetermined ? 2 : 0;
}

inline ModelForm build_model(const std::string& kind, const LatticeAutomorphism& f, const std::string& k_txt,
                             const std::string& alpha_txt, const std::string& alpha2_txt,
                             const std::vector<int>& wind) {
  auto field = [&](const std::string& txt) { return make_field(parse_scalar(txt, f), f.q1, f.q2); };
  if (kind == "scalar") return scalar_model(f, field(k_txt));
  if (kind == "triangular") return triangular_model(f, field(k_txt), field(alpha_txt));
  if (kind == "conformal") {
    std::array<int, 2> w{0, 0};
    if (wind.size() == 2) w = {wind[0], wind[1]};
    return conformal_model(f, field(k_txt), field(alpha_txt), w);
  }
  if (kind == "diagonal") return diagonal_model(f, field(alpha_txt), field(alpha2_txt));
  throw std::runtime_error("unknown model kind: " + kind);
}

// ---- gallery self-checks -----------------------------------------------------

inline bool check_gallery_7_1(const GalleryEntry& e, const LabConfig& cfg, std::ostream& out) {
  bool ok = true;
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double maxdev = 0.0;
  for (int t = 0; t < 2000; ++t) {
    Vec2 x{uni(rng), uni(rng)};
    maxdev = std::max(maxdev, frobenius_dist(e.A.eval(x), e.closed_form(x)));
  }
  out << "  closed-form match: max deviation " << fmt17(maxdev) << " over 2000 points\n";
  ok &= maxdev < 1e-10;

  if (e.expected_type) {
    ClassifyOptions opt;
    opt.grid = cfg.grid;
    opt.iterations = cfg.iterations;
    auto cls = classify_full(e.A, opt);
    out << "  classified as " << to_string(cls.type) << " (expected " << to_string(*e.expected_type) << ")\n";
    ok &= cls.type == *e.expected_type;
  } else {
    auto Lp = find_line(e.A, cfg.grid, cfg.iterations, LineDirection::Forward);
    auto Lm = find_line(e.A, cfg.grid, cfg.iterations, LineDirection::Backward);
    auto hp = holonomy(Lp), hm = holonomy(Lm);
    out << "  line residuals " << fmt17(Lp.residual) << ", " << fmt17(Lm.residual) << "; holonomies (" << hp[0]
        << ", " << hp[1] << ") and (" << hm[0] << ", " << hm[1] << ")\n";
    ok &= Lp.residual <= 1e-6 && Lm.residual <= 1e-6;
    ok &= hp == std::array<int, 2>{-1, 1} && hm == std::array<int, 2>{-1, 1};
    auto Lpc = find_line(*e.lifted, cfg.grid, cfg.iterations, LineDirection::Forward);
    auto Lmc = find_line(*e.lifted, cfg.grid, cfg.iterations, LineDirection::Backward);
    auto red = reduce_diagonal(*e.lifted, Lpc, Lmc);
    out << "  cover diagonal reduction residual " << fmt17(red.residual) << '\n';
    ok &= red.residual <= 1e-6;
  }
  return ok;
}

inline bool check_gallery_2_6(const GalleryEntry& e, std::ostream& out) {
  bool ok = true;
  auto f = e.A.base;
  auto ra = scan_additive(e.alpha, f, 4);
  auto rb = scan_additive(e.beta, f, 4);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < ra.entries.size(); ++i) {
    double r = ra.entries[i].value / rb.entries[i].value;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  out << "  shear ratio range over periods <= 4: [" << fmt17(lo) << ", " << fmt17(hi) << "]\n";
  ok &= lo >= 1.0 - 1e-10 && hi <= 2.0 + 1e-10;
  ok &= std::abs(lo - 1.0) < 1e-10 && std::abs(hi - 2.0) < 1e-10;

  auto mA = triangular_model(f, make_field(1.0), make_field(e.alpha));
  auto mB = triangular_model(f, make_field(1.0), make_field(e.beta));
  auto v = test_triangular(mA, mB, 4);
  out << "  tester: " << to_string(v.status) << " with " << v.witnesses.size() << " witnesses\n";
  ok &= v.status == CohomologyVerdict::Status::NotCohomologous && v.witnesses.size() == 2;
  return ok;
}

inline bool check_gallery_7_3(const GalleryEntry& e, const LabConfig& cfg, std::ostream& out) {
  bool ok = true;
  auto f = e.A.base;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vec2 x{uni(rng), uni(rng)};
    for (int m = 2; m <= 6; ++m)
      worst = std::max(worst, std::abs(e.series(f.apply_float(x), m) - (1.0 + e.alpha(x) * e.series(x, m - 1))));
  }
  out << "  recursion defect over random points: " << fmt17(worst) << '\n';
  ok &= worst < 1e-11;

  int cap = std::min(cfg.ball_cap, 10);
  auto g = e.ball_growth(Vec2{0.3, 0.7}, 0.05, cap);
  bool mono = true;
  for (std::size_t i = 1; i < g.size(); ++i) mono &= g[i] >= g[i - 1];
  out << "  in-ball transfer sup by period cap:";
  for (double v : g) out << ' ' << fmt17(v);
  out << '\n';
  ok &= mono && (cap < 8 || g.back() > 10.0);
  return ok;
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout) {
  CLI::App app{"cocyclelab: periodic data, transfer equations, and cohomology of 2x2 cocycles over toral automorphisms"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "TOML config file");

  int n_cap = 0;
  std::string cocycle_path, against_path, field_txt, what = "line", name = "plot", kind, id;
  std::string k_a, alpha_a, alpha2_a, k_b, alpha_b, alpha2_b;
  std::vector<int> wind_a, wind_b;
  std::vector<double> probe{0.5, 0.25};
  double radius = 0.3, eps = 0.1;
  bool mult = false, check = false;

  auto* pp = app.add_subcommand("periodic-points", "enumerate periodic points as CSV");
  pp->add_option("-n,--n-max", n_cap, "period cap");

  auto* pd = app.add_subcommand("periodic-data", "periodic products, Jordan types, Lyapunov exponents");
  pd->add_option("--cocycle", cocycle_path, "generator DSL file")->required();
  pd->add_option("-n,--n-max", n_cap, "period cap");

  auto* cc = app.add_subcommand("check-condition", "one-exponent check, or conjugate periodic data of a pair");
  cc->add_option("--cocycle", cocycle_path, "generator DSL file")->required();
  cc->add_option("--against", against_path, "second generator DSL file (pair check)");
  cc->add_option("-n,--n-max", n_cap, "period cap");

  auto* cl = app.add_subcommand("classify", "full type classification (I, I', II, II', III)");
  cl->add_option("--cocycle", cocycle_path, "generator DSL file")->required();
  cl->add_option("-n,--n-max", n_cap, "period cap for the periodic pre-classification");

  auto* ls = app.add_subcommand("livsic-scan", "periodic obstruction scan of a scalar generator");
  ls->add_option("--field", field_txt, "scalar DSL expression")->required();
  ls->add_flag("--mult", mult, "multiplicative scan (log of products)");
  ls->add_option("-n,--n-max", n_cap, "period cap");

  auto* lv = app.add_subcommand("livsic-solve", "solve the additive transfer equation in Fourier space");
  lv->add_option("--field", field_txt, "scalar DSL expression (trig polynomial)")->required();

  auto* rd = app.add_subcommand("reduce", "classify and report the model reduction");
  rd->add_option("--cocycle", cocycle_path, "generator DSL file")->required();

  auto* tc = app.add_subcommand("test-cohomology", "three-valued cohomology test of two model cocycles");
  tc->add_option("--kind", kind, "scalar | triangular | conformal | diagonal")->required();
  tc->add_option("--k-a", k_a, "scalar factor of A");
  tc->add_option("--alpha-a", alpha_a, "shear / angle / first diagonal entry of A");
  tc->add_option("--alpha2-a", alpha2_a, "second diagonal entry of A");
  tc->add_option("--wind-a", wind_a, "angle winding of A (two integers)")->expected(2);
  tc->add_option("--k-b", k_b, "scalar factor of B");
  tc->add_option("--alpha-b", alpha_b, "shear / angle / first diagonal entry of B");
  tc->add_option("--alpha2-b", alpha2_b, "second diagonal entry of B");
  tc->add_option("--wind-b", wind_b, "angle winding of B (two integers)")->expected(2);
  tc->add_option("-n,--n-max", n_cap, "period cap");

  auto* ct = app.add_subcommand("conjugator-table", "canonical periodic conjugators and dispersion probe");
  ct->add_option("--a", cocycle_path, "first generator DSL file")->required();
  ct->add_option("--b", against_path, "second generator DSL file")->required();
  ct->add_option("--kind", kind, "centralizer model kind for the quotient metric")->required();
  ct->add_option("--probe", probe, "probe point x1 x2")->expected(2);
  ct->add_option("--radius", radius, "probe ball radius");
  ct->add_option("-n,--n-max", n_cap, "period cap");

  auto* ga = app.add_subcommand("gallery", "construct a worked example (7.1.i, 7.1.ii, 7.1.iii, 2.6, 7.3)");
  ga->add_option("id", id, "gallery entry id")->required();
  ga->add_flag("--check", check, "verify the entry against its expectations");
  ga->add_option("--eps", eps, "generator size for entry 2.6");

  auto* pl = app.add_subcommand("plot", "line or conformal structure as CSV + SVG");
  pl->add_option("--cocycle", cocycle_path, "generator DSL file")->required();
  pl->add_option("--what", what, "line | conformal");
  pl->add_option("--name", name, "artifact base name");

  std::vector<const char*> argv{"lab"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    out << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    LabConfig cfg = config_path.empty() ? LabConfig{} : load_config(config_path);
    LatticeAutomorphism f(cfg.F, cfg.q1, cfg.q2);
    JordanTols jt{cfg.tol_disc, cfg.tol_nil};
    int n_max = n_cap > 0 ? n_cap : cfg.period_cap;
    using detail::load_cocycle;
    using detail::write_artifact;

    if (*pp) {
      int rows = 0;
      for (const auto& o : enumerate_orbits(f, n_max)) rows += o.period;
      std::string path = write_artifact(cfg, "periodic_points.csv",
                                        [&](std::ostream& o) { csv_periodic_points(o, f, n_max); });
      out << "periodic-points: " << rows << " rows (periods <= " << n_max << ") -> " << path << '\n';
      return 0;
    }
    if (*pd) {
      Cocycle A = load_cocycle(cocycle_path, f);
      std::string path = write_artifact(cfg, "periodic_data.csv",
                                        [&](std::ostream& o) { csv_periodic_data(o, A, n_max, jt); });
      auto rep = classify_periodic(A, n_max, jt);
      out << "periodic-data: class " << to_string(rep.cls) << " over periods <= " << n_max << " -> " << path << '\n';
      return 0;
    }
    if (*cc) {
      Cocycle A = load_cocycle(cocycle_path, f);
      ConditionReport r = against_path.empty()
                              ? check_one_exponent(A, n_max, cfg.obstruction_tol, jt)
                              : check_conjugate_periodic_data(A, load_cocycle(against_path, f), n_max, cfg.tol_eig, jt);
      std::string path = write_artifact(cfg, "condition.json",
                                        [&](std::ostream& o) { o << condition_json(r).dump(2) << '\n'; });
      out << "check-condition: " << (r.verdict ? "holds" : "violated") << ", worst " << fmt17(r.worst) << " -> "
          << path << '\n';
      return 0;
    }
    if (*cl || *rd) {
      Cocycle A = load_cocycle(cocycle_path, f);
      ClassifyOptions opt;
      opt.grid = cfg.grid;
      opt.iterations = cfg.iterations;
      if (n_cap > 0) opt.n_max = n_cap;
      auto cls = classify_full(A, opt);
      std::string path = write_artifact(cfg, "classification.json",
                                        [&](std::ostream& o) { o << classification_json(cls).dump(2) << '\n'; });
      out << "type " << to_string(cls.type) << "; holonomy (" << cls.holonomy_signs[0] << ", "
          << cls.holonomy_signs[1] << ")";
      if (cls.reduction)
        out << "; reduction residual " << fmt17(cls.reduction->residual)
            << (cls.reduction->on_cover ? " (on the orientation cover)" : "");
      out << " -> " << path << '\n';
      if (!cls.diagnostics.empty()) out << "  " << cls.diagnostics << '\n';
      if (*rd && cls.reduction) {
        std::string cpath = write_artifact(cfg, "conjugator_grid.csv", [&](std::ostream& o) {
          const auto& g = cls.reduction->C_grid;
          o << "x1,x2,C11,C12,C21,C22\n";
          for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j) {
              Vec2 x = g.node(i, j);
              const Mat2& C = g.at(i, j);
              o << fmt17(x.x) << ',' << fmt17(x.y) << ',' << fmt17(C.a) << ',' << fmt17(C.b) << ',' << fmt17(C.c)
                << ',' << fmt17(C.d) << '\n';
            }
        });
        out << "wrote " << cpath << '\n';
      }
      return cls.type == FullType::Undetermined ? 2 : 0;
    }
    if (*ls) {
      auto field = parse_scalar(field_txt, f);
      ObstructionReport r = mult ? scan_multiplicative(field, f, n_max) : scan_additive(field, f, n_max);
      std::string path = write_artifact(cfg, "obstructions.csv", [&](std::ostream& o) { csv_obstructions(o, r); });
      out << "livsic-scan: max obstruction " << fmt17(r.max_abs) << " over " << r.entries.size()
          << " orbits (tol " << fmt17(cfg.obstruction_tol) << ") -> " << path << '\n';
      return 0;
    }
    if (*lv) {
      TrigPoly alpha = to_trigpoly(parse_scalar(field_txt, f), f.q1, f.q2);
      auto res = solve_fourier(alpha, f);
      if (fourier_solved(res)) {
        const TrigPoly& phi = std::get<TrigPoly>(res);
        double worst = 0.0;
        for (int i = 0; i < 64; ++i)
          for (int j = 0; j < 64; ++j) {
            Vec2 x{f.q1 * (i + 0.31) / 64.0, f.q2 * (j + 0.17) / 64.0};
            worst = std::max(worst, std::abs(phi.eval(f.apply_float(x)) - phi.eval(x) - alpha.eval(x)));
          }
        std::string path = write_artifact(cfg, "phi.csv", [&](std::ostream& o) { csv_trigpoly(o, phi); });
        out << "livsic-solve: solved, verification residual " << fmt17(worst) << " -> " << path << '\n';
        return 0;
      }
      const auto& w = std::get<FourierWitness>(res);
      out << "livsic-solve: no solution (" << w.reason << "), orbit sum magnitude " << fmt17(std::abs(w.orbit_sum))
          << '\n';
      return 0;
    }
    if (*tc) {
      ModelForm mA = detail::build_model(kind, f, k_a, alpha_a, alpha2_a, wind_a);
      ModelForm mB = detail::build_model(kind, f, k_b, alpha_b, alpha2_b, wind_b);
      CohomologyVerdict v;
      if (kind == "scalar") v = test_scalar(mA, mB, n_max);
      else if (kind == "triangular") v = test_triangular(mA, mB, n_max);
      else if (kind == "conformal") v = test_conformal(mA, mB, n_max);
      else v = test_diagonal(mA, mB, n_max);
      return detail::verdict_exit(v, cfg, out);
    }
    if (*ct) {
      Cocycle A = load_cocycle(cocycle_path, f), B = load_cocycle(against_path, f);
      ModelKind mk;
      if (kind == "scalar") mk = ModelKind::Scalar;
      else if (kind == "triangular") mk = ModelKind::Triangular;
      else if (kind == "conformal") mk = ModelKind::Conformal;
      else if (kind == "diagonal") mk = ModelKind::Diagonal;
      else throw std::runtime_error("unknown model kind: " + kind);
      auto an = periodic_conjugator_analysis(A, B, n_max, mk, Vec2{probe[0], probe[1]}, radius);
      std::string path = write_artifact(cfg, "conjugators.csv",
                                        [&](std::ostream& o) { csv_conjugator_table(o, an); });
      out << "conjugator-table: " << an.table.size() << " orbits, sup norm " << fmt17(an.sup_norm) << ", "
          << an.failures << " non-conjugate, dispersion " << fmt17(an.dispersion) << " over " << an.in_ball_count
          << " in-ball points -> " << path << '\n';
      return 0;
    }
    if (*ga) {
      GalleryEntry e;
      if (id.rfind("7.1.", 0) == 0) e = gallery_7_1(id.substr(4));
      else if (id == "2.6") {
        LatticeAutomorphism base(cfg.F);
        e = gallery_2_6(eps, orbit_of(base, RationalPoint(1, 1, 2, 1, 1)), orbit_of(base, RationalPoint(1, 0, 2, 1, 1)));
      } else if (id == "7.3") e = gallery_7_3();
      else throw std::runtime_error("unknown gallery id: " + id);
      out << "gallery " << e.id << ": " << e.notes << '\n';
      if (!check) return 0;
      bool ok;
      if (id.rfind("7.1.", 0) == 0) ok = detail::check_gallery_7_1(e, cfg, out);
      else if (id == "2.6") ok = detail::check_gallery_2_6(e, out);
      else ok = detail::check_gallery_7_3(e, cfg, out);
      out << "gallery " << e.id << ": " << (ok ? "all checks passed" : "CHECK FAILED") << '\n';
      return ok ? 0 : 1;
    }
    if (*pl) {
      Cocycle A = load_cocycle(cocycle_path, f);
      if (what == "line") {
        auto L = find_line(A, cfg.grid, cfg.iterations);
        std::string c = write_artifact(cfg, name + ".csv", [&](std::ostream& o) { csv_line_field(o, L); });
        std::string s = write_artifact(cfg, name + ".svg", [&](std::ostream& o) { svg_line_field(o, L); });
        out << "plot: line field residual " << fmt17(L.residual) << " -> " << c << ", " << s << '\n';
      } else if (what == "conformal") {
        auto S = find_conformal(A, cfg.grid, cfg.iterations);
        std::string c = write_artifact(cfg, name + ".csv", [&](std::ostream& o) { csv_conformal_field(o, S); });
        std::string s = write_artifact(cfg, name + ".svg", [&](std::ostream& o) { svg_conformal_field(o, S); });
        out << "plot: conformal residual " << fmt17(S.residual) << (S.diverged ? " (diverged)" : "") << " -> " << c
            << ", " << s << '\n';
      } else
        throw std::runtime_error("plot --what must be line or conformal");
      return 0;
    }
    return 1;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cocyclelab
