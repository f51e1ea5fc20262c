// heattrace: command-line front end for the heat-trace library.
//
// Exit codes: 0 success, 1 numerical failure, 2 input validation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heattrace/heattrace.hpp"

namespace ht = heattrace;
using ht::json;

namespace {

constexpr int kOk = 0, kNumerical = 1, kValidation = 2;

// Accepts plain numbers and multiples of pi such as "pi/2", "2pi/3", "3*pi/2".
double parse_angle(const std::string& s) {
  static const std::regex pi_form(R"(^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$)");
  std::smatch m;
  try {
    if (std::regex_match(s, m, pi_form)) {
      const double num = m[1].str().empty() ? 1.0 : std::stod(m[1].str());
      const double den = m[2].str().empty() ? 1.0 : std::stod(m[2].str());
      return num * ht::detail::kPi / den;
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ht::ValidationError("angle", "cannot parse '" + s + "'");
}

// "lo,hi,n"
struct Range {
  double lo = 0.0, hi = 1.0;
  int n = 2;
  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

Range parse_range(const std::string& s, const char* field) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.n) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof() || r.n < 1 ||
      !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw ht::ValidationError(field, "expected lo,hi,n with n >= 1");
  return r;
}

std::pair<double, double> parse_pair_of(const std::string& s, const char* field) {
  double a = 0.0, b = 0.0;
  char c = 0;
  std::istringstream in(s);
  if (!(in >> a >> c >> b) || c != ',' || !(in >> std::ws).eof()) throw ht::ValidationError(field, "expected two comma-separated numbers");
  return {a, b};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

// Output sink: --out FILE or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ht::ValidationError("out", "cannot open " + path + " for writing");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void print_table_row(std::ostream& os, const std::string& a, const std::string& b, const std::string& c = "") {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-24s %s\n", a.c_str(), b.c_str(), c.c_str());
  os << buf;
}

// ---------------------------------------------------------------------------

struct CoeffsArgs {
  std::string spec;
  bool as_json = false, as_table = false, gb = false;
};

int cmd_coeffs(const CoeffsArgs& a) {
  const ht::PolygonSpec spec = ht::load_polygon_spec(a.spec);
  const ht::TraceCoefficients c = a.gb ? ht::coefficients_gb(spec) : ht::coefficients(spec);
  if (a.as_table) {
    print_table_row(std::cout, "coefficient", "value");
    print_table_row(std::cout, "a_minus1", fmt(c.a_minus1));
    print_table_row(std::cout, "a_minus_half", fmt(c.a_minus_half));
    print_table_row(std::cout, "a_0", fmt(c.a_0));
    std::cout << "\nbreakdown\n";
    for (const auto& b : c.breakdown) print_table_row(std::cout, b.coefficient + " " + b.source, fmt(b.value), b.label);
    std::cout << "remainder " << c.remainder_order << "\n";
  } else {
    std::cout << ht::coefficients_to_json(c).dump(2) << "\n";
  }
  return kOk;
}

struct CornerArgs {
  std::string pair, angle;
  bool numeric = false;
  ht::CornerNumericOptions opt;
};

int cmd_corner(const CornerArgs& a) {
  const ht::CornerPair p = ht::parse_pair(a.pair);
  const double alpha = parse_angle(a.angle);
  const ht::CornerKind k{p, alpha};
  k.validate();
  json out{{"pair", ht::pair_name(p)}, {"angle", alpha}, {"class", ht::is_mixed(p) ? "mixed" : "same_type"},
           {"closed_form", ht::corner_coeff(k)}};
  if (a.numeric) {
    const ht::CornerNumericResult r = ht::corner_coeff_numeric(p, alpha, a.opt);
    out["numeric"] = r.value;
    out["difference"] = r.difference;
    out["condition_number"] = r.fit.condition_number;
    out["fit_residual_max"] = r.fit.residual_max;
    out["max_modes"] = r.max_modes;
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

struct KernelArgs {
  std::string model = "sector", bc = "DD", out;
  std::string gamma = "pi/2";
  double t = 0.1, kappa = 1.0, tol = 1e-12;
  std::string source = "1,0.5";  // (r0, theta0) or (x0, y0)
  std::string range1 = "0,2,21", range2 = "0,1.5707963267948966,21";
};

int cmd_kernel(const KernelArgs& a) {
  const auto [s1, s2] = parse_pair_of(a.source, "source");
  const Range g1 = parse_range(a.range1, a.model == "sector" ? "r-range" : "x-range");
  const Range g2 = parse_range(a.range2, a.model == "sector" ? "theta-range" : "y-range");
  Sink sink(a.out);
  std::ostream& os = sink.os();
  if (a.model == "sector") {
    const ht::SectorSpec spec = ht::parse_sector_bcs(a.bc, parse_angle(a.gamma));
    os << "r,theta,value,tail_bound\n";
    for (int i = 0; i < g1.n; ++i)
      for (int j = 0; j < g2.n; ++j) {
        const auto r = ht::sector_heat_kernel_result(spec, a.t, g1.at(i), g2.at(j), s1, s2, a.tol);
        os << sci(g1.at(i)) << ',' << sci(g2.at(j)) << ',' << sci(r.value) << ',' << sci(r.tail_bound) << '\n';
      }
  } else if (a.model == "halfplane") {
    if (a.bc.size() != 1) throw ht::ValidationError("bc", "half-plane takes one letter: D, N or R");
    const ht::BoundaryCondition bc = ht::parse_bc_letter(a.bc[0], a.kappa);
    os << "x,y,value\n";
    for (int i = 0; i < g1.n; ++i)
      for (int j = 0; j < g2.n; ++j)
        os << sci(g1.at(i)) << ',' << sci(g2.at(j)) << ',' << sci(ht::half_plane_kernel(bc, a.t, g1.at(i), g2.at(j), s1, s2))
           << '\n';
  } else {
    throw ht::ValidationError("model", "expected sector or halfplane");
  }
  return kOk;
}

struct GreensArgs {
  std::string model = "sector", bc = "DD", gamma = "pi";
  double s = 1.0, tol = 1e-5, quad_tol = 1e-7;
  std::string point = "1,1", source = "2,2";
  bool check_laplace = false;
};

int cmd_greens(const GreensArgs& a) {
  const auto [p1, p2] = parse_pair_of(a.point, "point");
  const auto [q1, q2] = parse_pair_of(a.source, "source");
  json out{{"model", a.model}, {"bc", a.bc}, {"s", a.s}};
  double residual = 0.0;
  if (a.model == "sector") {
    const ht::SectorSpec spec = ht::parse_sector_bcs(a.bc, parse_angle(a.gamma));
    out["gamma"] = spec.gamma;
    if (a.check_laplace) {
      const auto c = ht::laplace_consistency_sector(spec, a.s, p1, p2, q1, q2, a.quad_tol);
      out.update({{"transform", c.transform}, {"greens", c.greens}, {"residual", c.residual}, {"quad_err", c.quad_err}});
      residual = c.residual;
    } else {
      const auto g = ht::greens_kl_result(spec, a.s, p1, p2, q1, q2, a.quad_tol);
      out.update({{"greens", g.value}, {"abs_err", g.abs_err}, {"mu_max", g.mu_max}});
    }
  } else if (a.model == "halfplane") {
    if (a.bc.size() != 1) throw ht::ValidationError("bc", "half-plane takes one letter: D or N");
    const ht::BoundaryCondition bc = ht::parse_bc_letter(a.bc[0], 1.0);
    if (a.check_laplace) {
      const auto c = ht::laplace_consistency_half_plane(bc, a.s, p1, p2, q1, q2, a.quad_tol);
      out.update({{"transform", c.transform}, {"greens", c.greens}, {"residual", c.residual}, {"quad_err", c.quad_err}});
      residual = c.residual;
    } else {
      out["greens"] = ht::half_plane_greens(bc, a.s, p1, p2, q1, q2);
    }
  } else {
    throw ht::ValidationError("model", "expected sector or halfplane");
  }
  int code = kOk;
  if (a.check_laplace) {
    out["tolerance"] = a.tol;
    out["pass"] = residual <= a.tol;
    if (!(residual <= a.tol)) code = kNumerical;
  }
  std::cout << out.dump(2) << "\n";
  return code;
}

struct TraceFitArgs {
  std::string domain = "rectangle";
  double a = 1.0, b = 1.0, kappa = 1.0, radius = 1.0;
  std::string bcs = "DDDD", edges = "DD", arc = "D", gamma = "pi/2";
  std::string window = "0.002,0.05";
  int samples = 16;
  double cutoff = 0.0;
  std::string csv;
  bool as_json = false;
};

int cmd_trace_fit(const TraceFitArgs& a) {
  const auto [t_min, t_max] = parse_pair_of(a.window, "window");
  if (!(t_min > 0.0 && t_max > t_min && t_max <= 0.2)) throw ht::ValidationError("window", "need 0 < t_min < t_max <= 0.2");
  if (a.samples < 8) throw ht::ValidationError("samples", "need at least 8 samples");
  auto arc_of = [](const std::string& s) {
    if (s == "D") return ht::ArcBc::Dirichlet;
    if (s == "N") return ht::ArcBc::Neumann;
    throw ht::ValidationError("arc", "expected D or N");
  };
  std::unique_ptr<ht::Spectrum> spec;
  ht::PolygonSpec poly;
  if (a.domain == "rectangle") {
    const ht::RectangleBcs bcs = ht::parse_rectangle_bcs(a.bcs, a.kappa);
    if (!(a.a > 0.0 && a.b > 0.0)) throw ht::ValidationError("a", "side lengths must be > 0");
    spec = std::make_unique<ht::RectangleSpectrum>(a.a, a.b, bcs);
    poly = ht::rectangle_polygon(a.a, a.b, bcs);
  } else if (a.domain == "sector") {
    const ht::SectorSpec edges = ht::parse_sector_bcs(a.edges, parse_angle(a.gamma));
    if (!(a.radius > 0.0)) throw ht::ValidationError("radius", "must be > 0");
    spec = std::make_unique<ht::SectorDiskSpectrum>(edges, a.radius, arc_of(a.arc));
    poly = ht::sector_polygon(edges, a.radius, arc_of(a.arc));
  } else if (a.domain == "disk") {
    if (!(a.radius > 0.0)) throw ht::ValidationError("radius", "must be > 0");
    spec = std::make_unique<ht::SectorDiskSpectrum>(ht::SectorDiskSpectrum::disk(a.radius, arc_of(a.arc)));
    poly = ht::disk_polygon(a.radius, arc_of(a.arc));
  } else {
    throw ht::ValidationError("domain", "expected rectangle, sector or disk");
  }
  const double cutoff = a.cutoff > 0.0 ? a.cutoff : ht::cutoff_for(*spec, t_min, 1e-14);
  const auto samples = ht::trace_samples(*spec, ht::log_spaced(t_min, t_max, a.samples), cutoff);
  if (!a.csv.empty()) {
    Sink sink(a.csv);
    ht::write_trace_csv(sink.os(), samples);
  }
  const ht::FitReport fit = ht::fit_asymptotics(samples);
  const ht::TraceCoefficients th = ht::coefficients(poly);
  if (a.as_json) {
    json out{{"fit", ht::fit_to_json(fit)}, {"theory", ht::coefficients_to_json(th)}, {"cutoff", cutoff}};
    std::cout << out.dump(2) << "\n";
  } else {
    print_table_row(std::cout, "coefficient", "fitted", "theory        difference");
    const std::pair<const char*, std::pair<double, double>> rows[] = {{"a_minus1", {fit.a_minus1, th.a_minus1}},
                                                                      {"a_minus_half", {fit.a_minus_half, th.a_minus_half}},
                                                                      {"a_0", {fit.a_0, th.a_0}}};
    for (const auto& [name, v] : rows) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%-13.10f %+.3e", v.second, v.first - v.second);
      print_table_row(std::cout, name, fmt(v.first), buf);
    }
    std::cout << "window [" << fmt(fit.t_min) << ", " << fmt(fit.t_max) << "], " << a.samples << " samples, cutoff "
              << fmt(cutoff) << ", condition " << fmt(fit.condition_number) << "\n";
  }
  return kOk;
}

struct DistinguishArgs {
  std::string spec1, spec2;
  double tol = 1e-12;
};

int cmd_distinguish(const DistinguishArgs& a) {
  const ht::PolygonSpec s1 = ht::load_polygon_spec(a.spec1), s2 = ht::load_polygon_spec(a.spec2);
  std::cout << ht::verdict_to_json(ht::distinguish(s1, s2, a.tol)).dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-trace coefficients, corner terms, model kernels and spectral fits"};
  app.require_subcommand(1);

  CoeffsArgs coeffs;
  auto* c = app.add_subcommand("coeffs", "Heat-trace coefficients of a domain specification");
  c->add_option("--spec", coeffs.spec, "JSON domain specification")->required();
  auto* cj = c->add_flag("--json", coeffs.as_json, "JSON report (default)");
  auto* ct = c->add_flag("--table", coeffs.as_table, "Plain-text table");
  cj->excludes(ct);
  c->add_flag("--gb", coeffs.gb, "Use the Euler-characteristic form");

  CornerArgs corner;
  auto* k = app.add_subcommand("corner", "Corner coefficient for a pair of boundary conditions");
  k->add_option("--pair", corner.pair, "DD, NN, RR, NR, RN, DN, ND, DR or RD")->required();
  k->add_option("--angle", corner.angle, "Interior angle in radians, or a multiple of pi such as pi/2")->required();
  k->add_flag("--numeric", corner.numeric, "Also compute the renormalized-integral value");
  k->add_option("--quad-tol", corner.opt.quad_tol, "Absolute quadrature tolerance per cutoff segment")->capture_default_str();
  k->add_option("--mode-tol", corner.opt.mode_tol, "Tail tolerance of the mode sum")->capture_default_str();
  k->add_option("--max-condition", corner.opt.max_condition, "Largest accepted fit condition number")->capture_default_str();

  KernelArgs kernel;
  auto* ke = app.add_subcommand("kernel", "Heat kernel on a grid, as CSV");
  ke->add_option("--model", kernel.model, "sector or halfplane")->capture_default_str();
  ke->add_option("--bc", kernel.bc, "Sector: two letters (DD, NN, DN, ND); half-plane: D, N or R")->capture_default_str();
  ke->add_option("--gamma", kernel.gamma, "Sector opening angle")->capture_default_str();
  ke->add_option("--kappa", kernel.kappa, "Robin parameter")->capture_default_str();
  ke->add_option("--t", kernel.t, "Time")->capture_default_str();
  ke->add_option("--tol", kernel.tol, "Series truncation tolerance")->capture_default_str();
  ke->add_option("--source", kernel.source, "Source point r0,theta0 or x0,y0")->capture_default_str();
  ke->add_option("--grid1", kernel.range1, "First coordinate lo,hi,n (r or x)")->capture_default_str();
  ke->add_option("--grid2", kernel.range2, "Second coordinate lo,hi,n (theta or y)")->capture_default_str();
  ke->add_option("--out", kernel.out, "CSV file (default stdout)");

  GreensArgs greens;
  auto* g = app.add_subcommand("greens", "Resolvent kernel and Laplace-transform consistency");
  g->add_option("--model", greens.model, "sector or halfplane")->capture_default_str();
  g->add_option("--bc", greens.bc, "Sector: two letters; half-plane: D or N")->capture_default_str();
  g->add_option("--gamma", greens.gamma, "Sector opening angle")->capture_default_str();
  g->add_option("--s", greens.s, "Laplace variable")->capture_default_str();
  g->add_option("--point", greens.point, "r,phi or x,y")->capture_default_str();
  g->add_option("--source", greens.source, "r0,phi0 or x0,y0")->capture_default_str();
  g->add_flag("--check-laplace", greens.check_laplace, "Compare with the Laplace transform of the heat kernel");
  g->add_option("--tol", greens.tol, "Allowed residual")->capture_default_str();
  g->add_option("--quad-tol", greens.quad_tol, "Quadrature tolerance")->capture_default_str();

  TraceFitArgs tf;
  auto* f = app.add_subcommand("trace-fit", "Fit the short-time heat trace of an exact spectrum");
  f->add_option("--domain", tf.domain, "rectangle, sector or disk")->capture_default_str();
  f->add_option("--a", tf.a, "Rectangle width")->capture_default_str();
  f->add_option("--b", tf.b, "Rectangle height")->capture_default_str();
  f->add_option("--bcs", tf.bcs, "Rectangle sides left,right,bottom,top as four letters D/N/R")->capture_default_str();
  f->add_option("--kappa", tf.kappa, "Robin parameter for R sides")->capture_default_str();
  f->add_option("--gamma", tf.gamma, "Sector opening angle")->capture_default_str();
  f->add_option("--edges", tf.edges, "Sector straight edges, two letters")->capture_default_str();
  f->add_option("--arc", tf.arc, "Arc condition D or N")->capture_default_str();
  f->add_option("--radius", tf.radius, "Sector or disk radius")->capture_default_str();
  f->add_option("--window", tf.window, "t_min,t_max")->capture_default_str();
  f->add_option("--samples", tf.samples, "Number of log-spaced times")->capture_default_str();
  f->add_option("--cutoff", tf.cutoff, "Eigenvalue cutoff (0: automatic)")->capture_default_str();
  f->add_option("--csv", tf.csv, "Write the trace samples to this CSV file");
  f->add_flag("--json", tf.as_json, "JSON report instead of a table");

  DistinguishArgs di;
  auto* d = app.add_subcommand("distinguish", "Compare two domains through their heat invariants");
  d->add_option("--spec1", di.spec1, "First JSON specification")->required();
  d->add_option("--spec2", di.spec2, "Second JSON specification")->required();
  d->add_option("--tol", di.tol, "Relative comparison tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*c) return cmd_coeffs(coeffs);
    if (*k) return cmd_corner(corner);
    if (*ke) return cmd_kernel(kernel);
    if (*g) return cmd_greens(greens);
    if (*f) return cmd_trace_fit(tf);
    if (*d) return cmd_distinguish(di);
  } catch (const ht::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ht::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ht::UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ht::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kValidation;
}
