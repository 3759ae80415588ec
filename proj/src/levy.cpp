#include "lmfg/levy.hpp"

#include "lmfg/fit.hpp"
#include "lmfg/quadrature.hpp"
#include "lmfg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace lmfg {
namespace {

constexpr int kMaxShells = 900;
constexpr std::size_t kExactRadialLimit = 4096;
constexpr int kRadialTable = 16384;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// cos t - 1 without cancellation.
double cos_minus_one(double t) {
  const double s = std::sin(0.5 * t);
  return -2.0 * s * s;
}

/// sin t - t without cancellation.
double sin_minus_id(double t) {
  if (std::abs(t) < 0.1) {
    const double t2 = t * t;
    return t * t2 * (-1.0 / 6.0 + t2 * (1.0 / 120.0 + t2 * (-1.0 / 5040.0 + t2 / 362880.0)));
  }
  return std::sin(t) - t;
}

/// e^{it} - 1 - it.
Complex compensated_exp(double t) { return {cos_minus_one(t), sin_minus_id(t)}; }
/// e^{it} - 1.
Complex plain_exp(double t) { return {cos_minus_one(t), std::sin(t)}; }

/// Spherical mean deficit: int_{S^{d-1}} (cos(s theta_1) - 1) dtheta.
double sphere_cos_deficit(int d, double s) {
  if (d == 1) return 2.0 * cos_minus_one(s);
  const double nu = 0.5 * d;
  if (s < 2.0) {
    // omega_{d-1} sum_{k>=1} (-1)^k (s/2)^{2k} Gamma(d/2) / (k! Gamma(k + d/2))
    const double q = 0.25 * s * s;
    double term = 1.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      term *= -q / (k * (k - 1 + nu));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sphere_area(d) * sum;
  }
  return std::pow(2.0 * M_PI, nu) * std::pow(s, 1.0 - nu) * std::cyl_bessel_j(nu - 1.0, s) - sphere_area(d);
}

/// int_0^top g(r) dr for integrands with an integrable power singularity at 0.
/// Dyadic shells [top 2^{-j-1}, top 2^{-j}]; once the shell contributions
/// decay geometrically the remaining tail is summed in closed form.
/// `osc` is the oscillation frequency of the integrand (0 when smooth).
template <class T, class G>
T dyadic_shells(G&& g, double top, double osc, const char* what) {
  T total{};
  double prev = -1.0;
  for (int j = 0; j < kMaxShells; ++j) {
    const double b = std::ldexp(top, -j), a = 0.5 * b;
    const double width = osc > 0.0 ? std::min(b - a, 3.0 / osc) : b - a;
    const T c = quad::composite(g, a, b, width, 16);
    total += c;
    const double mag = std::abs(c);
    const bool smooth = osc * b < 0.5;
    if (j >= 10 && smooth) {
      if (mag == 0.0 && std::abs(total) == 0.0) return total;
      if (prev > 0.0) {
        const double ratio = mag / prev;
        if (ratio < 0.99 && mag <= 1e-13 * std::abs(total)) return total + c * (ratio / (1.0 - ratio));
        if (mag <= 1e-17 * std::abs(total)) return total;
        if (j >= 60 && ratio >= 0.999)
          throw ContractViolation(std::string(what) + ": small-jump integral does not converge (measure not integrable against |z|^2 near 0)");
      }
    }
    if (!std::isfinite(mag)) throw ContractViolation(std::string(what) + ": non-finite integrand near the origin");
    prev = mag;
  }
  throw ContractViolation(std::string(what) + ": small-jump integral did not settle");
}

/// int_{e^{y0}}^{e^{y1}} h(r) dr through r = e^y. With y1 = inf the panels
/// march outwards until they stop contributing; growth means h is not
/// integrable at infinity.
double log_tail(const std::function<double(double)>& h, double y0, double y1, const char* what) {
  auto integrand = [&](double y) {
    const double r = std::exp(y);
    return h(r) * r;
  };
  if (std::isfinite(y1)) {
    if (y1 <= y0) return 0.0;
    return quad::composite(integrand, y0, y1, 0.25, 16);
  }
  double total = 0.0, prev = 0.0;
  int quiet = 0, growing = 0;
  for (double y = y0; y < y0 + 400.0; y += 0.25) {
    const double c = quad::panel(integrand, y, y + 0.25, 16);
    if (!std::isfinite(c)) break;
    // Panels that keep growing far out mean the integrand is not integrable.
    growing = (y > y0 + 10.0 && std::abs(c) > std::abs(prev)) ? growing + 1 : 0;
    if (growing >= 8) break;
    prev = c;
    total += c;
    quiet = (std::abs(c) <= 1e-16 * std::abs(total) || (c == 0.0 && total == 0.0)) ? quiet + 1 : 0;
    if (quiet >= 4) return total;
  }
  throw ContractViolation(std::string(what) + ": tail integral does not converge");
}

// --- one-dimensional measures ------------------------------------------------

double order1(const Levy1D& m) {
  return std::visit(overloaded{[](const IsotropicStable& s) { return s.sigma; },
                               [](const TemperedCGMY& c) { return c.Y; },
                               [](const TruncatedStable& t) { return t.sigma; },
                               [](const GeneralDensity& g) { return g.sigma_order; }},
                    m);
}

double density1(const Levy1D& m, double z) {
  const double a = std::abs(z);
  return std::visit(overloaded{[&](const IsotropicStable& s) { return stable_constant(1, s.sigma) * std::pow(a, -1.0 - s.sigma); },
                               [&](const TemperedCGMY& c) {
                                 return c.C * std::pow(a, -1.0 - c.Y) * std::exp(z > 0 ? -c.G * z : c.M * z);
                               },
                               [&](const TruncatedStable& t) {
                                 return a < t.cutoff ? stable_constant(1, t.sigma) * std::pow(a, -1.0 - t.sigma) : 0.0;
                               },
                               [&](const GeneralDensity& g) { return g.density(z); }},
                    m);
}

/// Upper end of the small-jump support.
double inner_top1(const Levy1D& m) {
  if (auto t = std::get_if<TruncatedStable>(&m)) return std::min(1.0, t->cutoff);
  return 1.0;
}

/// Outer end of the support handled by quadrature (inf when unbounded).
double outer_top1(const Levy1D& m) {
  if (auto t = std::get_if<TruncatedStable>(&m)) return std::max(1.0, t->cutoff);
  if (auto g = std::get_if<GeneralDensity>(&m)) return g->tail_radius;
  return std::numeric_limits<double>::infinity();
}

Complex singular1(const Levy1D& m, double xi) {
  if (xi == 0.0) return 0.0;
  auto g = [&](double r) {
    return compensated_exp(r * xi) * density1(m, r) + compensated_exp(-r * xi) * density1(m, -r);
  };
  return dyadic_shells<Complex>(g, inner_top1(m), std::abs(xi), "levy symbol");
}

/// int_{1 <= |z| <= R} (e^{i xi z} - 1) k(z) dz.
Complex bounded_panels1(const Levy1D& m, double xi, double r_max) {
  if (xi == 0.0 || r_max <= 1.0) return 0.0;
  auto g = [&](double r) { return plain_exp(r * xi) * density1(m, r) + plain_exp(-r * xi) * density1(m, -r); };
  return quad::composite(g, 1.0, r_max, std::min(0.5, 3.0 / std::abs(xi)), 16);
}

/// int_1^inf z^{-Y} e^{-lambda z} dz.
double cgmy_tail_moment(double Y, double lambda) {
  auto h = [&](double r) { return std::pow(r, -Y) * std::exp(-lambda * r); };
  return log_tail(h, 0.0, std::numeric_limits<double>::infinity(), "cgmy");
}

double tail_mass_beyond1(const Levy1D& m, double R) {
  return std::visit(
      overloaded{[&](const IsotropicStable& s) { return 2.0 * stable_constant(1, s.sigma) * std::pow(R, -s.sigma) / s.sigma; },
                 [&](const TemperedCGMY& c) {
                   auto h = [&](double r) { return c.C * std::pow(r, -1.0 - c.Y) * (std::exp(-c.G * r) + std::exp(-c.M * r)); };
                   return log_tail(h, std::log(R), std::numeric_limits<double>::infinity(), "cgmy");
                 },
                 [&](const TruncatedStable& t) {
                   if (t.cutoff <= R) return 0.0;
                   return 2.0 * stable_constant(1, t.sigma) * (std::pow(R, -t.sigma) - std::pow(t.cutoff, -t.sigma)) / t.sigma;
                 },
                 [&](const GeneralDensity& g) {
                   const double r = std::min(R, g.tail_radius);
                   double inside = 0.0;
                   if (r > 1.0) inside = quad::composite([&](double z) { return g.density(z) + g.density(-z); }, 1.0, r, 0.5, 16);
                   return std::max(0.0, g.tail_total - inside);
                 }},
      m);
}

Complex symbol1(const Levy1D& m, double xi) {
  if (xi == 0.0) return 0.0;
  return std::visit(
      overloaded{[&](const IsotropicStable& s) { return Complex(-std::pow(std::abs(xi), s.sigma), 0.0); },
                 [&](const TemperedCGMY& c) {
                   const Complex ix(0.0, xi);
                   const double Y = c.Y;
                   const Complex pos = std::pow(Complex(c.G, 0.0) - ix, Y) - std::pow(c.G, Y) + ix * Y * std::pow(c.G, Y - 1.0);
                   const Complex neg = std::pow(Complex(c.M, 0.0) + ix, Y) - std::pow(c.M, Y) - ix * Y * std::pow(c.M, Y - 1.0);
                   const Complex drift = ix * c.C * (cgmy_tail_moment(Y, c.G) - cgmy_tail_moment(Y, c.M));
                   return c.C * std::tgamma(-Y) * (pos + neg) + drift;
                 },
                 [&](const TruncatedStable& t) { return singular1(m, xi) + bounded_panels1(m, xi, t.cutoff); },
                 [&](const GeneralDensity& g) {
                   // Mass beyond the quadrature radius only enters through -f(x).
                   return singular1(m, xi) + bounded_panels1(m, xi, g.tail_radius) - tail_mass_beyond1(m, g.tail_radius);
                 }},
      m);
}

double inner_moment1(const Levy1D& m) {
  return std::visit(overloaded{[&](const IsotropicStable& s) { return 2.0 * stable_constant(1, s.sigma) / (2.0 - s.sigma); },
                               [&](const TruncatedStable& t) {
                                 return 2.0 * stable_constant(1, t.sigma) * std::pow(std::min(1.0, t.cutoff), 2.0 - t.sigma) /
                                        (2.0 - t.sigma);
                               },
                               [&](const auto&) {
                                 auto g = [&](double r) { return r * r * (density1(m, r) + density1(m, -r)); };
                                 return dyadic_shells<double>(g, 1.0, 0.0, "levy measure");
                               }},
                    m);
}

double radial_density1(const Levy1D& m, double r) { return density1(m, r) + density1(m, -r); }

double tail_integral1(const Levy1D& m, const std::function<double(double)>& g) {
  auto h = [&](double r) { return g(r) * radial_density1(m, r); };
  const double top = outer_top1(m);
  return log_tail(h, 0.0, std::isfinite(top) ? std::log(top) : top, "levy measure");
}

bool symmetric1(const Levy1D& m) {
  return std::visit(overloaded{[](const TemperedCGMY& c) { return c.G == c.M; },
                               [](const GeneralDensity& g) {
                                 for (double z : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
                                   const double a = g.density(z), b = g.density(-z);
                                   if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) return false;
                                 }
                                 return true;
                               },
                               [](const auto&) { return true; }},
                    m);
}

Levy1D reflect1(const Levy1D& m) {
  return std::visit(overloaded{[](const TemperedCGMY& c) -> Levy1D { return TemperedCGMY{c.C, c.M, c.G, c.Y}; },
                               [](const GeneralDensity& g) -> Levy1D {
                                 GeneralDensity r = g;
                                 auto f = g.density;
                                 r.density = [f](double z) { return f(-z); };
                                 r.label = g.label + "-reflected";
                                 return r;
                               },
                               [](const auto& x) -> Levy1D { return x; }},
                    m);
}

void require_stable_order(double s, const char* what) {
  if (!(s > 1.0 && s < 2.0)) throw ContractViolation(std::string(what) + ": order must lie in (1, 2)");
}

void validate1(const Levy1D& m) {
  std::visit(overloaded{[](const IsotropicStable& s) { require_stable_order(s.sigma, "isotropic stable"); },
                        [](const TemperedCGMY& c) {
                          require_stable_order(c.Y, "cgmy");
                          if (!(c.C > 0.0 && c.G > 0.0 && c.M > 0.0)) throw ContractViolation("cgmy: C, G, M must be positive");
                        },
                        [](const TruncatedStable& t) {
                          require_stable_order(t.sigma, "truncated stable");
                          if (!(t.cutoff > 0.0)) throw ContractViolation("truncated stable: cutoff must be positive");
                        },
                        [](const GeneralDensity& g) {
                          if (!g.density) throw ContractViolation("general density: no density callable");
                          require_stable_order(g.sigma_order, "general density");
                          if (!(g.tail_total >= 0.0)) throw ContractViolation("general density: tail mass must be nonnegative");
                          if (!(g.tail_radius > 1.0)) throw ContractViolation("general density: tail radius must exceed 1");
                        }},
             m);
  if (const auto* g = std::get_if<GeneralDensity>(&m)) {
    // int (1 ^ |z|^2) dmu < inf, checked by quadrature.
    for (double z : {0.01, 0.1, 0.5, 1.5, 3.0})
      if (!(g->density(z) >= 0.0 && g->density(-z) >= 0.0)) throw ContractViolation("general density: density must be nonnegative");
    inner_moment1(m);
    const double inside =
        quad::composite([&](double z) { return g->density(z) + g->density(-z); }, 1.0, g->tail_radius, 0.5, 16);
    if (inside > g->tail_total * (1.0 + 1e-6) + 1e-12)
      throw ContractViolation("general density: tail_total is smaller than the mass on [1, tail_radius]");
  }
}

std::string name1(const Levy1D& m) {
  std::ostringstream os;
  std::visit(overloaded{[&](const IsotropicStable& s) { os << "stable(sigma=" << s.sigma << ")"; },
                        [&](const TemperedCGMY& c) { os << "cgmy(C=" << c.C << ",G=" << c.G << ",M=" << c.M << ",Y=" << c.Y << ")"; },
                        [&](const TruncatedStable& t) { os << "truncated-stable(sigma=" << t.sigma << ",cutoff=" << t.cutoff << ")"; },
                        [&](const GeneralDensity& g) { os << g.label << "(order=" << g.sigma_order << ")"; }},
             m);
  return os.str();
}

// --- isotropic measures in d dimensions --------------------------------------

/// Singular radial part c int_0^{top} r^{-1-sigma} (omega(r|xi|) - omega) dr.
double radial_singular(int d, double sigma, double top, double xi_norm) {
  if (xi_norm == 0.0) return 0.0;
  const double c = stable_constant(d, sigma);
  auto g = [&](double r) { return std::pow(r, -1.0 - sigma) * sphere_cos_deficit(d, r * xi_norm); };
  return c * dyadic_shells<double>(g, top, xi_norm, "levy symbol");
}

double radial_bounded(int d, double sigma, double cutoff, double xi_norm) {
  if (xi_norm == 0.0 || cutoff <= 1.0) return 0.0;
  const double c = stable_constant(d, sigma);
  auto g = [&](double r) { return std::pow(r, -1.0 - sigma) * sphere_cos_deficit(d, r * xi_norm); };
  return c * quad::composite(g, 1.0, cutoff, std::min(0.5, 3.0 / xi_norm), 16);
}

double norm_of(std::span<const double> xi) {
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

enum class Part { full, singular };

/// Evaluates a radial symbol at every slot, exactly on the distinct |xi|
/// values when there are few of them, otherwise through a fine cubic table.
ComplexArray radial_table(const Grid& grid, const std::function<double(double)>& fn) {
  const RealArray mag = frequency_magnitude(grid);
  std::map<double, double> cache;
  for (Index i = 0; i < mag.size(); ++i) {
    cache.emplace(mag[i], 0.0);
    if (cache.size() > kExactRadialLimit) break;
  }
  ComplexArray out(grid.size());
  if (cache.size() <= kExactRadialLimit) {
    for (auto& [k, v] : cache) v = fn(k);
    for (Index i = 0; i < mag.size(); ++i) out[i] = cache.at(mag[i]);
    return out;
  }
  // Catmull-Rom on a uniform table over [0, max |xi|].
  const double top = mag.maxCoeff();
  const double h = top / (kRadialTable - 1);
  std::vector<double> t(kRadialTable + 2);
  for (int j = 0; j < kRadialTable + 2; ++j) t[j] = fn(std::min(j, kRadialTable - 1) * h + std::max(0, j - kRadialTable + 1) * h);
  for (Index i = 0; i < mag.size(); ++i) {
    const double u = mag[i] / h;
    const int j = std::min(static_cast<int>(u), kRadialTable - 2);
    const double s = u - j;
    const double p0 = j > 0 ? t[j - 1] : t[1];  // even function: mirror at 0
    const double p1 = t[j], p2 = t[j + 1], p3 = t[j + 2];
    out[i] = p1 + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)));
  }
  return out;
}

ComplexArray symbol_table(const LevyMeasureSpec& spec, const Grid& grid, Part part) {
  spec.require_dim(grid.dim());
  const int d = grid.dim();
  const auto& v = spec.variant();
  if (spec.is_engine()) {
    const double a = std::get<IsotropicStable>(v).sigma;
    return (-frequency_magnitude(grid).pow(a)).cast<Complex>();
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v)) {
    if (part == Part::full) return (-frequency_magnitude(grid).pow(s->sigma)).cast<Complex>();
    return radial_table(grid, [&](double k) { return radial_singular(d, s->sigma, 1.0, k); });
  }
  if (const auto* t = std::get_if<TruncatedStable>(&v)) {
    const double top = std::min(1.0, t->cutoff);
    return radial_table(grid, [&](double k) {
      return radial_singular(d, t->sigma, top, k) + (part == Part::full ? radial_bounded(d, t->sigma, t->cutoff, k) : 0.0);
    });
  }
  if (const auto* sum = std::get_if<AnisotropicSum>(&v)) {
    ComplexArray out = ComplexArray::Zero(grid.size());
    for (const auto& c : sum->components) {
      const int n = grid.points(c.axis);
      std::vector<Complex> line(n);
      for (int j = 0; j < n; ++j) {
        const double xi = grid.frequency(c.axis, j);
        line[j] = part == Part::full ? symbol1(c.measure, xi) : singular1(c.measure, xi);
      }
      const Index stride = grid.stride(c.axis);
      for (Index i = 0; i < grid.size(); ++i) out[i] += line[(i / stride) % n];
    }
    return out;
  }
  // One-dimensional variants.
  const Levy1D m = std::visit(overloaded{[](const TemperedCGMY& c) -> Levy1D { return c; },
                                         [](const GeneralDensity& g) -> Levy1D { return g; },
                                         [](const auto&) -> Levy1D { throw std::logic_error("unreachable"); }},
                              v);
  ComplexArray out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double xi = grid.frequency(0, static_cast<int>(i));
    out[i] = part == Part::full ? symbol1(m, xi) : singular1(m, xi);
  }
  return out;
}

/// S_k <- (S_k + conj S_{-k}) / 2, so the operator maps real data to real data.
void hermitian_symmetrize(const Grid& grid, ComplexArray& s) {
  ComplexArray out(s.size());
  for (Index i = 0; i < s.size(); ++i) out[i] = 0.5 * (s[i] + std::conj(s[grid.negated_slot(i)]));
  out[0] = 0.0;
  s = std::move(out);
}

double general_remainder(const LevyMeasureSpec& spec) {
  if (const auto* g = std::get_if<GeneralDensity>(&spec.variant())) return 2.0 * tail_mass_beyond1(*g, g->tail_radius);
  double r = 0.0;
  if (const auto* sum = std::get_if<AnisotropicSum>(&spec.variant()))
    for (const auto& c : sum->components)
      if (const auto* g = std::get_if<GeneralDensity>(&c.measure)) r += 2.0 * tail_mass_beyond1(*g, g->tail_radius);
  return r;
}

/// Returns the spec's measure as a 1D measure when it is one-dimensional.
std::optional<Levy1D> as_1d(const LevyVariant& v) {
  return std::visit(overloaded{[](const IsotropicStable& s) -> std::optional<Levy1D> { return Levy1D{s}; },
                               [](const TemperedCGMY& c) -> std::optional<Levy1D> { return Levy1D{c}; },
                               [](const TruncatedStable& t) -> std::optional<Levy1D> { return Levy1D{t}; },
                               [](const GeneralDensity& g) -> std::optional<Levy1D> { return Levy1D{g}; },
                               [](const AnisotropicSum&) -> std::optional<Levy1D> { return std::nullopt; }},
                    v);
}

/// Pointwise oracle for a 1D measure acting along `axis`.
double line_oracle(const Levy1D& m, const TestFunction& f, std::span<const double> x, int axis, double outer) {
  const std::vector<double> x0(x.begin(), x.end());
  const auto& rule = quad::gauss_legendre(12);
  std::vector<double> y(x0);
  auto at = [&](double z) {
    y = x0;
    y[axis] += z;
    return std::span<const double>(y);
  };
  // int_0^1 (1-s) f''(x + s z) ds
  auto remainder = [&](double z) {
    double acc = 0.0;
    for (int q = 0; q < 12; ++q) {
      const double s = 0.5 * (rule.nodes[q] + 1.0);
      acc += 0.5 * rule.weights[q] * (1.0 - s) * f.hessian(at(s * z))(axis, axis);
    }
    return acc;
  };
  auto inner = [&](double r) { return r * r * (density1(m, r) * remainder(r) + density1(m, -r) * remainder(-r)); };
  double total = dyadic_shells<double>(inner, inner_top1(m), 0.0, "operator oracle");
  const double fx = f.value(x0);
  const double r_out = std::min(outer, outer_top1(m));
  if (r_out > 1.0) {
    auto outer_fn = [&](double r) {
      const double fp = f.value(at(r)), fm = f.value(at(-r));
      return (fp - fx) * density1(m, r) + (fm - fx) * density1(m, -r);
    };
    total += quad::composite(outer_fn, 1.0, r_out, 0.25, 16);
  }
  total -= fx * tail_mass_beyond1(m, std::max(1.0, r_out));
  return total;
}

/// Pointwise oracle for a rotation-invariant (possibly truncated) stable
/// measure in two dimensions, in polar coordinates.
double polar_oracle(double sigma, double cutoff, const TestFunction& f, std::span<const double> x, const OracleOptions& opt) {
  const std::vector<double> x0(x.begin(), x.end());
  const double c = stable_constant(2, sigma);
  const int na = opt.angular_points;
  const double dth = 2.0 * M_PI / na;
  const auto& rule = quad::gauss_legendre(12);
  std::vector<double> y(2);
  auto angular_remainder = [&](double r) {
    double acc = 0.0;
    for (int k = 0; k < na; ++k) {
      const double th = k * dth, e0 = std::cos(th), e1 = std::sin(th);
      for (int q = 0; q < 12; ++q) {
        const double s = 0.5 * (rule.nodes[q] + 1.0);
        y[0] = x0[0] + s * r * e0;
        y[1] = x0[1] + s * r * e1;
        const Eigen::MatrixXd h = f.hessian(y);
        acc += 0.5 * rule.weights[q] * (1.0 - s) * (e0 * e0 * h(0, 0) + 2.0 * e0 * e1 * h(0, 1) + e1 * e1 * h(1, 1));
      }
    }
    return acc * dth;
  };
  const double fx = f.value(x0);
  auto inner = [&](double r) { return c * std::pow(r, 1.0 - sigma) * angular_remainder(r); };
  double total = dyadic_shells<double>(inner, std::min(1.0, cutoff), 0.0, "operator oracle");
  const double r_out = std::min(opt.outer_radius, cutoff);
  if (r_out > 1.0) {
    auto outer_fn = [&](double r) {
      double acc = 0.0;
      for (int k = 0; k < na; ++k) {
        y[0] = x0[0] + r * std::cos(k * dth);
        y[1] = x0[1] + r * std::sin(k * dth);
        acc += f.value(y) - fx;
      }
      return c * std::pow(r, -1.0 - sigma) * acc * dth;
    };
    total += quad::composite(outer_fn, 1.0, r_out, 0.25, 16);
  }
  const double R = std::max(1.0, r_out);
  if (cutoff > R) total -= fx * c * sphere_area(2) * (std::pow(R, -sigma) - std::pow(cutoff, -sigma)) / sigma;
  return total;
}

}  // namespace

// --- spec ----------------------------------------------------------------------

double stable_constant(int dim, double sigma) {
  if (dim < 1) throw ContractViolation("stable_constant: dimension must be positive");
  return sigma * std::pow(2.0, sigma - 1.0) * std::tgamma(0.5 * (dim + sigma)) /
         (std::pow(M_PI, 0.5 * dim) * std::tgamma(1.0 - 0.5 * sigma));
}

double sphere_area(int dim) { return 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim); }

LevyMeasureSpec::LevyMeasureSpec(LevyVariant v) : v_(std::move(v)) {
  std::visit(overloaded{[](const AnisotropicSum& s) {
                          if (s.components.empty()) throw ContractViolation("anisotropic sum: no components");
                          std::vector<int> axes;
                          for (const auto& c : s.components) {
                            if (c.axis < 0) throw ContractViolation("anisotropic sum: negative axis");
                            if (std::find(axes.begin(), axes.end(), c.axis) != axes.end())
                              throw ContractViolation("anisotropic sum: repeated axis");
                            axes.push_back(c.axis);
                            validate1(c.measure);
                          }
                        },
                        [](const IsotropicStable& s) { validate1(Levy1D{s}); },
                        [](const TemperedCGMY& c) { validate1(Levy1D{c}); },
                        [](const TruncatedStable& t) { validate1(Levy1D{t}); },
                        [](const GeneralDensity& g) { validate1(Levy1D{g}); }},
             v_);
}

LevyMeasureSpec LevyMeasureSpec::engine(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ContractViolation("engine symbol: alpha must lie in (0, 2]");
  return LevyMeasureSpec(IsotropicStable{alpha}, true);
}

std::string LevyMeasureSpec::name() const {
  if (engine_) return "engine(alpha=" + std::to_string(std::get<IsotropicStable>(v_).sigma) + ")";
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    std::string out = "sum[";
    for (std::size_t i = 0; i < s->components.size(); ++i) {
      if (i) out += ", ";
      out += "axis" + std::to_string(s->components[i].axis) + ":" + name1(s->components[i].measure);
    }
    return out + "]";
  }
  return name1(*as_1d(v_));
}

double LevyMeasureSpec::order() const {
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    double o = 2.0;
    for (const auto& c : s->components) o = std::min(o, order1(c.measure));
    return o;
  }
  return order1(*as_1d(v_));
}

int LevyMeasureSpec::min_dim() const {
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    int a = 0;
    for (const auto& c : s->components) a = std::max(a, c.axis);
    return a + 1;
  }
  return 1;
}

bool LevyMeasureSpec::one_dimensional() const {
  return std::holds_alternative<TemperedCGMY>(v_) || std::holds_alternative<GeneralDensity>(v_);
}

void LevyMeasureSpec::require_dim(int d) const {
  if (d < min_dim()) throw ContractViolation(name() + ": needs dimension >= " + std::to_string(min_dim()));
  if (one_dimensional() && d != 1) throw ContractViolation(name() + ": one-dimensional measure used in dimension " + std::to_string(d));
}

bool LevyMeasureSpec::symmetric() const {
  if (const auto* s = std::get_if<AnisotropicSum>(&v_))
    return std::all_of(s->components.begin(), s->components.end(), [](const auto& c) { return symmetric1(c.measure); });
  return symmetric1(*as_1d(v_));
}

namespace {
void require_measure(const LevyMeasureSpec& s) {
  if (s.is_engine()) throw ContractViolation("engine symbol carries no jump-measure description");
}
}  // namespace

double LevyMeasureSpec::tail_mass(int dim) const { return tail_mass_beyond(dim, 1.0); }

double LevyMeasureSpec::tail_mass_beyond(int dim, double radius) const {
  require_measure(*this);
  require_dim(dim);
  if (!(radius >= 1.0)) throw ContractViolation("tail_mass_beyond: radius must be >= 1");
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    double m = 0.0;
    for (const auto& c : s->components) m += tail_mass_beyond1(c.measure, radius);
    return m;
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v_))
    return stable_constant(dim, s->sigma) * sphere_area(dim) * std::pow(radius, -s->sigma) / s->sigma;
  if (const auto* t = std::get_if<TruncatedStable>(&v_)) {
    if (t->cutoff <= radius) return 0.0;
    return stable_constant(dim, t->sigma) * sphere_area(dim) * (std::pow(radius, -t->sigma) - std::pow(t->cutoff, -t->sigma)) /
           t->sigma;
  }
  return tail_mass_beyond1(*as_1d(v_), radius);
}

double LevyMeasureSpec::inner_second_moment(int dim) const {
  require_measure(*this);
  require_dim(dim);
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    double m = 0.0;
    for (const auto& c : s->components) m += inner_moment1(c.measure);
    return m;
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v_))
    return stable_constant(dim, s->sigma) * sphere_area(dim) / (2.0 - s->sigma);
  if (const auto* t = std::get_if<TruncatedStable>(&v_))
    return stable_constant(dim, t->sigma) * sphere_area(dim) * std::pow(std::min(1.0, t->cutoff), 2.0 - t->sigma) /
           (2.0 - t->sigma);
  return inner_moment1(*as_1d(v_));
}

double LevyMeasureSpec::radial_density(int dim, double r) const {
  require_measure(*this);
  require_dim(dim);
  if (!(r > 0.0)) throw ContractViolation("radial_density: radius must be positive");
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    double m = 0.0;
    for (const auto& c : s->components) m += radial_density1(c.measure, r);
    return m;
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v_))
    return stable_constant(dim, s->sigma) * sphere_area(dim) * std::pow(r, -1.0 - s->sigma);
  if (const auto* t = std::get_if<TruncatedStable>(&v_))
    return r < t->cutoff ? stable_constant(dim, t->sigma) * sphere_area(dim) * std::pow(r, -1.0 - t->sigma) : 0.0;
  return radial_density1(*as_1d(v_), r);
}

double LevyMeasureSpec::tail_integral(int dim, const std::function<double(double)>& g) const {
  require_measure(*this);
  require_dim(dim);
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    double m = 0.0;
    for (const auto& c : s->components) m += tail_integral1(c.measure, g);
    return m;
  }
  if (one_dimensional()) return tail_integral1(*as_1d(v_), g);
  double top = std::numeric_limits<double>::infinity();
  if (const auto* t = std::get_if<TruncatedStable>(&v_)) top = std::max(1.0, t->cutoff);
  auto h = [&](double r) { return g(r) * radial_density(dim, r); };
  return log_tail(h, 0.0, std::isfinite(top) ? std::log(top) : top, "levy measure");
}

LevyMeasureSpec LevyMeasureSpec::reflected() const {
  if (engine_) return *this;
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    AnisotropicSum r = *s;
    for (auto& c : r.components) c.measure = reflect1(c.measure);
    return LevyMeasureSpec(LevyVariant{r}, false);
  }
  return std::visit(overloaded{[&](const TemperedCGMY& c) { return LevyMeasureSpec(TemperedCGMY{c.C, c.M, c.G, c.Y}, false); },
                               [&](const GeneralDensity& g) {
                                 return LevyMeasureSpec(LevyVariant{std::get<GeneralDensity>(reflect1(Levy1D{g}))}, false);
                               },
                               [&](const auto&) { return *this; }},
                    v_);
}

Complex LevyMeasureSpec::symbol(std::span<const double> xi) const {
  require_dim(static_cast<int>(xi.size()));
  const int d = static_cast<int>(xi.size());
  if (engine_) return -std::pow(norm_of(xi), std::get<IsotropicStable>(v_).sigma);
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    Complex acc = 0.0;
    for (const auto& c : s->components) acc += symbol1(c.measure, xi[c.axis]);
    return acc;
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v_)) return -std::pow(norm_of(xi), s->sigma);
  if (const auto* t = std::get_if<TruncatedStable>(&v_)) {
    const double k = norm_of(xi);
    return radial_singular(d, t->sigma, std::min(1.0, t->cutoff), k) + radial_bounded(d, t->sigma, t->cutoff, k);
  }
  return symbol1(*as_1d(v_), xi[0]);
}

Complex LevyMeasureSpec::singular_symbol(std::span<const double> xi) const {
  require_measure(*this);
  require_dim(static_cast<int>(xi.size()));
  const int d = static_cast<int>(xi.size());
  if (const auto* s = std::get_if<AnisotropicSum>(&v_)) {
    Complex acc = 0.0;
    for (const auto& c : s->components) acc += singular1(c.measure, xi[c.axis]);
    return acc;
  }
  if (const auto* s = std::get_if<IsotropicStable>(&v_)) return radial_singular(d, s->sigma, 1.0, norm_of(xi));
  if (const auto* t = std::get_if<TruncatedStable>(&v_)) return radial_singular(d, t->sigma, std::min(1.0, t->cutoff), norm_of(xi));
  return singular1(*as_1d(v_), xi[0]);
}

void require_solver_order(const LevyMeasureSpec& spec) {
  if (spec.is_engine()) throw ContractViolation("solvers need a jump operator of order in (1, 2); got " + spec.name());
  const double s = spec.order();
  if (!(s > 1.0 && s < 2.0)) throw ContractViolation("solvers need order in (1, 2); got " + spec.name());
}

// --- tabulated symbols ---------------------------------------------------------

Symbol build_symbol(const LevyMeasureSpec& spec, const Grid& grid) {
  ComplexArray s = symbol_table(spec, grid, Part::full);
  hermitian_symmetrize(grid, s);
  return Symbol{grid, std::move(s), spec, spec.is_engine() ? 0.0 : general_remainder(spec)};
}

SymbolSplit split_symbol(const LevyMeasureSpec& spec, const Grid& grid) {
  require_measure(spec);
  ComplexArray full = symbol_table(spec, grid, Part::full);
  ComplexArray sing = symbol_table(spec, grid, Part::singular);
  hermitian_symmetrize(grid, full);
  hermitian_symmetrize(grid, sing);
  ComplexArray bounded = full - sing;
  const double rem = general_remainder(spec);
  return SymbolSplit{Symbol{grid, std::move(sing), spec, 0.0}, Symbol{grid, std::move(bounded), spec, rem}};
}

Symbol adjoint_symbol(const Symbol& sym) {
  return Symbol{sym.grid, sym.values.conjugate(), sym.spec.reflected(), sym.quadrature_remainder};
}

RealArray apply_operator(const Symbol& sym, const RealArray& values) {
  return apply_multiplier(sym.grid, values, sym.values);
}

Field apply_operator(const Symbol& sym, const Field& f) {
  require_same_grid(sym.grid, f.grid, "apply_operator");
  return Field(f.grid, apply_operator(sym, f.values), f.time);
}

// --- oracle --------------------------------------------------------------------

TestFunction gaussian_test_function(std::vector<double> center, double width) {
  if (!(width > 0.0)) throw ContractViolation("gaussian_test_function: width must be positive");
  const double w2 = width * width;
  TestFunction f;
  f.value = [center, w2](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < center.size(); ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    return std::exp(-0.5 * r2 / w2);
  };
  f.hessian = [center, w2](std::span<const double> x) {
    const int d = static_cast<int>(center.size());
    Eigen::VectorXd u(d);
    for (int a = 0; a < d; ++a) u[a] = x[a] - center[a];
    const double g = std::exp(-0.5 * u.squaredNorm() / w2);
    Eigen::MatrixXd h = (u * u.transpose()) / (w2 * w2) - Eigen::MatrixXd::Identity(d, d) / w2;
    return Eigen::MatrixXd(g * h);
  };
  return f;
}

double quadrature_operator_oracle(const LevyMeasureSpec& spec, const TestFunction& f, std::span<const double> x,
                                  const OracleOptions& opt) {
  require_measure(spec);
  const int d = static_cast<int>(x.size());
  spec.require_dim(d);
  const auto& v = spec.variant();
  if (const auto* s = std::get_if<AnisotropicSum>(&v)) {
    double acc = 0.0;
    for (const auto& c : s->components) acc += line_oracle(c.measure, f, x, c.axis, opt.outer_radius);
    return acc;
  }
  if (d == 1) return line_oracle(*as_1d(v), f, x, 0, opt.outer_radius);
  if (d != 2) throw ContractViolation("quadrature_operator_oracle: isotropic measures supported in dimension 1 and 2 only");
  if (const auto* s = std::get_if<IsotropicStable>(&v))
    return polar_oracle(s->sigma, std::numeric_limits<double>::infinity(), f, x, opt);
  const auto& t = std::get<TruncatedStable>(v);
  return polar_oracle(t.sigma, t.cutoff, f, x, opt);
}

// --- inequalities ----------------------------------------------------------------

LpInterpolationReport lp_interpolation_check(const Symbol& sym, const Field& f, double p, double r) {
  require_solver_order(sym.spec);
  require_same_grid(sym.grid, f.grid, "lp_interpolation_check");
  if (!(r > 0.0 && r <= 1.0)) throw ContractViolation("lp_interpolation_check: r must lie in (0, 1]");
  if (!(p >= 1.0)) throw ContractViolation("lp_interpolation_check: p must be >= 1");
  const Grid& g = f.grid;
  const int d = g.dim();
  const double sigma = sym.spec.order();
  const ComplexArray spec = forward_transform(g, f.values);

  LpInterpolationReport rep;
  rep.lhs = lp_norm(g, inverse_transform_real(g, spec * sym.values), p);
  VectorField grad(d);
  std::vector<ComplexArray> dm(d);
  for (int a = 0; a < d; ++a) {
    dm[a] = derivative_multiplier(g, a);
    grad[a] = inverse_transform_real(g, spec * dm[a]);
  }
  RealArray hess2 = RealArray::Zero(g.size());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) hess2 += inverse_transform_real(g, spec * dm[a] * dm[b]).square();
  rep.hessian_norm = lp_norm(g, hess2.sqrt(), p);
  rep.function_norm = lp_norm(g, f.values, p);
  rep.hessian_term = rep.hessian_norm * std::pow(r, 2.0 - sigma);
  rep.gradient_term = lp_norm(g, pointwise_norm(grad), p) * (std::pow(r, 1.0 - sigma) - 1.0);
  rep.tail_term = rep.function_norm * sym.spec.tail_mass(d);
  return rep;
}

ConeReport check_cone_condition(const LevyMeasureSpec& spec, std::span<const double> direction, double eta,
                                std::span<const double> radii, bool directional) {
  require_measure(spec);
  const int d = static_cast<int>(direction.size());
  spec.require_dim(d);
  if (!(eta > 0.0 && eta < 1.0)) throw ContractViolation("check_cone_condition: eta must lie in (0, 1)");
  if (radii.size() < 2) throw ContractViolation("check_cone_condition: need at least two radii");
  const double an = norm_of(direction);
  if (!(an > 0.0)) throw ContractViolation("check_cone_condition: direction must be nonzero");

  // int_0^r z^2 k(side z) dz for one half-line of a 1D measure.
  auto half_line = [](const Levy1D& m, double side, double r) {
    double top = r;
    if (const auto* t = std::get_if<TruncatedStable>(&m)) top = std::min(r, t->cutoff);
    auto g = [&](double z) { return z * z * density1(m, side * z); };
    return dyadic_shells<double>(g, top, 0.0, "cone condition");
  };

  ConeReport rep;
  rep.radii.assign(radii.begin(), radii.end());
  const auto& v = spec.variant();
  for (double r : radii) {
    if (!(r > 0.0)) throw ContractViolation("check_cone_condition: radii must be positive");
    double integral = 0.0;
    if (const auto* s = std::get_if<AnisotropicSum>(&v)) {
      for (const auto& c : s->components) {
        const double proj = direction[c.axis] / an;  // cosine between a and +e_axis
        for (double side : {1.0, -1.0}) {
          const double cosang = side * proj;
          const bool in = directional ? cosang >= 1.0 - eta : std::abs(cosang) >= 1.0 - eta;
          if (in) integral += half_line(c.measure, side, r);
        }
      }
    } else if (spec.one_dimensional() || d == 1) {
      const Levy1D m = *as_1d(v);
      const double side = direction[0] > 0 ? 1.0 : -1.0;
      integral += half_line(m, side, r);
      if (!directional) integral += half_line(m, -side, r);
    } else {
      // Isotropic: solid-angle fraction of the cone times the radial moment.
      double frac = 0.0;
      if (d == 2)
        frac = 2.0 * std::acos(1.0 - eta);
      else if (d == 3)
        frac = 2.0 * M_PI * eta;
      else
        throw ContractViolation("check_cone_condition: isotropic cones supported for d <= 3");
      if (!directional) frac *= 2.0;
      double sigma = 0.0, top = r;
      if (const auto* s = std::get_if<IsotropicStable>(&v)) sigma = s->sigma;
      if (const auto* t = std::get_if<TruncatedStable>(&v)) {
        sigma = t->sigma;
        top = std::min(r, t->cutoff);
      }
      integral = stable_constant(d, sigma) * frac * std::pow(top, 2.0 - sigma) / (2.0 - sigma);
    }
    rep.integrals.push_back(integral);
  }
  rep.satisfied = std::all_of(rep.integrals.begin(), rep.integrals.end(), [](double i) { return i > 0.0; });
  if (rep.satisfied) {
    const LineFit fit = fit_loglog(rep.radii, rep.integrals);
    rep.fitted_beta = 2.0 - fit.slope;
    rep.fitted_constant = std::exp(fit.intercept) / std::pow(eta, 0.5 * (d - 1));
    rep.satisfied = rep.fitted_beta > 0.0 && rep.fitted_beta < 2.0;
  }
  return rep;
}

}  // namespace lmfg
