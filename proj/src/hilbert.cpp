#include "fkr/hilbert.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fkr {

namespace {

using Gauss20 = boost::math::quadrature::gauss<double, 20>;

std::vector<std::vector<std::size_t>> tensor_indices(std::size_t d, std::size_t count)
{
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t total = 0; out.size() < count; ++total) {
    // all multi-indices with the given total degree, lexicographic
    std::vector<std::size_t> m(d, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t axis, std::size_t left) {
      if (out.size() >= count)
        return;
      if (axis + 1 == d) {
        m[axis] = left;
        out.push_back(m);
        return;
      }
      for (std::size_t v = 0; v <= left; ++v) {
        m[axis] = v;
        rec(axis + 1, left - v);
      }
    };
    rec(0, total);
  }
  return out;
}

// phi values for all orders 0..max_order along one axis.
void univariate_all(BasisFamily family, double lo, double hi, std::size_t max_order, double t,
                    std::span<double> out)
{
  const double L = hi - lo;
  const double s = (t - lo) / L;
  if (family == BasisFamily::legendre) {
    const double x = 2.0 * s - 1.0;
    double p_prev = 1.0, p = x;
    for (std::size_t m = 0; m <= max_order; ++m) {
      double pm;
      if (m == 0)
        pm = 1.0;
      else if (m == 1)
        pm = x;
      else {
        // Bonnet recursion
        const double next = ((2.0 * m - 1.0) * x * p - (m - 1.0) * p_prev) / static_cast<double>(m);
        p_prev = p;
        p = next;
        pm = next;
      }
      out[m] = std::sqrt((2.0 * m + 1.0) / L) * pm;
    }
    return;
  }
  const double c0 = 1.0 / std::sqrt(L);
  const double c1 = std::sqrt(2.0 / L);
  out[0] = c0;
  for (std::size_t m = 1; m <= max_order; ++m) {
    const double freq = 2.0 * std::numbers::pi * static_cast<double>((m + 1) / 2);
    out[m] = (m % 2 == 1) ? c1 * std::cos(freq * s) : c1 * std::sin(freq * s);
  }
}

} // namespace

std::string to_string(BasisFamily f) { return f == BasisFamily::fourier ? "fourier" : "legendre"; }
std::string to_string(MeasureKind m) { return m == MeasureKind::lebesgue ? "lebesgue" : "probability"; }

BasisFamily basis_family_from_string(const std::string& s)
{
  if (s == "fourier")
    return BasisFamily::fourier;
  if (s == "legendre")
    return BasisFamily::legendre;
  throw std::invalid_argument("unknown basis family '" + s + "'");
}

MeasureKind measure_from_string(const std::string& s)
{
  if (s == "lebesgue")
    return MeasureKind::lebesgue;
  if (s == "probability")
    return MeasureKind::probability;
  throw std::invalid_argument("unknown measure '" + s + "'");
}

nlohmann::json to_json(const BasisSpec& b)
{
  return {{"lo", b.lo}, {"hi", b.hi}, {"measure", to_string(b.measure)},
          {"family", to_string(b.family)}, {"j_max", b.j_max}};
}

BasisSpec basis_spec_from_json(const nlohmann::json& j)
{
  BasisSpec b;
  for (const auto& [key, value] : j.items()) {
    if (key == "lo")
      b.lo = value.get<std::vector<double>>();
    else if (key == "hi")
      b.hi = value.get<std::vector<double>>();
    else if (key == "measure")
      b.measure = measure_from_string(value.get<std::string>());
    else if (key == "family")
      b.family = basis_family_from_string(value.get<std::string>());
    else if (key == "j_max")
      b.j_max = value.get<std::size_t>();
    else
      throw std::invalid_argument("unknown basis key '" + key + "'");
  }
  return b;
}

Basis::Basis(BasisSpec spec) : spec_(std::move(spec))
{
  const std::size_t d = spec_.dim();
  if (d == 0 || spec_.hi.size() != d)
    throw std::invalid_argument("basis domain bounds malformed");
  if (spec_.j_max < 1)
    throw std::invalid_argument("j_max must be >= 1");
  for (std::size_t k = 0; k < d; ++k) {
    if (!(spec_.hi[k] > spec_.lo[k]))
      throw std::invalid_argument("basis domain must have positive extent on every axis");
    volume_ *= spec_.hi[k] - spec_.lo[k];
  }
  if (spec_.measure == MeasureKind::lebesgue) {
    nu_total_ = volume_;
    density_ = 1.0;
    scale_ = 1.0;
  } else {
    nu_total_ = 1.0;
    density_ = 1.0 / volume_;
    scale_ = std::sqrt(volume_);
  }
  index_ = tensor_indices(d, spec_.j_max);
  max_order_.assign(d, 0);
  for (const auto& m : index_)
    for (std::size_t k = 0; k < d; ++k)
      max_order_[k] = std::max(max_order_[k], m[k]);

  // Gram matrix factorises across axes; each factor is a 1-D quadrature.
  std::vector<std::vector<double>> gram1(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = max_order_[k] + 1;
    const std::size_t panels = std::max<std::size_t>(8, n);
    gram1[k].assign(n * n, 0.0);
    const double a = spec_.lo[k], b = spec_.hi[k];
    for (std::size_t p = 0; p < panels; ++p) {
      const double pa = a + (b - a) * static_cast<double>(p) / static_cast<double>(panels);
      const double pb = a + (b - a) * static_cast<double>(p + 1) / static_cast<double>(panels);
      for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = m1; m2 < n; ++m2)
          gram1[k][m1 * n + m2] += Gauss20::integrate(
              [&](double t) { return univariate(k, m1, t) * univariate(k, m2, t); }, pa, pb);
    }
    for (std::size_t m1 = 0; m1 < n; ++m1)
      for (std::size_t m2 = 0; m2 < m1; ++m2)
        gram1[k][m1 * n + m2] = gram1[k][m2 * n + m1];
  }
  for (std::size_t i = 0; i < index_.size(); ++i)
    for (std::size_t j = 0; j < index_.size(); ++j) {
      double g = density_ * scale_ * scale_;
      for (std::size_t k = 0; k < d; ++k)
        g *= gram1[k][index_[i][k] * (max_order_[k] + 1) + index_[j][k]];
      gram_error_ = std::max(gram_error_, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  if (gram_error_ > 1e-10)
    throw std::runtime_error("basis failed orthonormality check (max Gram error " +
                             std::to_string(gram_error_) + ")");
}

double Basis::univariate(std::size_t axis, std::size_t m, double t) const
{
  std::vector<double> buf(m + 1);
  univariate_all(spec_.family, spec_.lo[axis], spec_.hi[axis], m, t, buf);
  return buf[m];
}

double Basis::eval(std::size_t j, std::span<const double> u) const
{
  double v = scale_;
  for (std::size_t k = 0; k < dim(); ++k)
    v *= univariate(k, index_[j][k], u[k]);
  return v;
}

double Basis::eval(const FunctionalElement& x, std::span<const double> u) const
{
  if (x.size() != size())
    throw std::invalid_argument("element does not match basis size");
  const std::size_t d = dim();
  std::vector<std::vector<double>> phi(d);
  for (std::size_t k = 0; k < d; ++k) {
    phi[k].resize(max_order_[k] + 1);
    univariate_all(spec_.family, spec_.lo[k], spec_.hi[k], max_order_[k], u[k], phi[k]);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    double v = x.coeffs[j];
    for (std::size_t k = 0; k < d; ++k)
      v *= phi[k][index_[j][k]];
    s += v;
  }
  return scale_ * s;
}

FunctionalElement Basis::project(const std::function<double(std::span<const double>)>& f,
                                 std::size_t panels) const
{
  using Gauss10 = boost::math::quadrature::gauss<double, 10>;
  const auto& abscissa = Gauss10::abscissa();
  const auto& weights = Gauss10::weights();
  const std::size_t d = dim();
  // symmetric Gauss rule stored as non-negative half; expand to full node list
  std::vector<double> ref_x, ref_w;
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    if (abscissa[i] == 0.0) {
      ref_x.push_back(0.0);
      ref_w.push_back(weights[i]);
    } else {
      ref_x.push_back(-abscissa[i]);
      ref_w.push_back(weights[i]);
      ref_x.push_back(abscissa[i]);
      ref_w.push_back(weights[i]);
    }
  }
  std::vector<std::vector<double>> nodes(d), wts(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double a = spec_.lo[k], b = spec_.hi[k];
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * h;
      for (std::size_t i = 0; i < ref_x.size(); ++i) {
        nodes[k].push_back(mid + 0.5 * h * ref_x[i]);
        wts[k].push_back(0.5 * h * ref_w[i]);
      }
    }
  }
  FunctionalElement out(size());
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> u(d);
  for (;;) {
    double w = density_;
    for (std::size_t k = 0; k < d; ++k) {
      u[k] = nodes[k][idx[k]];
      w *= wts[k][idx[k]];
    }
    const double fv = f(u) * w;
    for (std::size_t j = 0; j < size(); ++j)
      out.coeffs[j] += fv * eval(j, u);
    std::size_t k = d;
    while (k-- > 0) {
      if (++idx[k] < nodes[k].size())
        break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1))
      break;
  }
  return out;
}

std::vector<double> Basis::hat_integrals(std::size_t axis, std::size_t nodes) const
{
  if (nodes < 2)
    throw std::invalid_argument("grid needs at least two nodes per axis");
  const std::size_t n_m = max_order_[axis] + 1;
  const double a = spec_.lo[axis], b = spec_.hi[axis];
  const double h = (b - a) / static_cast<double>(nodes - 1);
  const std::size_t cells = nodes - 1;
  const std::size_t sub = 1 + (2 * n_m) / cells;
  std::vector<double> out(nodes * n_m, 0.0);
  std::vector<double> phi(n_m);
  for (std::size_t c = 0; c < cells; ++c) {
    const double ca = a + static_cast<double>(c) * h;
    for (std::size_t s = 0; s < sub; ++s) {
      const double sa = ca + h * static_cast<double>(s) / static_cast<double>(sub);
      const double sb = ca + h * static_cast<double>(s + 1) / static_cast<double>(sub);
      for (std::size_t m = 0; m < n_m; ++m) {
        // left node of the cell: hat decreasing; right node: increasing
        out[c * n_m + m] += Gauss20::integrate(
            [&](double t) { return (1.0 - (t - ca) / h) * univariate(axis, m, t); }, sa, sb);
        out[(c + 1) * n_m + m] += Gauss20::integrate(
            [&](double t) { return ((t - ca) / h) * univariate(axis, m, t); }, sa, sb);
      }
    }
  }
  return out;
}

FunctionalElement Basis::project_grid_function(const std::vector<std::size_t>& nodes_per_axis,
                                               std::span<const double> values) const
{
  const std::size_t d = dim();
  if (nodes_per_axis.size() != d)
    throw std::invalid_argument("grid dimension does not match basis");
  std::size_t total = 1;
  for (auto n : nodes_per_axis)
    total *= n;
  if (values.size() != total)
    throw std::invalid_argument("grid value count mismatch");
  std::vector<std::vector<double>> A(d);
  for (std::size_t k = 0; k < d; ++k)
    A[k] = hat_integrals(k, nodes_per_axis[k]);
  FunctionalElement out(size());
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      double w = values[i];
      for (std::size_t k = 0; k < d; ++k)
        w *= A[k][idx[k] * (max_order_[k] + 1) + index_[j][k]];
      out.coeffs[j] += w;
    }
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < nodes_per_axis[k])
        break;
      idx[k] = 0;
    }
  }
  for (double& c : out.coeffs)
    c *= density_ * scale_;
  return out;
}

void check_same_basis(const FunctionalElement& x, const FunctionalElement& y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("basis mismatch: elements have " + std::to_string(x.size()) +
                                " and " + std::to_string(y.size()) + " coefficients");
}

double inner(const FunctionalElement& x, const FunctionalElement& y)
{
  check_same_basis(x, y);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += x.coeffs[j] * y.coeffs[j];
  return s;
}

double h_norm(const FunctionalElement& x)
{
  double s = 0.0;
  for (double c : x.coeffs)
    s += c * c;
  return std::sqrt(s);
}

FunctionalElement operator+(const FunctionalElement& x, const FunctionalElement& y)
{
  check_same_basis(x, y);
  FunctionalElement out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out.coeffs[j] = x.coeffs[j] + y.coeffs[j];
  return out;
}

FunctionalElement operator-(const FunctionalElement& x, const FunctionalElement& y)
{
  check_same_basis(x, y);
  FunctionalElement out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out.coeffs[j] = x.coeffs[j] - y.coeffs[j];
  return out;
}

FunctionalElement operator*(double a, const FunctionalElement& x)
{
  FunctionalElement out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out.coeffs[j] = a * x.coeffs[j];
  return out;
}

C0NormResult one_norm_c0(const Basis& basis, const FunctionalElement& x, std::size_t resolution)
{
  if (resolution < 2)
    throw std::invalid_argument("grid resolution must be >= 2 per axis");
  const std::size_t d = basis.dim();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k)
    total *= resolution;
  if (total > 16384)
    throw std::invalid_argument("grid too large for the all-pairs Lipschitz scan");
  const auto& spec = basis.spec();
  std::vector<double> points(total * d), values(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < d; ++k)
      points[i * d + k] = spec.lo[k] + (spec.hi[k] - spec.lo[k]) * static_cast<double>(idx[k]) /
                                           static_cast<double>(resolution - 1);
    values[i] = basis.eval(x, std::span<const double>(points.data() + i * d, d));
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < resolution)
        break;
      idx[k] = 0;
    }
  }
  C0NormResult r;
  r.resolution = resolution;
  for (double v : values)
    r.sup = std::max(r.sup, std::abs(v));
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i + 1; j < total; ++j) {
      double dist2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = points[i * d + k] - points[j * d + k];
        dist2 += diff * diff;
      }
      r.lipschitz = std::max(r.lipschitz, std::abs(values[i] - values[j]) / std::sqrt(dist2));
    }
  r.value = r.sup + r.lipschitz;
  return r;
}

nlohmann::json to_json(const PseudoMetricSpec& m)
{
  if (m.kind == PseudoMetricSpec::Kind::full)
    return {{"kind", "full"}};
  return {{"kind", "projection"}, {"J", m.J}};
}

PseudoMetricSpec pseudo_metric_from_json(const nlohmann::json& j)
{
  PseudoMetricSpec m;
  std::string kind = "full";
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      kind = value.get<std::string>();
    else if (key == "J")
      m.J = value.get<std::size_t>();
    else
      throw std::invalid_argument("unknown metric key '" + key + "'");
  }
  if (kind == "full")
    m.kind = PseudoMetricSpec::Kind::full;
  else if (kind == "projection")
    m.kind = PseudoMetricSpec::Kind::projection;
  else
    throw std::invalid_argument("unknown metric kind '" + kind + "'");
  return m;
}

double pseudo_dist(const PseudoMetricSpec& spec, std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("basis mismatch in pseudo_dist");
  std::size_t J = x.size();
  if (spec.kind == PseudoMetricSpec::Kind::projection) {
    if (spec.J > x.size())
      throw std::invalid_argument("projection order J exceeds j_max");
    J = spec.J;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double diff = x[j] - y[j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

double pseudo_dist(const PseudoMetricSpec& spec, const FunctionalElement& x, const FunctionalElement& y)
{
  return pseudo_dist(spec, std::span<const double>(x.coeffs), std::span<const double>(y.coeffs));
}

} // namespace fkr
