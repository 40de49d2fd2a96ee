#include "fkr/fields.hpp"

#include "fkr/rng.hpp"
#include "fkr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fkr {

namespace {

constexpr std::int64_t kTagX = 0x58;
constexpr std::int64_t kTagNoise = 0x45;
constexpr std::int64_t kTagAr = 0x41;

double sum_sq_scales(const GeneratorSpec& g, std::size_t J)
{
  double s = 0.0;
  for (std::size_t j = 1; j <= J; ++j)
    s += coefficient_scale(g, j) * coefficient_scale(g, j);
  return s;
}

double max_scale(const GeneratorSpec& g, std::size_t J)
{
  double m = 0.0;
  for (std::size_t j = 1; j <= J; ++j)
    m = std::max(m, coefficient_scale(g, j));
  return m;
}

double innovation(CounterRng& rng, InnovationKind kind, double c)
{
  return kind == InnovationKind::truncated_gaussian ? rng.truncated_normal(c) : rng.normal();
}

void validate(const GeneratorSpec& g)
{
  if (!(g.d0 > 0.0) || !std::isfinite(g.d1) || g.d1 < 0.0)
    throw std::invalid_argument("coefficient decay requires d0 > 0 and d1 >= 0");
  if (g.innovation == InnovationKind::truncated_gaussian && !(g.truncation > 0.0))
    throw std::invalid_argument("truncation level must be positive");
  if (g.kind == GeneratorKind::gauss_exp && (!(g.rho >= 0.0) || !(g.rho < 1.0)))
    throw std::invalid_argument("gauss_exp requires rho in [0, 1)");
  if (g.basis.j_max < 1)
    throw std::invalid_argument("j_max must be >= 1");
}

} // namespace

std::string to_string(GeneratorKind k)
{
  switch (k) {
  case GeneratorKind::functional_ma: return "functional_ma";
  case GeneratorKind::gauss_exp: return "gauss_exp";
  case GeneratorKind::bernoulli_ar1: return "bernoulli_ar1";
  }
  throw std::invalid_argument("unknown generator kind");
}

std::string to_string(InnovationKind k)
{
  return k == InnovationKind::gaussian ? "gaussian" : "truncated_gaussian";
}

GeneratorKind generator_kind_from_string(const std::string& s)
{
  if (s == "functional_ma")
    return GeneratorKind::functional_ma;
  if (s == "gauss_exp")
    return GeneratorKind::gauss_exp;
  if (s == "bernoulli_ar1")
    return GeneratorKind::bernoulli_ar1;
  throw std::invalid_argument("unknown generator kind '" + s + "'");
}

InnovationKind innovation_kind_from_string(const std::string& s)
{
  if (s == "truncated_gaussian")
    return InnovationKind::truncated_gaussian;
  if (s == "gaussian")
    return InnovationKind::gaussian;
  throw std::invalid_argument("unknown innovation kind '" + s + "'");
}

nlohmann::json to_json(const GeneratorSpec& g)
{
  return {{"kind", to_string(g.kind)}, {"q", g.q}, {"rho", g.rho}, {"basis", to_json(g.basis)},
          {"d0", g.d0}, {"d1", g.d1}, {"innovation", to_string(g.innovation)},
          {"truncation", g.truncation}, {"seed", g.seed}};
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j)
{
  GeneratorSpec g;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      g.kind = generator_kind_from_string(value.get<std::string>());
    else if (key == "q")
      g.q = value.get<std::size_t>();
    else if (key == "rho")
      g.rho = value.get<double>();
    else if (key == "basis")
      g.basis = basis_spec_from_json(value);
    else if (key == "d0")
      g.d0 = value.get<double>();
    else if (key == "d1")
      g.d1 = value.get<double>();
    else if (key == "innovation")
      g.innovation = innovation_kind_from_string(value.get<std::string>());
    else if (key == "truncation")
      g.truncation = value.get<double>();
    else if (key == "seed")
      g.seed = value.get<std::uint64_t>();
    else
      throw std::invalid_argument("unknown generator key '" + key + "'");
  }
  return g;
}

double coefficient_scale(const GeneratorSpec& g, std::size_t j_one_based)
{
  return std::sqrt(g.d0) * std::exp(-g.d1 * static_cast<double>(j_one_based) / 2.0);
}

std::vector<double> ma_weights(std::size_t q, std::size_t N)
{
  std::size_t count = 1;
  for (std::size_t k = 0; k < N; ++k)
    count *= q + 1;
  std::vector<double> a(count);
  double norm = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i, linf = 0;
    for (std::size_t k = 0; k < N; ++k) {
      linf = std::max(linf, rest % (q + 1));
      rest /= q + 1;
    }
    a[i] = std::exp(-static_cast<double>(linf));
    norm += a[i] * a[i];
  }
  for (double& v : a)
    v /= std::sqrt(norm);
  return a;
}

std::string to_string(PsiKind k)
{
  switch (k) {
  case PsiKind::zero: return "zero";
  case PsiKind::linear_diag: return "linear_diag";
  case PsiKind::nonlinear_lipschitz: return "nonlinear_lipschitz";
  }
  throw std::invalid_argument("unknown psi kind");
}

PsiKind psi_kind_from_string(const std::string& s)
{
  if (s == "zero")
    return PsiKind::zero;
  if (s == "linear_diag")
    return PsiKind::linear_diag;
  if (s == "nonlinear_lipschitz")
    return PsiKind::nonlinear_lipschitz;
  throw std::invalid_argument("unknown psi kind '" + s + "'");
}

double PsiSpec::holder_const() const
{
  double m = 0.0;
  for (double p : params)
    m = std::max(m, std::abs(p));
  switch (kind) {
  case PsiKind::zero: return 0.0;
  case PsiKind::linear_diag: return m;
  case PsiKind::nonlinear_lipschitz: {
    // t -> sgn(t)|t|^r is r-Hoelder with constant 2^{1-r}; sin is 1-Lipschitz;
    // summing |dx_j|^{2r} over J coordinates costs J^{(1-r)/2}.
    const double J = static_cast<double>(std::max<std::size_t>(params.size(), 1));
    return m * std::pow(2.0, 1.0 - r) * std::pow(J, (1.0 - r) / 2.0);
  }
  }
  return 0.0;
}

void PsiSpec::apply(std::span<const double> x, std::span<double> out) const
{
  std::fill(out.begin(), out.end(), 0.0);
  if (kind == PsiKind::zero)
    return;
  const std::size_t n = std::min(params.size(), x.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (kind == PsiKind::linear_diag) {
      out[j] = params[j] * x[j];
    } else {
      const double s = std::sin(x[j]);
      out[j] = params[j] * std::copysign(std::pow(std::abs(s), r), s);
    }
  }
}

FunctionalElement PsiSpec::apply(const FunctionalElement& x) const
{
  FunctionalElement out(x.size());
  apply(std::span<const double>(x.coeffs), std::span<double>(out.coeffs));
  return out;
}

nlohmann::json to_json(const PsiSpec& p)
{
  return {{"kind", to_string(p.kind)}, {"params", p.params}, {"r", p.r}};
}

PsiSpec psi_spec_from_json(const nlohmann::json& j)
{
  PsiSpec p;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      p.kind = psi_kind_from_string(value.get<std::string>());
    else if (key == "params")
      p.params = value.get<std::vector<double>>();
    else if (key == "r")
      p.r = value.get<double>();
    else
      throw std::invalid_argument("unknown psi key '" + key + "'");
  }
  if (!(p.r > 0.0) || p.r > 1.0)
    throw std::invalid_argument("Hoelder order r must lie in (0, 1]");
  return p;
}

std::string to_string(AlphaStatus s)
{
  switch (s) {
  case AlphaStatus::certified: return "certified";
  case AlphaStatus::not_mixing: return "not_mixing";
  case AlphaStatus::unverified: return "unverified";
  case AlphaStatus::user_supplied: return "user_supplied";
  }
  return "unverified";
}

double DependenceCertificate::alpha_bound(std::size_t k) const
{
  if (alpha_status == AlphaStatus::not_mixing || alpha_status == AlphaStatus::unverified)
    return 0.25;
  if (range && k > *range)
    return 0.0;
  return std::min(0.25, c0 * std::exp(-c1 * static_cast<double>(k)));
}

nlohmann::json to_json(const DependenceCertificate& c)
{
  nlohmann::json j{{"applies_to", c.applies_to},
                   {"alpha_status", to_string(c.alpha_status)},
                   {"c0", c.c0},
                   {"c1", c.c1},
                   {"alpha_note", c.alpha_note},
                   {"phi_certified", c.phi_certified},
                   {"phi_sum_bound", c.phi_sum_bound},
                   {"phi_y_bound", c.phi_y_bound},
                   {"phi_note", c.phi_note},
                   {"tail_certified", c.tail_certified},
                   {"kappa0", c.kappa0},
                   {"kappa1", c.kappa1},
                   {"gamma", c.gamma},
                   {"bound_x", c.bound_x},
                   {"bound_y", c.bound_y},
                   {"tail_note", c.tail_note}};
  j["range"] = c.range ? nlohmann::json(*c.range) : nlohmann::json(nullptr);
  return j;
}

DependenceCertificate certificate_from_json(const nlohmann::json& j)
{
  DependenceCertificate c;
  c.applies_to = j.value("applies_to", "");
  const std::string status = j.value("alpha_status", "unverified");
  if (status == "certified")
    c.alpha_status = AlphaStatus::certified;
  else if (status == "not_mixing")
    c.alpha_status = AlphaStatus::not_mixing;
  else if (status == "user_supplied")
    c.alpha_status = AlphaStatus::user_supplied;
  else
    c.alpha_status = AlphaStatus::unverified;
  c.c0 = j.value("c0", 0.0);
  c.c1 = j.value("c1", 0.0);
  if (j.contains("range") && !j["range"].is_null())
    c.range = j["range"].get<std::size_t>();
  c.alpha_note = j.value("alpha_note", "");
  c.phi_certified = j.value("phi_certified", false);
  c.phi_sum_bound = j.value("phi_sum_bound", 0.0);
  c.phi_y_bound = j.value("phi_y_bound", 0.0);
  c.phi_note = j.value("phi_note", "");
  c.tail_certified = j.value("tail_certified", false);
  c.kappa0 = j.value("kappa0", 0.0);
  c.kappa1 = j.value("kappa1", 0.0);
  c.gamma = j.value("gamma", 0.0);
  c.bound_x = j.value("bound_x", 0.0);
  c.bound_y = j.value("bound_y", 0.0);
  c.tail_note = j.value("tail_note", "");
  return c;
}

DependenceCertificate certificate(const GeneratorSpec& spec, std::size_t N, const PsiSpec& psi,
                                  double noise_scale)
{
  validate(spec);
  DependenceCertificate c;
  c.applies_to = to_string(spec.kind);
  const std::size_t J = spec.basis.j_max;
  const double root_scales = std::sqrt(sum_sq_scales(spec, J));
  bool x_bounded = false;

  switch (spec.kind) {
  case GeneratorKind::functional_ma: {
    // q-dependent: alpha(k) = 0 beyond q and alpha <= 1/4 always, so c1 = 1
    // needs c0 e^{-k} >= 1/4 for k <= q.
    c.alpha_status = AlphaStatus::certified;
    c.range = spec.q;
    c.c1 = 1.0;
    c.c0 = std::max(1.0, std::exp(static_cast<double>(spec.q)) / 4.0);
    c.alpha_note = "finite dependence range q";
    if (spec.innovation == InnovationKind::truncated_gaussian) {
      double abs_sum = 0.0;
      for (double a : ma_weights(spec.q, N))
        abs_sum += std::abs(a);
      c.bound_x = abs_sum * spec.truncation * root_scales;
      x_bounded = true;
      c.phi_certified = true;
      c.phi_sum_bound = 2.0 * static_cast<double>(spec.q) * c.bound_x;
      c.phi_y_bound = static_cast<double>(spec.q) * (2.0 * c.bound_x + 2.0);
      c.phi_note = "phi(i) = 0 for i > q; each remaining term is bounded by twice the "
                   "oscillation of a unit-Lipschitz test function over the support of X";
    } else if (spec.q == 0) {
      c.phi_certified = true;
      c.phi_note = "independent field";
    } else {
      c.phi_note = "unbounded innovations: no phi bound recorded";
    }
    break;
  }
  case GeneratorKind::gauss_exp:
    if (spec.rho == 0.0) {
      c.alpha_status = AlphaStatus::certified;
      c.range = 0;
      c.c0 = 1.0;
      c.c1 = 1.0;
      c.phi_certified = true;
      c.alpha_note = "independent field";
      c.phi_note = "independent field";
    } else if (N == 1) {
      // Gaussian sequences: alpha(k) <= maximal correlation = rho^k
      c.alpha_status = AlphaStatus::certified;
      c.c0 = 1.0;
      c.c1 = -std::log(spec.rho);
      c.alpha_note = "Gaussian AR(1): alpha(k) <= rho^k";
      c.phi_note = "unbounded field: no phi bound recorded";
    } else {
      c.alpha_status = AlphaStatus::unverified;
      c.alpha_note = "separable exponential covariance on N >= 2: no analytic mixing rate recorded";
      c.phi_note = "unbounded field: no phi bound recorded";
    }
    break;
  case GeneratorKind::bernoulli_ar1:
    c.alpha_status = AlphaStatus::not_mixing;
    c.alpha_note = "Bernoulli AR(1) is not strongly mixing";
    c.phi_note = "not covered";
    c.bound_x = 1.0;
    x_bounded = true;
    break;
  }

  const double noise_bound = noise_scale * spec.truncation * root_scales;
  double psi_bound = -1.0; // < 0: not bounded independently of X
  if (psi.kind == PsiKind::zero) {
    psi_bound = 0.0;
  } else if (psi.kind == PsiKind::nonlinear_lipschitz) {
    double s = 0.0;
    for (double a : psi.params)
      s += a * a;
    psi_bound = std::sqrt(s);
  } else if (x_bounded) {
    psi_bound = psi.holder_const() * c.bound_x;
  }

  if (psi_bound >= 0.0) {
    c.bound_y = psi_bound + noise_bound;
    c.tail_certified = true;
    c.gamma = 1.0;
    c.kappa1 = 1.0;
    c.kappa0 = std::exp(c.bound_y);
    c.tail_note = "bounded response";
  } else {
    // Linear Psi of a Gaussian field: ||Psi(X)|| is Lipschitz in the
    // underlying standard normals with constant L = L_Psi max_j scale_j.
    const double L = psi.holder_const() * max_scale(spec, J);
    const double a = psi.holder_const() * root_scales + noise_bound;
    if (L > 0.0) {
      c.tail_certified = true;
      c.gamma = 2.0;
      c.kappa0 = std::exp(a * a / (2.0 * L * L));
      c.kappa1 = 1.0 / (4.0 * L * L);
      c.tail_note = "Gaussian concentration";
    } else {
      c.tail_certified = true;
      c.bound_y = noise_bound;
      c.gamma = 1.0;
      c.kappa1 = 1.0;
      c.kappa0 = std::exp(c.bound_y);
      c.tail_note = "bounded response";
    }
  }
  return c;
}

FunctionalElement FieldSample::x_element(std::size_t i) const
{
  auto s = x(i);
  return FunctionalElement(std::vector<double>(s.begin(), s.end()));
}

FunctionalElement FieldSample::y_element(std::size_t i) const
{
  auto s = y(i);
  return FunctionalElement(std::vector<double>(s.begin(), s.end()));
}

FieldSample generate(const GeneratorSpec& spec, const PsiSpec& psi, const LatticeCube& cube,
                     double noise_scale, const GenerateOptions& opts)
{
  validate(spec);
  if (noise_scale < 0.0)
    throw std::invalid_argument("noise_scale must be non-negative");
  const std::size_t J = spec.basis.j_max;
  const std::size_t N = cube.dim();
  if (cube.size() > opts.max_values / J)
    throw std::length_error("field size |I_n| * j_max exceeds the configured cap of " +
                            std::to_string(opts.max_values));

  FieldSample out;
  out.cube = cube;
  out.J = J;
  out.spec = spec;
  out.psi = psi;
  out.noise_scale = noise_scale;
  out.replicate = opts.replicate;
  out.cert = certificate(spec, N, psi, noise_scale);
  out.X.assign(cube.size() * J, 0.0);

  const auto rep = static_cast<std::int64_t>(opts.replicate);
  std::vector<double> scales(J);
  for (std::size_t j = 0; j < J; ++j)
    scales[j] = coefficient_scale(spec, j + 1);

  switch (spec.kind) {
  case GeneratorKind::functional_ma: {
    std::vector<std::int64_t> ext_edges(N);
    for (std::size_t k = 0; k < N; ++k)
      ext_edges[k] = cube.edges()[k] + static_cast<std::int64_t>(spec.q);
    const LatticeCube ext(ext_edges);
    const std::uint64_t base = derive_key(spec.seed, {rep, kTagX});
    std::vector<double> eta(ext.size() * J);
    Site u(N, 1);
    for (std::size_t i = 0; i < ext.size(); ++i) {
      CounterRng rng(derive_key(base, u, kTagX));
      for (std::size_t j = 0; j < J; ++j)
        eta[i * J + j] = scales[j] * innovation(rng, spec.innovation, spec.truncation);
      for (std::size_t k = N; k-- > 0;) {
        if (++u[k] <= ext_edges[k])
          break;
        u[k] = 1;
      }
    }
    const std::vector<double> a = ma_weights(spec.q, N);
    // offsets of each t in the extended cube's linear index
    std::vector<std::size_t> offset(a.size(), 0);
    for (std::size_t t = 0; t < a.size(); ++t) {
      std::size_t rest = t, off = 0, stride = 1;
      std::vector<std::size_t> tk(N);
      for (std::size_t k = N; k-- > 0;) {
        tk[k] = rest % (spec.q + 1);
        rest /= spec.q + 1;
      }
      for (std::size_t k = N; k-- > 0;) {
        off += tk[k] * stride;
        stride *= static_cast<std::size_t>(ext_edges[k]);
      }
      offset[t] = off;
    }
    Site s(N, 1);
    for (std::size_t i = 0; i < cube.size(); ++i) {
      const std::size_t base_idx = ext.index_of(s);
      double* xs = out.X.data() + i * J;
      for (std::size_t t = 0; t < a.size(); ++t) {
        const double* e = eta.data() + (base_idx + offset[t]) * J;
        for (std::size_t j = 0; j < J; ++j)
          xs[j] += a[t] * e[j];
      }
      for (std::size_t k = N; k-- > 0;) {
        if (++s[k] <= cube.edges()[k])
          break;
        s[k] = 1;
      }
    }
    break;
  }
  case GeneratorKind::gauss_exp: {
    const std::uint64_t base = derive_key(spec.seed, {rep, kTagX});
    Site s(N, 1);
    for (std::size_t i = 0; i < cube.size(); ++i) {
      CounterRng rng(derive_key(base, s, kTagX));
      for (std::size_t j = 0; j < J; ++j)
        out.X[i * J + j] = rng.normal();
      for (std::size_t k = N; k-- > 0;) {
        if (++s[k] <= cube.edges()[k])
          break;
        s[k] = 1;
      }
    }
    // AR(1) recursion along each axis in turn; the first site of every line
    // keeps its unit-variance input, so each pass preserves stationarity.
    const double innov = std::sqrt(1.0 - spec.rho * spec.rho);
    std::vector<std::size_t> stride(N, 1);
    for (std::size_t k = N - 1; k-- > 0;)
      stride[k] = stride[k + 1] * static_cast<std::size_t>(cube.edges()[k + 1]);
    for (std::size_t k = 0; k < N; ++k) {
      const auto len = static_cast<std::size_t>(cube.edges()[k]);
      for (std::size_t i = 0; i < cube.size(); ++i) {
        if ((i / stride[k]) % len == 0)
          continue;
        const std::size_t prev = i - stride[k];
        for (std::size_t j = 0; j < J; ++j)
          out.X[i * J + j] = spec.rho * out.X[prev * J + j] + innov * out.X[i * J + j];
      }
    }
    for (std::size_t i = 0; i < cube.size(); ++i)
      for (std::size_t j = 0; j < J; ++j)
        out.X[i * J + j] *= scales[j];
    break;
  }
  case GeneratorKind::bernoulli_ar1: {
    if (N != 1)
      throw std::invalid_argument("bernoulli_ar1 is defined on one-dimensional lattices only");
    const auto path = generate_bernoulli_ar1(derive_key(spec.seed, {rep, kTagAr}), cube.size());
    for (std::size_t i = 0; i < cube.size(); ++i)
      out.X[i * J] = path[i];
    break;
  }
  }

  out.Y.assign(cube.size() * J, 0.0);
  if (opts.with_response) {
    const std::uint64_t base = derive_key(spec.seed, {rep, kTagNoise});
    Site s(N, 1);
    for (std::size_t i = 0; i < cube.size(); ++i) {
      std::span<double> yi(out.Y.data() + i * J, J);
      psi.apply(out.x(i), yi);
      if (noise_scale > 0.0) {
        CounterRng rng(derive_key(base, s, kTagNoise));
        for (std::size_t j = 0; j < J; ++j)
          yi[j] += noise_scale * scales[j] * rng.truncated_normal(spec.truncation);
      }
      for (std::size_t k = N; k-- > 0;) {
        if (++s[k] <= cube.edges()[k])
          break;
        s[k] = 1;
      }
    }
  }
  return out;
}

std::vector<double> generate_bernoulli_ar1(double x0, std::span<const int> innovations)
{
  std::vector<double> out;
  out.reserve(innovations.size() + 1);
  out.push_back(x0);
  for (int e : innovations)
    out.push_back(0.5 * (out.back() + static_cast<double>(e)));
  return out;
}

std::vector<double> generate_bernoulli_ar1(std::uint64_t seed, std::size_t length)
{
  if (length < 1)
    throw std::invalid_argument("length must be >= 1");
  CounterRng rng(seed);
  // 53 fair binary digits: X_0 = sum_i b_i 2^{-i} is Uniform[0,1] to double precision
  const double x0 = static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53;
  std::vector<int> innov(length - 1);
  for (int& e : innov)
    e = static_cast<int>(rng.next_u64() >> 63);
  return generate_bernoulli_ar1(x0, innov);
}

AssumptionAudit audit_assumptions(const FieldSample& sample, std::size_t holder_pairs)
{
  return audit_assumptions(std::span<const FieldSample>(&sample, 1), holder_pairs);
}

AssumptionAudit audit_assumptions(std::span<const FieldSample> samples, std::size_t holder_pairs)
{
  AssumptionAudit a;
  if (samples.empty())
    return a;
  const FieldSample& first = samples.front();
  const std::size_t J = first.J;

  std::vector<double> sums(J, 0.0);
  std::size_t count = 0;
  std::vector<double> ynorms;
  for (const FieldSample& s : samples) {
    for (std::size_t i = 0; i < s.sites(); ++i) {
      auto x = s.x(i);
      for (std::size_t j = 0; j < J; ++j)
        sums[j] += x[j] * x[j];
      double yn = 0.0;
      for (double v : s.y(i))
        yn += v * v;
      ynorms.push_back(std::sqrt(yn));
    }
    count += s.sites();
  }
  a.second_moments.resize(J);
  for (std::size_t j = 0; j < J; ++j)
    a.second_moments[j] = sums[j] / static_cast<double>(count);

  if (J >= 2 && std::all_of(a.second_moments.begin(), a.second_moments.end(), [](double m) { return m > 0.0; })) {
    std::vector<double> jj(J), lm(J);
    for (std::size_t j = 0; j < J; ++j) {
      jj[j] = static_cast<double>(j + 1);
      lm[j] = std::log(a.second_moments[j]);
    }
    a.decay_slope = fit_line(jj, lm).slope;
    a.decay_ok = a.decay_slope <= -first.spec.d1 + 0.1;
  }

  const double ymax = *std::max_element(ynorms.begin(), ynorms.end());
  const DependenceCertificate& cert = first.cert;
  const double zmax = std::max({ymax * 1.25, cert.bound_y * 1.25, 1e-9});
  const std::size_t grid = 20;
  for (std::size_t g = 0; g <= grid; ++g) {
    const double z = zmax * static_cast<double>(g) / static_cast<double>(grid);
    const auto hits = static_cast<std::size_t>(std::count_if(ynorms.begin(), ynorms.end(), [&](double v) { return v >= z; }));
    a.z_grid.push_back(z);
    a.tail_frequency.push_back(static_cast<double>(hits) / static_cast<double>(ynorms.size()));
    if (cert.tail_certified) {
      const double bound = cert.kappa0 * std::exp(-cert.kappa1 * std::pow(z, cert.gamma));
      a.tail_bound.push_back(bound);
      if (wilson_interval(hits, ynorms.size()).lo > bound)
        a.tail_ok = false;
    } else {
      a.tail_bound.push_back(std::nan(""));
    }
  }

  // Hoelder audit: random site pairs plus single-coordinate perturbations.
  const PsiSpec& psi = first.psi;
  a.holder_const = psi.holder_const();
  const double r = psi.order();
  CounterRng rng(derive_key(first.spec.seed, {0x686f6c646572}));
  std::vector<double> px(J), py(J), dx(J);
  auto ratio = [&](std::span<const double> x, std::span<const double> y) {
    psi.apply(x, px);
    psi.apply(y, py);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      num += (px[j] - py[j]) * (px[j] - py[j]);
      den += (x[j] - y[j]) * (x[j] - y[j]);
    }
    if (den == 0.0)
      return;
    a.holder_ratio_max = std::max(a.holder_ratio_max, std::sqrt(num) / std::pow(std::sqrt(den), r));
    ++a.holder_pairs;
  };
  for (std::size_t p = 0; p < holder_pairs; ++p) {
    const FieldSample& s1 = samples[rng.below(samples.size())];
    const FieldSample& s2 = samples[rng.below(samples.size())];
    ratio(s1.x(rng.below(s1.sites())), s2.x(rng.below(s2.sites())));
  }
  for (std::size_t j = 0; j < J; ++j) {
    const FieldSample& s = samples[rng.below(samples.size())];
    auto x = s.x(rng.below(s.sites()));
    std::copy(x.begin(), x.end(), dx.begin());
    dx[j] += rng.uniform(0.01, 0.5);
    ratio(x, dx);
  }
  a.holder_ok = a.holder_ratio_max <= a.holder_const * (1.0 + 1e-9) + 1e-12;
  return a;
}

} // namespace fkr
