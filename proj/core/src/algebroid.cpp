#include "alcontrol/algebroid.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace alc {

StructureTensor::StructureTensor(std::size_t m, std::vector<double> row_major) : m_{m}, data_{std::move(row_major)}
{
  if (data_.size() != m * m * m) {
    throw std::invalid_argument("StructureTensor: expected " + std::to_string(m * m * m) + " entries, got "
                                + std::to_string(data_.size()));
  }
}

Vec StructureTensor::bracket(const Vec & u, const Vec & v) const
{
  Vec out = Vec::Zero(static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
      if (u[j] == 0.0) { continue; }
      for (std::size_t k = 0; k < m_; ++k) { acc += (*this)(i, j, k) * u[j] * v[k]; }
    }
    out[i] = acc;
  }
  return out;
}

Mat StructureTensor::left_action(const Vec & u) const
{
  Mat out = Mat::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t k = 0; k < m_; ++k) { out(i, k) += (*this)(i, j, k) * u[j]; }
    }
  }
  return out;
}

Vec StructureTensor::dual_action(const Vec & u, const Vec & xi) const
{
  Vec out = Vec::Zero(static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) {
    if (xi[i] == 0.0) { continue; }
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t k = 0; k < m_; ++k) { out[k] += (*this)(i, j, k) * u[j] * xi[i]; }
    }
  }
  return out;
}

double StructureTensor::max_abs() const
{
  double m = 0.0;
  for (double v : data_) { m = std::max(m, std::abs(v)); }
  return m;
}

double StructureTensor::frobenius_norm() const
{
  double s = 0.0;
  for (double v : data_) { s += v * v; }
  return std::sqrt(s);
}

StructureTensor levi_civita()
{
  StructureTensor c(3);
  c(0, 1, 2) = 1.0;
  c(1, 2, 0) = 1.0;
  c(2, 0, 1) = 1.0;
  c(0, 2, 1) = -1.0;
  c(1, 0, 2) = -1.0;
  c(2, 1, 0) = -1.0;
  return c;
}

ChartAlgebroid::ChartAlgebroid(std::size_t base_dim,
                               std::size_t fiber_dim,
                               AnchorField anchor,
                               StructureField structure,
                               std::string name,
                               std::optional<AnchorDerivative> anchor_derivative)
    : n_{base_dim},
      m_{fiber_dim},
      anchor_{std::move(anchor)},
      structure_{std::move(structure)},
      name_{std::move(name)},
      anchor_derivative_{std::move(anchor_derivative)}
{
  if (m_ == 0) { throw std::invalid_argument("ChartAlgebroid: fiber dimension must be positive"); }
  if (!anchor_ || !structure_) { throw std::invalid_argument("ChartAlgebroid: anchor and structure are required"); }
}

Mat ChartAlgebroid::anchor(const Vec & x) const
{
  if (static_cast<std::size_t>(x.size()) != n_) {
    throw std::invalid_argument("ChartAlgebroid::anchor: base point has dimension " + std::to_string(x.size())
                                + ", expected " + std::to_string(n_));
  }
  Mat r = anchor_(x);
  if (static_cast<std::size_t>(r.rows()) != n_ || static_cast<std::size_t>(r.cols()) != m_) {
    throw std::logic_error("ChartAlgebroid::anchor: field returned wrong shape");
  }
  return r;
}

StructureTensor ChartAlgebroid::structure(const Vec & x) const
{
  if (static_cast<std::size_t>(x.size()) != n_) {
    throw std::invalid_argument("ChartAlgebroid::structure: base point has wrong dimension");
  }
  StructureTensor c = structure_(x);
  if (c.dim() != m_) { throw std::logic_error("ChartAlgebroid::structure: field returned wrong dimension"); }
  return c;
}

std::vector<Mat> ChartAlgebroid::anchor_derivative(const Vec & x, double fd_step) const
{
  if (anchor_derivative_) { return (*anchor_derivative_)(x); }
  std::vector<Mat> d(n_);
  Vec probe = x;
  for (std::size_t b = 0; b < n_; ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    probe[bi] = x[bi] + fd_step;
    const Mat plus = anchor_(probe);
    probe[bi] = x[bi] - fd_step;
    const Mat minus = anchor_(probe);
    probe[bi] = x[bi];
    d[b] = (plus - minus) / (2.0 * fd_step);
  }
  return d;
}

namespace {

AnchorDerivative zero_anchor_derivative(std::size_t n, std::size_t m)
{
  return [n, m](const Vec &) {
    return std::vector<Mat>(n, Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)));
  };
}

}  // namespace

ChartAlgebroid ChartAlgebroid::tangent_bundle(std::size_t n)
{
  const auto ni = static_cast<Eigen::Index>(n);
  return ChartAlgebroid(
    n,
    n,
    [ni](const Vec &) { return Mat::Identity(ni, ni); },
    [n](const Vec &) { return StructureTensor(n); },
    "tangent-bundle-" + std::to_string(n),
    zero_anchor_derivative(n, n));
}

ChartAlgebroid ChartAlgebroid::lie_algebra(StructureTensor c, std::string name)
{
  const std::size_t m = c.dim();
  const auto mi = static_cast<Eigen::Index>(m);
  return ChartAlgebroid(
    0,
    m,
    [mi](const Vec &) { return Mat::Zero(0, mi); },
    [c = std::move(c)](const Vec &) { return c; },
    std::move(name),
    zero_anchor_derivative(0, m));
}

ChartAlgebroid ChartAlgebroid::so3() { return lie_algebra(levi_civita(), "so3"); }

ChartAlgebroid ChartAlgebroid::atiyah(std::size_t n, StructureTensor algebra, std::string name)
{
  const std::size_t k = algebra.dim();
  const std::size_t m = n + k;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto mi = static_cast<Eigen::Index>(m);
  StructureTensor c(m);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) { c(n + i, n + j, n + l) = algebra(i, j, l); }
    }
  }
  return ChartAlgebroid(
    n,
    m,
    [ni, mi](const Vec &) {
      Mat r = Mat::Zero(ni, mi);
      r.leftCols(ni).setIdentity();
      return r;
    },
    [c = std::move(c)](const Vec &) { return c; },
    std::move(name),
    zero_anchor_derivative(n, m));
}

Mat Section::derivative(const Vec & x, double fd_step) const
{
  if (jacobian) { return (*jacobian)(x); }
  return finite_difference_jacobian(eval, x, fd_step);
}

Vec DualFunction::partial_x(const Vec & x, const Vec & xi, double fd_step) const
{
  if (grad_x) { return (*grad_x)(x, xi); }
  return finite_difference_gradient([&](const Vec & p) { return eval(p, xi); }, x, fd_step);
}

Vec DualFunction::partial_xi(const Vec & x, const Vec & xi, double fd_step) const
{
  if (grad_xi) { return (*grad_xi)(x, xi); }
  return finite_difference_gradient([&](const Vec & p) { return eval(x, p); }, xi, fd_step);
}

std::vector<Vec> sample_box(std::size_t n, std::size_t count, std::uint64_t seed, double half_width)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  std::vector<Vec> out(count, Vec(static_cast<Eigen::Index>(n)));
  for (auto & p : out) {
    for (Eigen::Index i = 0; i < p.size(); ++i) { p[i] = dist(rng); }
  }
  return out;
}

Vec anchor_apply(const ChartAlgebroid & alg, const Vec & x, const Vec & y)
{
  if (static_cast<std::size_t>(y.size()) != alg.fiber_dim()) {
    throw std::invalid_argument("anchor_apply: fiber vector has dimension " + std::to_string(y.size())
                                + ", expected " + std::to_string(alg.fiber_dim()));
  }
  return alg.anchor(x) * y;
}

ValidationReport validate_skew(const ChartAlgebroid & alg, const std::vector<Vec> & sample_points, double tol)
{
  if (!(tol > 0.0)) { throw std::invalid_argument("validate_skew: tol must be positive"); }
  ValidationReport r{.check = "skew-symmetry", .tolerance = tol, .samples = sample_points.size()};
  const std::size_t m = alg.fiber_dim();
  for (const auto & x : sample_points) {
    const StructureTensor c = alg.structure(x);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = j; k < m; ++k) {
          r.max_violation = std::max(r.max_violation, std::abs(c(i, j, k) + c(i, k, j)));
        }
      }
    }
  }
  r.pass = r.max_violation <= tol;
  return r;
}

ValidationReport validate_anchor_morphism(const ChartAlgebroid & alg,
                                          const std::vector<Vec> & sample_points,
                                          double fd_step,
                                          double tol)
{
  if (!(fd_step > 0.0) || !(tol > 0.0)) {
    throw std::invalid_argument("validate_anchor_morphism: fd_step and tol must be positive");
  }
  ValidationReport r{.check = "anchor-morphism", .tolerance = tol, .samples = sample_points.size()};
  const std::size_t n = alg.base_dim();
  const std::size_t m = alg.fiber_dim();
  for (const auto & x : sample_points) {
    const Mat rho = alg.anchor(x);
    const auto drho = alg.anchor_derivative(x, fd_step);
    const StructureTensor c = alg.structure(x);
    for (std::size_t a = 0; a < n; ++a) {
      const auto ai = static_cast<Eigen::Index>(a);
      for (std::size_t j = 0; j < m; ++j) {
        const auto ji = static_cast<Eigen::Index>(j);
        for (std::size_t k = 0; k < m; ++k) {
          const auto ki = static_cast<Eigen::Index>(k);
          double res = 0.0;
          for (std::size_t b = 0; b < n; ++b) {
            const auto bi = static_cast<Eigen::Index>(b);
            res += drho[b](ai, ki) * rho(bi, ji) - drho[b](ai, ji) * rho(bi, ki);
          }
          for (std::size_t i = 0; i < m; ++i) { res -= rho(ai, static_cast<Eigen::Index>(i)) * c(i, j, k); }
          r.max_violation = std::max(r.max_violation, std::abs(res));
        }
      }
    }
  }
  r.pass = r.max_violation <= tol;
  return r;
}

TangentVector tangent_lift_section(const ChartAlgebroid & alg, const Section & f, const Vec & x, const Vec & y)
{
  if (static_cast<std::size_t>(y.size()) != alg.fiber_dim()) {
    throw std::invalid_argument("tangent_lift_section: fiber dimension mismatch");
  }
  const Mat rho = alg.anchor(x);
  const Vec fx = f.eval(x);
  TangentVector out;
  out.base = rho * fx;
  out.fiber = alg.structure(x).bracket(y, fx);
  if (alg.base_dim() > 0) { out.fiber += f.derivative(x) * (rho * y); }
  return out;
}

TangentVector hamiltonian_vector_field(const ChartAlgebroid & alg, const DualFunction & h, const Vec & x, const Vec & xi)
{
  if (static_cast<std::size_t>(xi.size()) != alg.fiber_dim()) {
    throw std::invalid_argument("hamiltonian_vector_field: covector dimension mismatch");
  }
  const Mat rho = alg.anchor(x);
  const Vec dh_dxi = h.partial_xi(x, xi);
  TangentVector out;
  out.base = rho * dh_dxi;
  out.fiber = alg.structure(x).dual_action(dh_dxi, xi);
  if (alg.base_dim() > 0) { out.fiber -= rho.transpose() * h.partial_x(x, xi); }
  return out;
}

ChartAlgebroid product(const ChartAlgebroid & first, const ChartAlgebroid & second, std::string name)
{
  const std::size_t n1 = first.base_dim(), n2 = second.base_dim();
  const std::size_t m1 = first.fiber_dim(), m2 = second.fiber_dim();
  const auto n1i = static_cast<Eigen::Index>(n1), n2i = static_cast<Eigen::Index>(n2);
  const auto m1i = static_cast<Eigen::Index>(m1), m2i = static_cast<Eigen::Index>(m2);
  if (name.empty()) { name = first.name() + "x" + second.name(); }

  AnchorField anchor = [=](const Vec & x) {
    Mat r = Mat::Zero(n1i + n2i, m1i + m2i);
    r.block(0, 0, n1i, m1i) = first.anchor(x.head(n1i));
    r.block(n1i, m1i, n2i, m2i) = second.anchor(x.tail(n2i));
    return r;
  };
  StructureField structure = [=](const Vec & x) {
    const StructureTensor c1 = first.structure(x.head(n1i));
    const StructureTensor c2 = second.structure(x.tail(n2i));
    StructureTensor c(m1 + m2);
    for (std::size_t i = 0; i < m1; ++i)
      for (std::size_t j = 0; j < m1; ++j)
        for (std::size_t k = 0; k < m1; ++k) c(i, j, k) = c1(i, j, k);
    for (std::size_t i = 0; i < m2; ++i)
      for (std::size_t j = 0; j < m2; ++j)
        for (std::size_t k = 0; k < m2; ++k) c(m1 + i, m1 + j, m1 + k) = c2(i, j, k);
    return c;
  };
  std::optional<AnchorDerivative> deriv;
  if (first.has_analytic_anchor_derivative() && second.has_analytic_anchor_derivative()) {
    deriv = [=](const Vec & x) {
      const auto d1 = first.anchor_derivative(x.head(n1i));
      const auto d2 = second.anchor_derivative(x.tail(n2i));
      std::vector<Mat> d;
      d.reserve(n1 + n2);
      for (const auto & m : d1) {
        Mat r = Mat::Zero(n1i + n2i, m1i + m2i);
        r.block(0, 0, n1i, m1i) = m;
        d.push_back(std::move(r));
      }
      for (const auto & m : d2) {
        Mat r = Mat::Zero(n1i + n2i, m1i + m2i);
        r.block(n1i, m1i, n2i, m2i) = m;
        d.push_back(std::move(r));
      }
      return d;
    };
  }
  return ChartAlgebroid(n1 + n2, m1 + m2, std::move(anchor), std::move(structure), std::move(name), std::move(deriv));
}

ExtendedAlgebroid product_with_time(const ChartAlgebroid & alg)
{
  return ExtendedAlgebroid{
    .inner = product(ChartAlgebroid::tangent_bundle(1), alg, "TRx" + alg.name()),
    .base_dim = alg.base_dim(),
    .fiber_dim = alg.fiber_dim(),
  };
}

}  // namespace alc
