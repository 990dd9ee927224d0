#include "tnet/oracle.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "detail/blas_guard.hpp"

namespace tnet::oracle {

namespace {

[[maybe_unused]] const bool kBlasChecked = detail::ensure_blas_kernels();

using Mat = Eigen::MatrixXcd;
using cd = std::complex<double>;

Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = cd(0, -1); m(1, 0) = cd(0, 1); break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

std::size_t ipow(std::size_t d, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < n; ++i) r *= d;
  return r;
}

// Adds `op` acting on `width` consecutive sites starting at `site` to `h`.
void add_local(Mat& h, const Mat& op, std::size_t site, std::size_t width, std::size_t n, std::size_t d) {
  const std::size_t dim = ipow(d, n);
  const std::size_t block = ipow(d, width);
  const std::size_t stride = ipow(d, n - site - width);  // weight of the last local digit
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t local_i = (i / stride) % block;
    const std::size_t rest = i - local_i * stride;
    for (std::size_t local_j = 0; local_j < block; ++local_j) {
      const cd v = op(static_cast<Eigen::Index>(local_i), static_cast<Eigen::Index>(local_j));
      if (v != cd(0.0, 0.0)) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(rest + local_j * stride)) += v;
    }
  }
}

bool real_matrix(const Mat& a) { return (a.imag().array() == 0.0).all(); }

Eigenpairs eigh(const Mat& a, std::size_t k) {
  const auto n = static_cast<lapack_int>(a.rows());
  const auto kk = static_cast<lapack_int>(std::min<std::size_t>(k, a.rows()));
  Eigenpairs out;
  lapack_int found = 0;
  lapack_int info = 0;
  Eigen::VectorXd w(n);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max<lapack_int>(kk, 1)));
  if (real_matrix(a)) {
    Eigen::MatrixXd m = a.real();
    Eigen::MatrixXd z(n, std::max<lapack_int>(kk, 1));
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, m.data(), n, 0.0, 0.0, 1, kk, 0.0, &found,
                          w.data(), z.data(), n, isuppz.data());
    out.vectors = z.leftCols(found).cast<cd>();
  } else {
    Mat m = a;
    Mat z(n, std::max<lapack_int>(kk, 1));
    info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, m.data(), n, 0.0, 0.0, 1, kk, 0.0, &found,
                          w.data(), z.data(), n, isuppz.data());
    out.vectors = z.leftCols(found);
  }
  if (info != 0) throw std::runtime_error("oracle eigensolver failed (info=" + std::to_string(info) + ")");
  out.values = w.head(found);
  return out;
}

}  // namespace

Mat embed(const Mat& op, std::size_t site, std::size_t n, std::size_t d) {
  const std::size_t dim = ipow(d, n);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  add_local(out, op, site, 1, n, d);
  return out;
}

DenseHamiltonian dense_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  DenseHamiltonian out;
  out.n = spec.n;
  out.d = spec.phys_dim();
  const std::size_t dim = ipow(out.d, out.n);
  if (dim > kMaxDenseDim) throw std::invalid_argument("dense_hamiltonian: Hilbert space too large");

  // Two-site terms as sums of products a (x) b, one-site term h1.
  std::vector<std::pair<Mat, Mat>> pairs;
  Mat h2, h1;
  switch (spec.model) {
    case ModelKind::transverse_field_ising:
      pairs.emplace_back(-spec.j * pauli('z'), pauli('z'));
      h1 = -spec.h * pauli('x');
      break;
    case ModelKind::heisenberg_xxz:
      pairs.emplace_back(0.25 * spec.j * pauli('x'), pauli('x'));
      pairs.emplace_back(0.25 * spec.j * pauli('y'), pauli('y'));
      pairs.emplace_back(0.25 * spec.j * spec.delta * pauli('z'), pauli('z'));
      h1 = -0.5 * spec.field * pauli('z');
      break;
    case ModelKind::custom_nn:
      h2 = spec.two_site;
      h1 = spec.one_site.size() != 0 ? Mat(spec.one_site) : Mat::Zero(out.d, out.d);
      break;
  }
  if (!pairs.empty()) {
    h2 = Mat::Zero(4, 4);
    for (const auto& [a, b] : pairs)
      for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) h2.block(2 * i, 2 * j, 2, 2) += a(i, j) * b;
  }

  out.matrix = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b + 1 < out.n; ++b) add_local(out.matrix, h2, b, 2, out.n, out.d);
  for (std::size_t k = 0; k < out.n; ++k) add_local(out.matrix, h1, k, 1, out.n, out.d);
  return out;
}

GroundState ed_ground(const DenseHamiltonian& h) {
  const auto e = eigh(h.matrix, 1);
  return {e.values(0), e.vectors.col(0)};
}

Eigenpairs ed_spectrum(const DenseHamiltonian& h, std::size_t k) { return eigh(h.matrix, k); }

Eigenpairs full_spectrum(const DenseHamiltonian& h) {
  return eigh(h.matrix, static_cast<std::size_t>(h.matrix.rows()));
}

Eigen::VectorXcd dense_evolve(const DenseHamiltonian& h, const Eigen::VectorXcd& v0, double t) {
  const auto e = full_spectrum(h);
  Eigen::VectorXcd c = e.vectors.adjoint() * v0;
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(cd(0.0, -e.values(i) * t));
  return e.vectors * c;
}

GibbsState dense_gibbs(const DenseHamiltonian& h, double beta) {
  const auto e = full_spectrum(h);
  const double e0 = e.values(0);
  Eigen::VectorXd w(e.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::exp(-beta * (e.values(i) - e0));
  const double z = w.sum();
  GibbsState out;
  out.log_z = std::log(z) - beta * e0;
  out.energy = (w.array() * e.values.array()).sum() / z;
  out.rho = e.vectors * (w / z).cast<cd>().asDiagonal() * e.vectors.adjoint();
  return out;
}

cd local_expectation(const Mat& rho, const Mat& op, std::size_t site, std::size_t n, std::size_t d) {
  return (rho * embed(op, site, n, d)).trace();
}

double tfi_free_fermion_ground(std::size_t n, double j, double h) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, i) = h;
    if (i + 1 < x.rows()) x(i, i + 1) = j;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  return -svd.singularValues().sum();
}

double ising_brute_force(std::size_t l, double beta, double j) {
  if (l < 1 || l > 4) throw std::invalid_argument("ising_brute_force: 1 <= L <= 4");
  const std::size_t sites = l * l;
  double z = 0.0;
  for (std::size_t cfg = 0; cfg < (std::size_t{1} << sites); ++cfg) {
    auto s = [&](std::size_t x, std::size_t y) { return ((cfg >> ((y % l) * l + (x % l))) & 1) ? -1 : 1; };
    int bonds = 0;
    for (std::size_t y = 0; y < l; ++y)
      for (std::size_t x = 0; x < l; ++x) bonds += s(x, y) * (s(x + 1, y) + s(x, y + 1));
    z += std::exp(beta * j * bonds);
  }
  return z;
}

double ising_transfer_matrix(std::size_t width, double beta, double j) {
  if (width < 1 || width > 12) throw std::invalid_argument("ising_transfer_matrix: 1 <= width <= 12");
  const std::size_t dim = std::size_t{1} << width;
  const double k = beta * j;
  // Symmetric split T = D^{1/2} V D^{1/2}: D carries the in-row bonds,
  // V = (x)_i [[e^K, e^-K], [e^-K, e^K]] the bonds between rows.
  Eigen::VectorXd half(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    int e = 0;
    for (std::size_t i = 0; i < width; ++i) {
      const int a = (c >> i) & 1 ? -1 : 1;
      const int b = (c >> ((i + 1) % width)) & 1 ? -1 : 1;
      e += a * b;
    }
    half(static_cast<Eigen::Index>(c)) = std::exp(0.5 * k * e);
  }
  const double same = std::exp(k), flip = std::exp(-k);
  auto apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd u = half.cwiseProduct(v);
    for (std::size_t i = 0; i < width; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      for (std::size_t c = 0; c < dim; ++c) {
        if (c & bit) continue;
        const double a = u(static_cast<Eigen::Index>(c)), b = u(static_cast<Eigen::Index>(c | bit));
        u(static_cast<Eigen::Index>(c)) = same * a + flip * b;
        u(static_cast<Eigen::Index>(c | bit)) = flip * a + same * b;
      }
    }
    return Eigen::VectorXd(half.cwiseProduct(u));
  };
  // Power iteration; the leading vector is positive and spin-flip symmetric.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim)).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = apply(v);
    const double next = v.dot(w);
    const double n = w.norm();
    const bool done = std::abs(next - lambda) <= 1e-15 * std::abs(next) && (w / n - v).norm() < 1e-12;
    lambda = next;
    v = w / n;
    if (done) break;
  }
  return -std::log(lambda) / (beta * static_cast<double>(width));
}

double ising_transfer_matrix_limit(double beta, double j, std::size_t max_width) {
  if (max_width < 4) throw std::invalid_argument("ising_transfer_matrix_limit: max_width >= 4");
  const double a = ising_transfer_matrix(max_width - 2, beta, j);
  const double b = ising_transfer_matrix(max_width - 1, beta, j);
  const double c = ising_transfer_matrix(max_width, beta, j);
  const double denom = (c - b) - (b - a);
  if (denom == 0.0) return c;
  return c - (c - b) * (c - b) / denom;
}

double onsager_f(double beta, double j) {
  const double k = beta * j;
  const double c = std::cosh(2 * k);
  const double kappa = 2 * std::sinh(2 * k) / (c * c);
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [kappa](double t) {
    const double s = std::sin(t);
    return std::log(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - kappa * kappa * s * s))));
  };
  const double integral = integrator.integrate(f, 0.0, M_PI / 2, 1e-14);
  return -(std::log(2 * c) + integral / M_PI) / beta;
}

double onsager_f_double_integral(double beta, double j, std::size_t grid) {
  const double k = beta * j;
  const double c2 = std::pow(std::cosh(2 * k), 2), s = std::sinh(2 * k);
  double sum = 0.0;
  for (std::size_t a = 0; a < grid; ++a) {
    const double ta = 2 * M_PI * (a + 0.5) / grid;
    for (std::size_t b = 0; b < grid; ++b) {
      const double tb = 2 * M_PI * (b + 0.5) / grid;
      sum += std::log(c2 - s * (std::cos(ta) + std::cos(tb)));
    }
  }
  const double mean = sum / static_cast<double>(grid * grid);
  return -(std::log(2.0) + 0.5 * mean) / beta;
}

}  // namespace tnet::oracle
