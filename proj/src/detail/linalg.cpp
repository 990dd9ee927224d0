#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "detail/blas_guard.hpp"
#include "detail/linalg.hpp"
#include "tnet/errors.hpp"

namespace tnet::detail {

namespace {
[[maybe_unused]] const bool kBlasChecked = ensure_blas_kernels();
}  // namespace

bool is_real(const Eigen::MatrixXcd& a) { return (a.imag().array() == 0.0).all(); }

Svd svd(const Eigen::MatrixXcd& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  Svd out;
  out.s.resize(k);
  if (is_real(a)) {
    Eigen::MatrixXd work = a.real();
    Eigen::MatrixXd u(m, k), vh(k, n);
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(),
                                     u.data(), m, vh.data(), k);
    if (info > 0) {
      work = a.real();
      std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(k, 1)));
      info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(), m, out.s.data(),
                            u.data(), m, vh.data(), k, superb.data());
    }
    if (info != 0) throw NumericalError("SVD did not converge (info=" + std::to_string(info) + ")");
    out.u = u.cast<std::complex<double>>();
    out.vh = vh.cast<std::complex<double>>();
    return out;
  }
  Eigen::MatrixXcd work = a;
  out.u.resize(m, k);
  out.vh.resize(k, n);
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(),
                                   out.u.data(), m, out.vh.data(), k);
  if (info > 0) {
    work = a;
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(k, 1)));
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(), m, out.s.data(),
                          out.u.data(), m, out.vh.data(), k, superb.data());
  }
  if (info != 0) throw NumericalError("SVD did not converge (info=" + std::to_string(info) + ")");
  return out;
}

Eigh eigh(const Eigen::MatrixXcd& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigh out;
  out.values.resize(n);
  if (is_real(a)) {
    Eigen::MatrixXd w = 0.5 * (a.real() + a.real().transpose());
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, w.data(), n, out.values.data());
    if (info != 0) throw NumericalError("eigh did not converge");
    out.vectors = w.cast<std::complex<double>>();
    return out;
  }
  Eigen::MatrixXcd w = 0.5 * (a + a.adjoint());
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, w.data(), n, out.values.data());
  if (info != 0) throw NumericalError("eigh did not converge");
  out.vectors = std::move(w);
  return out;
}

}  // namespace tnet::detail
