#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tnet::detail {

struct Identity {
  std::complex<double> operator()(std::complex<double> z) const { return z; }
};
struct RealPart {
  double operator()(std::complex<double> z) const { return z.real(); }
};

// Writes src (row-major over src_dims) into out with out axis i = src axis
// perm[i], applying `f` to each element.
template <typename Out, typename F>
void permute_into(std::span<const std::complex<double>> src, const std::vector<std::size_t>& src_dims,
                  const std::vector<std::size_t>& perm, Out* out, F f) {
  const std::size_t rank = src_dims.size();
  if (rank == 0) {
    out[0] = f(src[0]);
    return;
  }
  std::vector<std::size_t> src_strides(rank, 1);
  for (std::size_t i = rank - 1; i > 0; --i) src_strides[i - 1] = src_strides[i] * src_dims[i];

  bool identity = true;
  for (std::size_t i = 0; i < rank; ++i) identity = identity && perm[i] == i;
  if (identity) {
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = f(src[i]);
    return;
  }

  std::vector<std::size_t> dims(rank), strides(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = src_dims[perm[i]];
    strides[i] = src_strides[perm[i]];
  }
  const std::size_t inner = dims[rank - 1];
  const std::size_t inner_stride = strides[rank - 1];
  std::vector<std::size_t> idx(rank, 0);
  std::size_t offset = 0;
  std::size_t pos = 0;
  const std::size_t total = src.size();
  while (pos < total) {
    const std::complex<double>* s = src.data() + offset;
    for (std::size_t j = 0; j < inner; ++j) out[pos + j] = f(s[j * inner_stride]);
    pos += inner;
    // advance the outer odometer
    for (std::size_t ax = rank - 1; ax-- > 0;) {
      ++idx[ax];
      offset += strides[ax];
      if (idx[ax] < dims[ax]) break;
      offset -= strides[ax] * dims[ax];
      idx[ax] = 0;
    }
  }
}

}  // namespace tnet::detail
