#pragma once

// Environment tensors for <bra| W |ket> sandwiches.
//
// Three-layer environments carry labels (b, w, k): bra bond, operator bond,
// ket bond. Two-layer (overlap) environments carry (b, k). Left environments
// index the bond to the left of the next site, right environments the bond to
// the right of the previous site.

#include "tnet/tensor.hpp"

namespace tnet::detail {

DenseTensor unit_env3();
DenseTensor unit_env2();

DenseTensor grow_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                      const DenseTensor& ket);
DenseTensor grow_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                       const DenseTensor& ket);

// L W R applied to a site tensor (l, p, r); the result lives in the bra basis.
DenseTensor apply_effective(const DenseTensor& left, const DenseTensor& w, const DenseTensor& right,
                            const DenseTensor& site);

DenseTensor grow_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& ket);
DenseTensor grow_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& ket);

// L ket R for overlap environments, in the bra basis.
DenseTensor project(const DenseTensor& left, const DenseTensor& right, const DenseTensor& ket_site);

}  // namespace tnet::detail
