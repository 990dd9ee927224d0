#include "detail/environment.hpp"

namespace tnet::detail {

namespace {

DenseTensor bra_of(const DenseTensor& bra) {
  return bra.conj().relabeled({{"l", "bl"}, {"p", "bp"}, {"r", "br"}});
}

DenseTensor op_of(const DenseTensor& w) { return w.relabeled({{"l", "wl"}, {"r", "wr"}}); }

}  // namespace

DenseTensor unit_env3() { return DenseTensor({1, 1, 1}, {"b", "w", "k"}, {cplx{1.0, 0.0}}); }
DenseTensor unit_env2() { return DenseTensor({1, 1}, {"b", "k"}, {cplx{1.0, 0.0}}); }

DenseTensor grow_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                      const DenseTensor& ket) {
  auto t = contract(env, ket, {{"k", "l"}});                        // b w p r
  t = contract(t, op_of(w), {{"w", "wl"}, {"p", "pi"}});            // b r po wr
  t = contract(t, bra_of(bra), {{"b", "bl"}, {"po", "bp"}});        // r wr br
  return t.relabeled({{"r", "k"}, {"wr", "w"}, {"br", "b"}}).permuted({"b", "w", "k"});
}

DenseTensor grow_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                       const DenseTensor& ket) {
  auto t = contract(ket, env, {{"r", "k"}});                        // l p b w
  t = contract(t, op_of(w), {{"p", "pi"}, {"w", "wr"}});            // l b wl po
  t = contract(t, bra_of(bra), {{"b", "br"}, {"po", "bp"}});        // l wl bl
  return t.relabeled({{"l", "k"}, {"wl", "w"}, {"bl", "b"}}).permuted({"b", "w", "k"});
}

DenseTensor apply_effective(const DenseTensor& left, const DenseTensor& w, const DenseTensor& right,
                            const DenseTensor& site) {
  auto t = contract(left, site, {{"k", "l"}});                      // b w p r
  t = contract(t, op_of(w), {{"w", "wl"}, {"p", "pi"}});            // b r po wr
  t = contract(t, right.relabeled({{"b", "rb"}}), {{"r", "k"}, {"wr", "w"}});  // b po rb
  return t.relabeled({{"b", "l"}, {"po", "p"}, {"rb", "r"}}).permuted({"l", "p", "r"});
}

DenseTensor grow_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& ket) {
  auto t = contract(env, ket, {{"k", "l"}});                        // b p r
  t = contract(t, bra_of(bra), {{"b", "bl"}, {"p", "bp"}});         // r br
  return t.relabeled({{"r", "k"}, {"br", "b"}}).permuted({"b", "k"});
}

DenseTensor grow_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& ket) {
  auto t = contract(ket, env, {{"r", "k"}});                        // l p b
  t = contract(t, bra_of(bra), {{"b", "br"}, {"p", "bp"}});         // l bl
  return t.relabeled({{"l", "k"}, {"bl", "b"}}).permuted({"b", "k"});
}

DenseTensor project(const DenseTensor& left, const DenseTensor& right, const DenseTensor& ket_site) {
  auto t = contract(left, ket_site, {{"k", "l"}});                  // b p r
  t = contract(t, right.relabeled({{"b", "rb"}}), {{"r", "k"}});    // b p rb
  return t.relabeled({{"b", "l"}, {"rb", "r"}}).permuted({"l", "p", "r"});
}

}  // namespace tnet::detail
