#include "specont/active.hpp"

#include <cmath>

namespace specont {

ActiveSpace ActiveSpace::make(const SpectralDensity& model) {
  ActiveSpace as;
  const Index n = model.dim();
  as.full_dim = n;
  const std::vector<Index>* supp = model.support();
  if (supp == nullptr) {
    as.idx.resize(n);
    for (Index i = 0; i < n; ++i) as.idx[i] = i;
    return as;
  }

  std::vector<bool> active(n, false);
  for (Index i : *supp) active[static_cast<std::size_t>(i)] = true;

  // the split is only usable when tilde_a1 decouples the complement
  const CMatrix& a = model.tilde_a1();
  const double tol = 0.0;
  bool splits = true;
  for (Index i = 0; i < n && splits; ++i) {
    if (active[i]) continue;
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      if (std::abs(a(i, k)) > tol || std::abs(a(k, i)) > tol) {
        splits = false;
        break;
      }
    }
  }
  if (!splits) {
    as.idx.resize(n);
    for (Index i = 0; i < n; ++i) as.idx[i] = i;
    return as;
  }

  for (Index i = 0; i < n; ++i) {
    if (active[i])
      as.idx.push_back(i);
    else
      as.rest.push_back(i);
  }
  as.rest_diag.resize(static_cast<Index>(as.rest.size()));
  for (std::size_t r = 0; r < as.rest.size(); ++r)
    as.rest_diag(static_cast<Index>(r)) = a(as.rest[r], as.rest[r]).real();
  return as;
}

CMatrix ActiveSpace::restrict_to_active(const CMatrix& full) const {
  const Index m = active_dim();
  CMatrix out(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k) out(i, k) = full(idx[i], idx[k]);
  return out;
}

CVector ActiveSpace::restrict_to_active(const CVector& full) const {
  const Index m = active_dim();
  CVector out(m);
  for (Index i = 0; i < m; ++i) out(i) = full(idx[i]);
  return out;
}

CMatrix ActiveSpace::embed(const CMatrix& active, const CVector& rest_values) const {
  CMatrix out = CMatrix::Zero(full_dim, full_dim);
  const Index m = active_dim();
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k) out(idx[i], idx[k]) = active(i, k);
  for (std::size_t r = 0; r < rest.size(); ++r)
    out(rest[r], rest[r]) = rest_values(static_cast<Index>(r));
  return out;
}

CMatrix ActiveSpace::embed_zero(const CMatrix& active) const {
  return embed(active, CVector::Zero(static_cast<Index>(rest.size())));
}

}  // namespace specont
