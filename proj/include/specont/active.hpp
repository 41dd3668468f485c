#pragma once

#include <vector>

#include "specont/model.hpp"
#include "specont/types.hpp"

namespace specont {

// When the density vanishes outside a support index set and tilde_a1 is
// diagonal on the complement, every pipeline operator splits as
// (diagonal on the complement) ⊕ (dense block on the support).  This view
// carries the split so solves, determinants and resolvents can work on the
// small block.
struct ActiveSpace {
  Index full_dim = 0;
  std::vector<Index> idx;   // active indices
  std::vector<Index> rest;  // complement
  RVector rest_diag;        // tilde_a1 diagonal on the complement (real)

  bool reduced() const { return !rest.empty(); }
  Index active_dim() const { return static_cast<Index>(idx.size()); }

  static ActiveSpace make(const SpectralDensity& model);

  CMatrix restrict_to_active(const CMatrix& full) const;
  CVector restrict_to_active(const CVector& full) const;
  // Embed an active block into the full space with `rest_values` on the
  // complement diagonal.
  CMatrix embed(const CMatrix& active, const CVector& rest_values) const;
  CMatrix embed_zero(const CMatrix& active) const;
};

}  // namespace specont
