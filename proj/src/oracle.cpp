#include "specont/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "specont/active.hpp"
#include "specont/operator_algebra.hpp"
#include "specont/transfer.hpp"

namespace specont {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

Complex lu_logdet(const CMatrix& m) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  Complex acc = 0.0;
  for (Index i = 0; i < m.rows(); ++i) acc += std::log(lu.matrixLU()(i, i));
  if (lu.permutationP().determinant() < 0) acc += Complex(0.0, kPi);
  return acc;
}

}  // namespace

TransferLogDet::TransferLogDet(const SpectralDensity& model,
                               const Contour& contour)
    : model_(model), contour_(contour) {
  ActiveSpace as = ActiveSpace::make(model);
  act_idx_ = as.idx;
  rest_diag_ = as.rest_diag;
  if (as.reduced())
    a_act_ = as.restrict_to_active(model.tilde_a1());
  else
    a_act_ = model.tilde_a1();
  if (!as.reduced()) rest_diag_.resize(0);
  kernel_ = model.block_kernel(contour.nodes, act_idx_);
}

Complex TransferLogDet::operator()(Complex z) const {
  auto key = std::make_pair(z.real(), z.imag());
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ++evals_;

  std::vector<Complex> coefs(contour_.size());
  for (std::size_t j = 0; j < contour_.size(); ++j)
    coefs[j] = contour_.weights[j] * z / (z - contour_.nodes[j]);
  CMatrix block = kernel_->eval(coefs);
  block += a_act_;
  block -= z * CMatrix::Identity(block.rows(), block.cols());

  Complex ld = lu_logdet(block);
  for (Index i = 0; i < rest_diag_.size(); ++i)
    ld += std::log(Complex(rest_diag_(i), 0.0) - z);
  cache_.emplace(key, ld);
  return ld;
}

namespace {

struct Box {
  double x0, x1, y0, y1;
  double wx() const { return x1 - x0; }
  double wy() const { return y1 - y0; }
  double max_side() const { return std::max(wx(), wy()); }
  Complex center() const { return Complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)); }
};

struct WindingOutcome {
  bool stable = false;
  int count = 0;
  double max_log_abs = -std::numeric_limits<double>::infinity();
};

void boundary_samples(const Box& b, int per_edge, std::vector<Complex>& out) {
  out.clear();
  out.reserve(4 * per_edge);
  for (int k = 0; k < per_edge; ++k)
    out.emplace_back(b.x0 + (b.x1 - b.x0) * k / per_edge, b.y0);
  for (int k = 0; k < per_edge; ++k)
    out.emplace_back(b.x1, b.y0 + (b.y1 - b.y0) * k / per_edge);
  for (int k = 0; k < per_edge; ++k)
    out.emplace_back(b.x1 - (b.x1 - b.x0) * k / per_edge, b.y1);
  for (int k = 0; k < per_edge; ++k)
    out.emplace_back(b.x0, b.y1 - (b.y1 - b.y0) * k / per_edge);
}

// Branch-safe logarithmic derivative f'/f via the exp-ratio of logdet
// differences; delta is kept small against both the box scale and the local
// pole distance so the count error stays far below one.
Complex dlog_det(const TransferLogDet& ld, Complex z, double delta,
                 double* max_log) {
  const Complex ld0 = ld(z);
  if (max_log) *max_log = std::max(*max_log, ld0.real());
  const Complex num =
      std::exp(ld(z + delta) - ld0) - std::exp(ld(z - delta) - ld0);
  return num / (2.0 * delta);
}

// -(2 pi i)^{-1} oint dlog over the box boundary with per-edge Gauss
// quadrature; sampling cost does not grow with the enclosed multiplicity.
WindingOutcome winding_via_derivative(const TransferLogDet& ld, const Box& b) {
  const double delta =
      std::min(1e-7 * (1.0 + std::abs(b.center())), 1e-4 * b.max_side());
  const Complex corners[5] = {
      {b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}, {b.x0, b.y0}};
  double prev_count = 0.0;
  bool have_prev = false;
  WindingOutcome out;
  for (int n : {24, 48}) {
    const GaussRule& gl = gauss_legendre(n);
    Complex total = 0.0;
    double max_log = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < 4; ++e) {
      const Complex a = corners[e], c = corners[e + 1];
      const Complex half = 0.5 * (c - a);
      const Complex mid = 0.5 * (c + a);
      for (int i = 0; i < n; ++i) {
        const Complex z = mid + half * gl.nodes[i];
        const Complex d = dlog_det(ld, z, delta, &max_log);
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag())) return {};
        total += gl.weights[i] * half * d;
      }
    }
    const Complex count = total / Complex(0.0, 6.283185307179586476925287);
    const double rounded = std::round(count.real());
    // bail after the first resolution unless the result already looks like
    // a clean integer; a pole hugging the boundary cannot be rescued here
    if (!(std::abs(count.real() - rounded) < 0.1) ||
        !(std::abs(count.imag()) < 0.1))
      return {};
    if (have_prev && rounded == prev_count) {
      out.stable = true;
      out.count = static_cast<int>(rounded);
      out.max_log_abs = max_log;
      return out;
    }
    have_prev = true;
    prev_count = rounded;
  }
  return {};
}

// One phase-tracking level; stable only when internally consistent.
struct PhaseLevel {
  bool ok = false;
  int count = 0;
  double max_log = 0.0;
  double total_variation = 0.0;  // sum |wrapped increments|, lower bound
};

PhaseLevel phase_level(const TransferLogDet& ld, const Box& b, int n) {
  std::vector<Complex> pts;
  boundary_samples(b, n, pts);
  double total = 0.0;
  double tv = 0.0;
  double max_inc = 0.0;
  double max_log = -std::numeric_limits<double>::infinity();
  Complex prev = ld(pts[0]);
  max_log = prev.real();
  for (std::size_t k = 1; k <= pts.size(); ++k) {
    const Complex cur = ld(pts[k % pts.size()]);
    if (!std::isfinite(cur.real())) return {};
    const double inc = wrap_angle(cur.imag() - prev.imag());
    total += inc;
    tv += std::abs(inc);
    max_inc = std::max(max_inc, std::abs(inc));
    max_log = std::max(max_log, cur.real());
    prev = cur;
  }
  const double w = total / kTwoPi;
  const double nearest = std::round(w);
  PhaseLevel out;
  out.total_variation = tv;
  out.max_log = max_log;
  if (std::abs(w - nearest) >= 0.2 || max_inc >= 0.85 * kPi) return out;
  out.ok = true;
  out.count = static_cast<int>(nearest);
  return out;
}

// Counts are accepted only when two independent measurements agree: two
// consecutive phase-tracking densities (rejects the coherent aliasing a
// regular grid produces around large multiplicities), or the two-resolution
// quadrature of f'/f, whose cost does not grow with the multiplicity.
WindingOutcome compute_winding(const TransferLogDet& ld, const Box& b,
                               int start_per_edge, int cap_per_edge,
                               bool skip_quick = false) {
  PhaseLevel prev;
  double tv_estimate = 0.0;
  auto accept = [&](const PhaseLevel& cur) -> std::optional<WindingOutcome> {
    if (prev.ok && cur.ok && prev.count == cur.count) {
      WindingOutcome out;
      out.stable = true;
      out.count = cur.count;
      out.max_log_abs = std::max(prev.max_log, cur.max_log);
      return out;
    }
    tv_estimate = std::max(tv_estimate, cur.total_variation);
    prev = cur;
    return std::nullopt;
  };

  int n = start_per_edge;
  if (!skip_quick) {
    // cheap phase levels first; they settle empty and low-count boxes
    for (; n <= 8 * start_per_edge && n <= cap_per_edge; n *= 2) {
      if (tv_estimate > 0.5 * (0.85 * kPi) * 4.0 * n * 2.0) break;
      if (auto out = accept(phase_level(ld, b, n))) return *out;
    }
  }

  WindingOutcome dw = winding_via_derivative(ld, b);
  if (dw.stable) return dw;

  // the ladder cannot stabilize when the boundary phase variation exceeds
  // what cap samples resolve; split instead of burning the ladder
  if (tv_estimate > 0.5 * (0.85 * kPi) * 4.0 * cap_per_edge) return {};

  for (; n <= cap_per_edge; n *= 2) {
    if (auto out = accept(phase_level(ld, b, n))) return *out;
  }
  return {};
}

bool newton_refine(const TransferLogDet& ld, Complex z0, int multiplicity,
                   double cap, Complex* out) {
  Complex z = z0;
  double prev_step = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < 60; ++it) {
    const double delta = 1e-7 * (1.0 + std::abs(z));
    const Complex ld0 = ld(z);
    const Complex ratio =
        (std::exp(ld(z + delta) - ld0) - std::exp(ld(z - delta) - ld0)) /
        (2.0 * delta);
    if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag()) ||
        ratio == Complex(0.0, 0.0)) {
      z += delta * Complex(0.3, 0.4);
      continue;
    }
    Complex step = -static_cast<double>(multiplicity) / ratio;
    const double sn = std::abs(step);
    if (sn > cap) step *= cap / sn;
    z += step;
    if (std::abs(step) <= 1e-12 * (1.0 + std::abs(z))) {
      *out = z;
      return true;
    }
    // walking toward a heavier zero outside the box shrinks steps only by
    // (1 - 1/m) per iteration; cut that walk short
    stalled = std::abs(step) > 0.7 * prev_step ? stalled + 1 : 0;
    prev_step = std::abs(step);
    if (stalled >= 6) break;
  }
  *out = z;
  return false;
}

}  // namespace

std::vector<TransferZero> find_transfer_zeros(const SpectralDensity& model,
                                              const Contour& contour,
                                              const RootSearchRegion& region) {
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min))
    raise(errc::invalid_operand, "empty search region");
  // the rectangle must respect the contour safety margin
  {
    const Box b{region.re_min, region.re_max, region.im_min, region.im_max};
    std::vector<Complex> pts;
    boundary_samples(b, 16, pts);
    for (const Complex& z : pts)
      if (contour.too_close(z))
        raise(errc::near_contour, "search region touches the contour margin");
  }

  TransferLogDet ld(model, contour);
  const int start = std::max(4, region.grid_density);
  // high multiplicities need dense boundary sampling only once the box is
  // small; during the descent an unstable count simply triggers a split
  auto cap_for = [&](const Box& b) {
    if (b.max_side() <= 8.0 * region.min_cell) return 4096;
    return b.max_side() <= 256.0 * region.min_cell ? 512 : 64;
  };

  struct WorkItem {
    Box box;
    WindingOutcome w;
  };

  std::vector<TransferZero> zeros;
  const Box root{region.re_min, region.re_max, region.im_min, region.im_max};
  const WindingOutcome root_w = compute_winding(ld, root, start, cap_for(root));
  std::vector<WorkItem> work{{root, root_w}};

  auto record_zero = [&](const Box& b, const WindingOutcome& w) {
    const int mult = std::max(w.count, 1);
    Complex z;
    const bool converged =
        newton_refine(ld, b.center(), mult, 4.0 * b.max_side(), &z);
    const double slack = 1e-12 + 1e-9 * (1.0 + std::abs(z));
    const bool inside = z.real() >= b.x0 - slack && z.real() <= b.x1 + slack &&
                        z.imag() >= b.y0 - slack && z.imag() <= b.y1 + slack;
    if (!converged || !inside) {
      // keep splitting while the center-representative error would be a
      // noticeable fraction of min_cell (Newton stalls in the field of a
      // heavy neighboring cluster)
      if (b.max_side() > 0.25 * region.min_cell) return false;
      z = b.center();
    }
    TransferZero tz;
    tz.location = z;
    tz.multiplicity = mult;
    tz.det_rel = std::exp(ld(z).real() - w.max_log_abs);
    if (std::getenv("SPECONT_TRACE_WINDING"))
      std::fprintf(stderr, "record m=%d at (%.9g,%.9g) box_side=%g conv=%d\n",
                   mult, z.real(), z.imag(), b.max_side(), converged ? 1 : 0);
    zeros.push_back(tz);
    return true;
  };

  // A stable count >= 2 in a small box is often one tight cluster.  Confirm
  // by locating it with multiplicity-aware Newton and re-counting inside a
  // min_cell box around the limit; on success the cluster is recorded whole
  // instead of being bisected through every scale it spans.
  auto try_cluster = [&](const Box& b, const WindingOutcome& w) {
    if (!w.stable || w.count < 2) return false;
    if (b.max_side() > 4096.0 * region.min_cell) return false;
    Complex z;
    if (!newton_refine(ld, b.center(), w.count, 4.0 * b.max_side(), &z))
      return false;
    const double pad = 0.45 * region.min_cell;
    if (z.real() < b.x0 + pad || z.real() > b.x1 - pad ||
        z.imag() < b.y0 + pad || z.imag() > b.y1 - pad)
      return false;
    const Box probe{z.real() - pad, z.real() + pad, z.imag() - pad,
                    z.imag() + pad};
    WindingOutcome wp = compute_winding(ld, probe, 64, 512, /*skip_quick=*/true);
    if (!wp.stable || wp.count != w.count) return false;
    TransferZero tz;
    tz.location = z;
    tz.multiplicity = w.count;
    tz.det_rel = std::exp(ld(z).real() - w.max_log_abs);
    if (std::getenv("SPECONT_TRACE_WINDING"))
      std::fprintf(stderr, "cluster m=%d at (%.9g,%.9g) box_side=%g\n",
                   w.count, z.real(), z.imag(), b.max_side());
    zeros.push_back(tz);
    return true;
  };

  const bool trace = std::getenv("SPECONT_TRACE_WINDING") != nullptr;
  while (!work.empty()) {
    WorkItem item = work.back();
    work.pop_back();
    const Box& b = item.box;
    const WindingOutcome& w = item.w;
    if (trace)
      std::fprintf(stderr, "box [%g,%g]x[%g,%g] side=%g stable=%d count=%d evals=%zu\n",
                   b.x0, b.x1, b.y0, b.y1, b.max_side(), w.stable ? 1 : 0,
                   w.count, ld.evaluations());

    if (w.stable && w.count == 0) continue;
    if (!w.stable && b.max_side() <= region.min_cell)
      raise(errc::unresolved_region,
            "winding unstable below the minimum cell size");
    if (w.stable && (w.count == 1 || b.max_side() <= region.min_cell)) {
      if (record_zero(b, w)) continue;
    }
    if (try_cluster(b, w)) continue;

    // split the longer side; nudge the split point when a zero sits on the
    // midline and spoils the child windings.  The exact-half first attempt
    // keeps sibling sample points bitwise shared for the cache.
    bool split_ok = false;
    for (int attempt = 0; attempt < 5 && !split_ok; ++attempt) {
      const double frac = attempt == 0 ? 0.5 : 0.5 + 0.037 * attempt;
      Box c1 = b, c2 = b;
      if (b.wx() >= b.wy()) {
        const double xm = attempt == 0 ? b.x0 + 0.5 * b.wx() : b.x0 + frac * b.wx();
        c1.x1 = xm;
        c2.x0 = xm;
      } else {
        const double ym = attempt == 0 ? b.y0 + 0.5 * b.wy() : b.y0 + frac * b.wy();
        c1.y1 = ym;
        c2.y0 = ym;
      }
      WindingOutcome w1 = compute_winding(ld, c1, start, cap_for(c1));
      WindingOutcome w2 = compute_winding(ld, c2, start, cap_for(c2));
      const bool consistent =
          w1.stable && w2.stable && (!w.stable || w1.count + w2.count == w.count);
      if (consistent) {
        if (w1.count > 0) work.push_back({c1, w1});
        if (w2.count > 0) work.push_back({c2, w2});
        split_ok = true;
      } else if (attempt == 4) {
        // a zero stayed glued to every candidate split line; distrust the
        // child counts and let deeper subdivision resolve the mass
        work.push_back({c1, WindingOutcome{}});
        work.push_back({c2, WindingOutcome{}});
        split_ok = true;
      }
    }
    (void)split_ok;
  }

  // merge duplicates (adjacent boxes can refine to the same point)
  std::sort(zeros.begin(), zeros.end(), [](const TransferZero& a, const TransferZero& b) {
    if (a.location.real() != b.location.real())
      return a.location.real() < b.location.real();
    return a.location.imag() < b.location.imag();
  });
  std::vector<TransferZero> merged;
  for (const TransferZero& z : zeros) {
    if (!merged.empty() &&
        std::abs(z.location - merged.back().location) <
            1e-9 * (1.0 + std::abs(z.location))) {
      merged.back().multiplicity += z.multiplicity;
      merged.back().det_rel = std::min(merged.back().det_rel, z.det_rel);
    } else {
      merged.push_back(z);
    }
  }

  if (root_w.stable) {
    int total = 0;
    for (const TransferZero& z : merged) total += z.multiplicity;
    if (total != root_w.count)
      raise(errc::unresolved_region,
            "zero count does not conserve the region winding number");
  }
  return merged;
}

double schur_identity_check(const DiscretizedFullMatrix& dfm,
                            std::span<const Complex> z_samples) {
  const Index dim = dfm.h.rows();
  const Index n = dfm.n;
  const Index d0 = dfm.dim0;
  double worst = 0.0;
  for (const Complex& z : z_samples) {
    for (Index k = 0; k < dfm.nodes.size(); ++k)
      if (std::abs(z - dfm.nodes(k)) < 1e-10 * (1.0 + std::abs(z)))
        raise(errc::ill_conditioned_sample, "sample too close to a node");
    CMatrix shifted = dfm.h - z * CMatrix::Identity(dim, dim);
    Eigen::PartialPivLU<CMatrix> lu(shifted);
    if (lu.rcond() < 1e-12)
      raise(errc::ill_conditioned_sample,
            "resolvent sample too close to the spectrum");
    CMatrix rhs = CMatrix::Zero(dim, n);
    rhs.bottomRows(n) = CMatrix::Identity(n, n);
    const CMatrix cols = lu.solve(rhs);
    const CMatrix r11 = cols.bottomRows(n);

    const CMatrix m1 = dfm.m1_discrete(z);
    Eigen::PartialPivLU<CMatrix> lum(m1);
    if (lum.rcond() < 1e-12)
      raise(errc::ill_conditioned_sample, "transfer function nearly singular");
    const CMatrix m1_inv = lum.inverse();
    worst = std::max(worst,
                     spectral_norm(m1_inv - r11) / spectral_norm(m1_inv));
  }
  return worst;
}

std::vector<SweepRow> resonance_sweep(const SpectralDensity& model,
                                      const ContourShape& shape,
                                      const QuadSpec& quad, int sheet,
                                      double s_max, int steps,
                                      const SolveOptions& opts) {
  std::vector<SweepRow> rows;
  std::vector<Complex> prev;       // previous eigenvalues by branch id
  std::vector<int> prev_branch;

  for (int step = 0; step <= steps; ++step) {
    const double s = s_max * step / steps;
    std::unique_ptr<SpectralDensity> scaled = model.scaled(s);
    SolveOptions o = opts;
    o.allow_noncertified = true;
    try {
      Contour contour = build_contour(*scaled, sheet, shape, quad);
      SolveReport rep = solve_basic_equation(*scaled, contour, o);
      std::vector<SpectralPoint> spec = spectrum_H1(rep);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(scaled->tilde_a1());

      std::vector<Complex> cur(spec.size());
      for (std::size_t i = 0; i < spec.size(); ++i) cur[i] = spec[i].lambda;
      std::vector<int> branch(cur.size(), -1);
      if (prev.empty()) {
        for (std::size_t i = 0; i < cur.size(); ++i) branch[i] = static_cast<int>(i);
      } else {
        // greedy nearest-neighbor continuation from the previous step
        std::vector<bool> taken(prev.size(), false);
        std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
        for (std::size_t i = 0; i < cur.size(); ++i)
          for (std::size_t j = 0; j < prev.size(); ++j)
            cand.emplace_back(std::abs(cur[i] - prev[j]), i, j);
        std::sort(cand.begin(), cand.end());
        std::vector<bool> assigned(cur.size(), false);
        for (const auto& [d, i, j] : cand) {
          if (assigned[i] || taken[j]) continue;
          branch[i] = prev_branch[j];
          assigned[i] = true;
          taken[j] = true;
        }
      }

      for (std::size_t i = 0; i < cur.size(); ++i) {
        SweepRow row;
        row.s = s;
        row.branch = branch[i];
        row.lambda = cur[i];
        row.certified = rep.certified;
        row.r_min = rep.admissibility.r_min;
        double dist = std::numeric_limits<double>::infinity();
        for (Index k = 0; k < es.eigenvalues().size(); ++k)
          dist = std::min(dist, std::abs(cur[i] - Complex(es.eigenvalues()(k), 0)));
        row.inside_equality_set = dist <= rep.admissibility.equality_radius();
        rows.push_back(row);
      }
      prev = std::move(cur);
      prev_branch = branch;
    } catch (const numeric_error&) {
      SweepRow row;
      row.s = s;
      row.solve_failed = true;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace specont
