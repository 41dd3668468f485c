#include <doctest.h>

#include "specont/operator_algebra.hpp"
#include "specont/rng.hpp"

using namespace specont;

namespace {

CMatrix random_matrix(Rng& rng, Index n) {
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) m(i, k) = rng.cnormal();
  return m;
}

CMatrix random_psd(Rng& rng, Index n, Index rank) {
  CMatrix g(rank, n);
  for (Index i = 0; i < rank; ++i)
    for (Index k = 0; k < n; ++k) g(i, k) = rng.cnormal();
  return g.adjoint() * g;
}

}  // namespace

TEST_CASE("spectral_norm basic values") {
  CHECK(spectral_norm(CMatrix::Zero(3, 3)) == 0.0);
  CHECK(spectral_norm(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = Complex(0.0, -5.0);
  CHECK(spectral_norm(d) == doctest::Approx(5.0));
}

TEST_CASE("spectral_norm rejects non-finite input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_WITH_AS(spectral_norm(m), doctest::Contains("InvalidOperand"),
                       numeric_error);
}

TEST_CASE("spectral_norm is submultiplicative on random pairs") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 7);
    CMatrix a = random_matrix(rng, n);
    CMatrix b = random_matrix(rng, n);
    CHECK(spectral_norm(a * b) <=
          spectral_norm(a) * spectral_norm(b) + 1e-10);
  }
}

TEST_CASE("eig_general on diagonal and Hermitian input") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = Complex(1.0, 2.0);
  d(1, 1) = 4.0;
  auto pairs = eig_general(d);
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].value - Complex(1.0, 2.0)) < 1e-14);
  CHECK(std::abs(pairs[1].value - Complex(4.0, 0.0)) < 1e-14);

  Rng rng(7);
  CMatrix h = random_matrix(rng, 5);
  h = 0.5 * (h + h.adjoint()).eval();
  const double scale = spectral_norm(h);
  for (const EigPair& p : eig_general(h))
    CHECK(std::abs(p.value.imag()) <= kTolEig * scale);
}

TEST_CASE("eig_general reports defective eigenvalues with multiplicity") {
  CMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  auto pairs = eig_general(j);
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].value - 1.0) < 1e-7);
  CHECK(std::abs(pairs[1].value - 1.0) < 1e-7);
}

TEST_CASE("eig residuals and conjugate-transpose spectra") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.next_u64() % 6);
    CMatrix m = random_matrix(rng, n);
    const double scale = spectral_norm(m);
    auto pairs = eig_general(m);
    for (const EigPair& p : pairs)
      CHECK((m * p.vector - p.value * p.vector).norm() <= 100 * kTolEig * scale);

    auto adj = eig_general(CMatrix(m.adjoint()));
    // conjugated eigenvalues of the adjoint match the original multiset
    std::vector<bool> used(pairs.size(), false);
    for (const EigPair& pa : adj) {
      double best = 1e300;
      std::size_t bi = 0;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (used[i]) continue;
        const double d = std::abs(std::conj(pa.value) - pairs[i].value);
        if (d < best) {
          best = d;
          bi = i;
        }
      }
      used[bi] = true;
      CHECK(best <= 1e-8 * (1.0 + scale));
    }
  }
}

TEST_CASE("psd_factor zero, identity, rank-1") {
  CMatrix g0 = psd_factor(CMatrix::Zero(3, 3), 1e-13);
  CHECK(g0.rows() == 0);

  CMatrix gi = psd_factor(CMatrix::Identity(3, 3), 1e-13);
  CHECK(gi.rows() == 3);
  CHECK(spectral_norm(CMatrix(gi.adjoint() * gi - CMatrix::Identity(3, 3))) <
        1e-12);

  // rank-1 outer product: the factor must be a single row proportional to v*
  Rng rng(3);
  CVector v(4);
  for (Index i = 0; i < 4; ++i) v(i) = rng.cnormal();
  CMatrix m = v * v.adjoint();
  CMatrix g = psd_factor(m, 1e-12);
  REQUIRE(g.rows() == 1);
  CHECK(spectral_norm(CMatrix(g.adjoint() * g - m)) <= 1e-12 * v.squaredNorm());
  // proportionality: row parallel to v^*
  const Complex ratio = g(0, 0) / std::conj(v(0));
  for (Index i = 1; i < 4; ++i)
    CHECK(std::abs(g(0, i) / std::conj(v(i)) - ratio) < 1e-10 * std::abs(ratio));
}

TEST_CASE("psd_factor round trip on random psd inputs") {
  Rng rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 63);
    const Index rank = 1 + static_cast<Index>(rng.next_u64() % n);
    CMatrix m = random_psd(rng, n, rank);
    m = 0.5 * (m + m.adjoint()).eval();
    const double norm = spectral_norm(m);
    CMatrix g = psd_factor(m, 1e-13 * std::max(1.0, norm));
    CHECK(spectral_norm(CMatrix(m - g.adjoint() * g)) / norm <= 1e-10);
  }
}

TEST_CASE("psd_factor rejects indefinite input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  CHECK_THROWS_WITH_AS(psd_factor(m, 1e-10),
                       doctest::Contains("NotPositiveSemidefinite"),
                       numeric_error);
}
