#include <doctest.h>

#include "corpus.hpp"
#include "specont/model.hpp"
#include "specont/operator_algebra.hpp"
#include "specont/rng.hpp"

using namespace specont;
using namespace specont::testing;

TEST_CASE("eval_density guards its domain") {
  auto model = scalar_model();
  CHECK_THROWS_WITH_AS(model->eval(Complex(1.0, 0.0)),
                       doctest::Contains("EndpointSingularity"), numeric_error);
  CHECK_THROWS_WITH_AS(model->eval(Complex(0.5, 0.0)),
                       doctest::Contains("OutsideHolomorphyDomain"),
                       numeric_error);
  CHECK_THROWS_WITH_AS(model->eval(Complex(2.0, 5.0)),
                       doctest::Contains("OutsideHolomorphyDomain"),
                       numeric_error);
  CHECK_NOTHROW(model->eval(Complex(2.0, 0.5)));
}

TEST_CASE("zero coupling gives the zero density") {
  auto model = zero_model();
  CHECK(spectral_norm(model->eval(Complex(2.0, 0.3))) == 0.0);
  CHECK(spectral_norm(model->eval(Complex(5.0, 0.0))) == 0.0);
}

TEST_CASE("density values on the interval are Hermitian PSD") {
  Rng rng(5);
  auto sep = random_separable(42, 4, 0.1);
  auto grid = schroedinger_small();
  for (int k = 0; k < 20; ++k) {
    const double mu = 1.0 + 0.05 + 4.0 * rng.uniform();
    for (const SpectralDensity* m :
         {static_cast<const SpectralDensity*>(sep.get()),
          static_cast<const SpectralDensity*>(grid.get())}) {
      CMatrix v = m->eval(Complex(mu, 0.0));
      CHECK(is_hermitian(v, 1e-13 * (1.0 + v.cwiseAbs().maxCoeff())));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (v + v.adjoint()));
      CHECK(es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + es.eigenvalues().maxCoeff()));
    }
  }
}

TEST_CASE("Schwarz reflection across the interval") {
  auto sep = random_separable(9, 3, 0.1);
  auto grid = schroedinger_small();
  Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    const Complex mu(1.2 + 3.0 * rng.uniform(), 0.02 + 0.6 * rng.uniform());
    for (const SpectralDensity* m :
         {static_cast<const SpectralDensity*>(sep.get()),
          static_cast<const SpectralDensity*>(grid.get())}) {
      if (!m->domain().contains_nonreal(mu)) continue;
      CMatrix up = m->eval(mu);
      CMatrix down = m->eval(std::conj(mu));
      const double scale = spectral_norm(up);
      CHECK(spectral_norm(CMatrix(up.adjoint() - down)) <=
            1e-12 * std::max(scale, 1e-30));
    }
  }
}

TEST_CASE("endpoint bound on a shrinking real sequence") {
  auto sep = scalar_model();
  auto grid = schroedinger_small();
  for (const SpectralDensity* m :
       {static_cast<const SpectralDensity*>(sep.get()),
        static_cast<const SpectralDensity*>(grid.get())}) {
    double offset = 0.5;
    for (int k = 0; k < 20; ++k) {
      const double mu = m->alpha0() + offset;
      const double bound = m->endpoint_constant() *
                           std::pow(offset, m->endpoint_exponent());
      CHECK(m->value_norm(Complex(mu, 0.0)) <= bound * (1.0 + 1e-9));
      offset *= 0.5;
    }
  }
}

TEST_CASE("grid model realizes the degenerate kernel") {
  auto grid = schroedinger_small();
  const Complex mu(2.4, 0.0);
  CMatrix v = grid->eval(mu);

  // rank <= 2
  Eigen::BDCSVD<CMatrix> svd(v);
  const auto& s = svd.singularValues();
  CHECK(s(0) > 0.0);
  for (Index i = 2; i < s.size(); ++i) CHECK(s(i) <= 1e-13 * s(0));

  // norm bound (2 pi)^{-1/2} (mu-lambda0)^{-1/2} |b+| |b-|, with
  // |b±| = |b| for real mu
  const double bnorm = grid->grid_norm_b();
  CHECK(grid->b_plus(mu).norm() == doctest::Approx(bnorm).epsilon(1e-12));
  CHECK(grid->b_minus(mu).norm() == doctest::Approx(bnorm).epsilon(1e-12));
  const double bound = bnorm * bnorm /
                       (std::sqrt(2.0 * 3.14159265358979) *
                        std::sqrt(mu.real() - grid->lambda0()));
  CHECK(spectral_norm(v) <= bound * (1.0 + 1e-12));
}

TEST_CASE("tilde_a1 is the coupling-corrected diagonal") {
  // a1 = 5, b = 0.5 on its support: diagonal entries 4.75 there
  ScalarProfile b;
  b.kind = ScalarProfile::Kind::constant;
  b.amplitude = 0.5;
  b.cutoff = 2.03;
  ScalarProfile a1;
  a1.kind = ScalarProfile::Kind::constant;
  a1.amplitude = 5.0;
  SchroedingerModel m(1.0, 10.0, 256, b, a1, 1.0, /*decay_c=*/10.0);
  const CMatrix& ta = m.tilde_a1();
  int on = 0, off = 0;
  for (Index i = 0; i < m.dim(); ++i) {
    const double x = m.grid()(i);
    if (std::abs(x) < 2.03) {
      CHECK(ta(i, i).real() == doctest::Approx(4.75));
      ++on;
    } else {
      CHECK(ta(i, i).real() == doctest::Approx(5.0));
      ++off;
    }
  }
  CHECK(on > 0);
  CHECK(off > 0);

  // b == 0 leaves tilde_a1 = a1
  auto z = zero_model(3);
  CHECK(spectral_norm(CMatrix(z->tilde_a1() -
                              z->tilde_a1().diagonal().asDiagonal().toDenseMatrix())) == 0.0);

  // range embedded above lambda0
  auto grid = schroedinger_small();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(grid->tilde_a1());
  CHECK(es.eigenvalues().minCoeff() > grid->lambda0());
}

TEST_CASE("model construction rejects bad data") {
  ScalarProfile b;
  b.kind = ScalarProfile::Kind::constant;
  b.amplitude = 0.5;
  ScalarProfile a1;
  a1.kind = ScalarProfile::Kind::constant;
  a1.amplitude = 5.0;
  // decay bound violated: constant b cannot satisfy |b| <= c e^{-|x|}
  CHECK_THROWS_AS(SchroedingerModel(1.0, 6.0, 32, b, a1, 1.0, 0.5),
                  numeric_error);
  // range of tilde_a1 dips below lambda0
  ScalarProfile a1_low;
  a1_low.kind = ScalarProfile::Kind::constant;
  a1_low.amplitude = 0.5;
  ScalarProfile b0;
  CHECK_THROWS_AS(SchroedingerModel(1.0, 6.0, 32, b0, a1_low, 1.0, 1.0),
                  numeric_error);
}

TEST_CASE("weighted sums agree with direct accumulation") {
  auto grid = schroedinger_small();
  Rng rng(31);
  std::vector<Complex> nodes, coefs;
  for (int j = 0; j < 24; ++j) {
    nodes.emplace_back(1.1 + 3.0 * rng.uniform(), 0.4 * rng.uniform() + 0.01);
    coefs.emplace_back(rng.normal(), rng.normal());
  }
  CMatrix fast = grid->weighted_sum(nodes, coefs);
  CMatrix slow = CMatrix::Zero(grid->dim(), grid->dim());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    slow += coefs[j] * grid->eval(nodes[j]);
  const double scale = spectral_norm(slow);
  CHECK(spectral_norm(CMatrix(fast - slow)) <= 1e-12 * scale);

  std::vector<Index> idx{3, 4, 5, 10, 17};
  CMatrix blk = grid->weighted_sum_block(nodes, coefs, idx);
  auto kern = grid->block_kernel(nodes, idx);
  CMatrix blk2 = kern->eval(coefs);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t c = 0; c < idx.size(); ++c) {
      CHECK(std::abs(blk(a, c) - slow(idx[a], idx[c])) <= 1e-12 * scale);
      CHECK(std::abs(blk2(a, c) - slow(idx[a], idx[c])) <= 1e-12 * scale);
    }
}

TEST_CASE("discretized full matrix: structure and Schur identity") {
  auto model = random_separable(77, 3, 0.1);
  DiscretizedFullMatrix dfm = build_discretized_full_matrix(*model, 30.0, 48);

  CHECK(is_hermitian(dfm.h, 1e-12 * dfm.h.cwiseAbs().maxCoeff()));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(dfm.h);
  CHECK(es.info() == Eigen::Success);  // real spectrum

  // Schur complement of the A0 block reproduces the discrete transfer
  // function, and its inverse is the lower-right resolvent block
  for (const Complex z : {Complex(1.0, 1.0), Complex(2.2, -0.7)}) {
    CMatrix m1 = dfm.m1_discrete(z);
    CMatrix sc = dfm.schur_complement(z);
    CHECK(spectral_norm(CMatrix(m1 - sc)) <= 1e-12 * spectral_norm(m1));

    const Index dim = dfm.h.rows();
    CMatrix res = (dfm.h - z * CMatrix::Identity(dim, dim)).partialPivLu()
                      .inverse();
    CMatrix r11 = res.bottomRightCorner(dfm.n, dfm.n);
    CMatrix m1_inv = m1.partialPivLu().inverse();
    CHECK(spectral_norm(CMatrix(m1_inv - r11)) <=
          1e-12 * spectral_norm(m1_inv));
  }
}

TEST_CASE("discretized full matrix: zero coupling and scalar case") {
  auto z = zero_model(2);
  DiscretizedFullMatrix dfm = build_discretized_full_matrix(*z, 20.0, 16);
  CHECK(dfm.dim0 == 0);
  const Complex s(1.5, 0.5);
  CHECK(spectral_norm(CMatrix(dfm.m1_discrete(s) -
                              (z->tilde_a1() - s * CMatrix::Identity(2, 2)))) ==
        0.0);

  auto scalar = scalar_model();
  DiscretizedFullMatrix d3 = build_discretized_full_matrix(*scalar, 20.0, 3);
  CHECK(d3.h.rows() == 4);  // 3 rank-1 nodes + the 1-dim H1 block
}
