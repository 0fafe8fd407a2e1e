#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rankcorr/copula.hpp"
#include "rankcorr/linalg.hpp"
#include "rankcorr/random.hpp"
#include "rankcorr/rank_estimators.hpp"
#include "test_support.hpp"

using namespace rankcorr;
using Catch::Approx;
using testing_support::Gen;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Philox4x32Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Philox4x32Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream is random access and well scaled") {
  const NormalStream s(42);
  const NormalStream again(42);
  const NormalStream other(43);
  CHECK(s[12345] == again[12345]);
  CHECK(s[12345] != other[12345]);
  const std::size_t n = 200000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = s[i];
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) <= 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sq / n - 1.0) <= 5.0 / std::sqrt(static_cast<double>(n)));
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const auto u = s.uniforms(c);
    CHECK((u[0] > 0.0 && u[0] < 1.0 && u[1] > 0.0 && u[1] < 1.0));
  }
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}

TEST_CASE("zeta and bandable constants") {
  CHECK(riemann_zeta(2.0) == Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-13));
  CHECK(riemann_zeta(4.0) == Approx(std::pow(std::numbers::pi, 4) / 90.0).epsilon(1e-13));
  CHECK(riemann_zeta(1.5) == Approx(2.612375348685488).epsilon(1e-12));
  const double c = bandable_c_max(1.0);
  CHECK(2.0 * c * riemann_zeta(2.0) < 1.0);
  CHECK(bandable_m0(1.0, 0.3) == Approx(0.6));
  CHECK(bandable_m1(1.0, 0.3) == Approx(1.0 + 0.6 * riemann_zeta(2.0)));
}

TEST_CASE("realize_sigma families") {
  CHECK(realize_sigma(SigmaModel::compound(4, 0.0)) == CorrMatrix::identity(4));
  const auto ar = realize_sigma(SigmaModel::ar1(3, 0.5));
  CHECK(ar.sym() == SymMatrix::from_rows({{1, .5, .25}, {.5, 1, .5}, {.25, .5, 1}}));

  const auto band = realize_sigma(SigmaModel::bandable(4, 1.0, 0.25));
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 4; ++k)
      if (j != k) CHECK(band(j, k) == Approx(0.25 / std::pow(std::abs(double(j) - double(k)), 2.0)));

  CHECK_THROWS_AS(realize_sigma(SigmaModel::ar1(3, 1.0)), Error);
  CHECK_THROWS_AS(realize_sigma(SigmaModel::compound(4, -0.5)), Error);
  CHECK_THROWS_AS(realize_sigma(SigmaModel::bandable(4, 1.0, 1.0)), Error);
  CHECK_THROWS_AS(realize_sigma(SigmaModel::spiked(4, 1.0, 5)), Error);
}

TEST_CASE("bandable tail condition with M0") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (std::size_t d : {4u, 20u, 64u}) {
      const double c = alpha == 1.0 && d == 4 ? 0.25 : bandable_c_max(alpha);
      const auto sigma = realize_sigma(SigmaModel::bandable(d, alpha, c));
      const double m0 = bandable_m0(alpha, c);
      for (std::size_t k = 1; k < d; ++k) {
        double worst = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          double tail = 0.0;
          for (std::size_t i = 0; i < d; ++i)
            if (std::max(i, j) - std::min(i, j) > k) tail += std::abs(sigma(i, j));
          worst = std::max(worst, tail);
        }
        CHECK(worst <= m0 * std::pow(static_cast<double>(k), -alpha));
      }
      CHECK(spectral_norm(sigma) <= bandable_m1(alpha, c));
      CHECK(eigenvalues(sigma).back() > 0.0);
    }
  }
}

TEST_CASE("spiked family: block structure, leading vector and eigengap") {
  const auto model = SigmaModel::spiked(10, 2.0, 3);
  const auto sigma = realize_sigma(model);
  CHECK(sigma(0, 1) == Approx(0.4).epsilon(1e-15));
  CHECK(sigma(0, 5) == 0.0);
  const auto eig = eig_sym(sigma);
  CHECK(eig.values[0] == Approx(1.8).epsilon(1e-13));
  CHECK(population_eigengap(sigma) == Approx(0.8).epsilon(1e-12));
  CHECK(sin_angle(eig.vector(0), spiked_direction(model)) <= 1e-12);
}

TEST_CASE("transforms are strictly increasing and preserve ranks") {
  for (Transform t : {Transform::Identity, Transform::Cube, Transform::ExpShift, Transform::LogitIsh}) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = -4000; i <= 4000; ++i) {
      const double v = apply_transform(t, i / 500.0);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(parse_transform(transform_name(t)) == t);
  }
  const auto x = DataMatrix::from_rows({{-1, 0.5}, {0, 1.5}, {2, -3}});
  CHECK(apply_transforms(x, TransformSet::uniform(2, Transform::Identity)) == x);
  const auto cubed = apply_transforms(x, TransformSet::uniform(2, Transform::Cube));
  CHECK(cubed(0, 0) == -1.0);
  CHECK(cubed(1, 0) == 0.0);
  CHECK(cubed(2, 0) == 8.0);

  Gen g(31);
  for (int t = 0; t < 20; ++t) {
    const auto data = testing_support::random_data(g, 50, 4);
    const auto set = TransformSet::cycle(4, {Transform::Cube, Transform::ExpShift, Transform::LogitIsh});
    const auto a = column_ranks(data);
    const auto b = column_ranks(apply_transforms(data, set));
    CHECK(a.rank == b.rank);
  }
  CHECK_THROWS_AS(apply_transforms(x, TransformSet::uniform(3, Transform::Cube)), Error);
}

TEST_CASE("sample_latent moments and determinism") {
  const std::size_t n = 20000;
  const auto x = sample_latent(CorrMatrix::identity(4), n, 7);
  for (std::size_t j = 0; j < 4; ++j) {
    double s = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += x(i, j);
      sq += x(i, j) * x(i, j);
    }
    CHECK(std::abs(s / n) <= 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(sq / n - 1.0) <= 5.0 / std::sqrt(double(n)));
  }
  CHECK(sample_latent(CorrMatrix::identity(4), 500, 7) == sample_latent(CorrMatrix::identity(4), 500, 7));
  CHECK(!(sample_latent(CorrMatrix::identity(4), 500, 7) == sample_latent(CorrMatrix::identity(4), 500, 8)));

  const auto one = sample_latent(CorrMatrix::identity(1), 100, 99);
  const NormalStream stream(99);
  for (std::size_t i = 0; i < 100; ++i) CHECK(one(i, 0) == stream[i]);
}

TEST_CASE("sample_latent reproduces the target correlation") {
  const std::size_t n = 100000;
  const double r = 0.9;
  const auto x = sample_latent(realize_sigma(SigmaModel::compound(2, r)), n, 2024);
  const auto s = oracle_sample_corr(x);
  const double corr = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
  CHECK(std::abs(corr - r) <= 3.0 * (1.0 - r * r) / std::sqrt(double(n)));
  CHECK(std::abs(corr - r) <= 0.01);
}

TEST_CASE("sample_latent does not depend on thread count") {
  const auto sigma = realize_sigma(SigmaModel::ar1(6, 0.7));
  set_thread_count(1);
  const auto a = sample_latent(sigma, 3000, 5);
  set_thread_count(4);
  const auto b = sample_latent(sigma, 3000, 5);
  set_thread_count(0);
  CHECK(a == b);
}

TEST_CASE("psd guard") {
  const auto bad = SymMatrix::from_rows({{1, 0.9, -0.9}, {0.9, 1, 0.9}, {-0.9, 0.9, 1}});
  CHECK_THROWS_AS(require_psd(bad), Error);
  CHECK_THROWS_AS(psd_sqrt(bad), Error);
}
