#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rankcorr/copula.hpp"
#include "rankcorr/eigen.hpp"
#include "rankcorr/linalg.hpp"
#include "rankcorr/rank_estimators.hpp"
#include "rankcorr/regularize.hpp"
#include "test_support.hpp"

using namespace rankcorr;
using Catch::Approx;
using testing_support::Gen;

namespace {

// Best |eigenvalue| over size-s supports, visiting subsets from the last
// index downwards.
double reversed_best(const SymMatrix& a, std::size_t s, std::vector<std::size_t>& arg) {
  double best = -1.0;
  std::vector<std::size_t> cur;
  const std::function<void(std::size_t)> walk = [&](std::size_t hi) {
    if (cur.size() == s) {
      std::vector<std::size_t> idx(cur.rbegin(), cur.rend());
      const auto v = eigenvalues(a.principal(idx));
      const double score = std::max(std::abs(v.front()), std::abs(v.back()));
      if (score >= best) {
        best = score;
        arg = idx;
      }
      return;
    }
    for (std::size_t j = hi; j-- > 0;) {
      cur.push_back(j);
      walk(j);
      cur.pop_back();
    }
  };
  walk(a.dim());
  return best;
}

}  // namespace

TEST_CASE("taper weights") {
  CHECK(taper_weight(4, 0) == 1.0);
  CHECK(taper_weight(4, 2) == 1.0);
  CHECK(taper_weight(4, 3) == 0.5);
  CHECK(taper_weight(4, 4) == 0.0);
  CHECK(taper_weight(5, 3) == Approx(0.8));
  CHECK(taper_weight(1, 0) == 1.0);
  CHECK(taper_weight(1, 1) == 0.0);
  CHECK_THROWS_AS(taper_weights(TaperSpec{0}, 3), Error);

  Gen g(1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + g.below(12), k = 1 + g.below(2 * d + 2);
    const SymMatrix a = testing_support::random_sym(g, d);
    const SymMatrix out = taper_estimate(a, TaperSpec{k});
    const SymMatrix w = taper_weights(TaperSpec{k}, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t dist = i > j ? i - j : j - i;
        CHECK(out(i, j) == w(i, j) * a(i, j));
        CHECK(w(i, j) >= 0.0);
        CHECK(w(i, j) <= 1.0);
        if (k == 1 && dist > 0) CHECK(out(i, j) == 0.0);
      }
    if (k >= 2 * d) CHECK(out == a);
  }
}

TEST_CASE("optimal bandwidth") {
  CHECK(optimal_bandwidth(1024, 64, 0.5) == 32);
  CHECK(optimal_bandwidth(1024, 2, 0.5) == 2);
  CHECK(optimal_bandwidth(59049, 100, 1.0) == 38);  // 59049^{1/3} = 38.9
  CHECK(optimal_bandwidth(10, 64, 1.0) == 2);
  CHECK(optimal_bandwidth(1000000, 7, 1.0) == 6);
  CHECK(optimal_bandwidth(50, 1, 1.0) == 1);
  for (std::size_t n : {10u, 300u, 9600u})
    for (std::size_t d : {2u, 3u, 17u, 64u}) {
      const auto k = optimal_bandwidth(n, d, 1.0);
      CHECK(k % 2 == 0);
      CHECK(k >= 2);
      CHECK(k <= d);
    }
  CHECK_THROWS_AS(optimal_bandwidth(100, 10, 0.0), Error);
}

TEST_CASE("taper bias on the bandable family") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const double c = bandable_c_max(alpha);
    const auto sigma = realize_sigma(SigmaModel::bandable(64, alpha, c));
    const double m0 = bandable_m0(alpha, c);
    for (std::size_t k : {2u, 4u, 8u, 16u, 32u}) {
      const double bias = spectral_norm(taper_estimate(sigma, TaperSpec{k}) - sigma.sym());
      CHECK(bias <= m0 * std::pow(k / 2.0, -alpha));
    }
  }
}

TEST_CASE("sparse PCA on small examples") {
  const auto diag = SymMatrix::from_rows({{1, 0, 0}, {0, 5, 0}, {0, 0, 1}});
  const auto r1 = sparse_pca(diag, 1);
  CHECK(r1.support == std::vector<std::size_t>{1});
  CHECK(r1.leading_value == 5.0);
  CHECK(std::abs(r1.leading_vector[1]) == 1.0);

  const auto neg = SymMatrix::from_rows({{-4, 0}, {0, 1}});
  CHECK(sparse_pca(neg, 1).leading_value == -4.0);

  Gen g(2);
  const auto a = testing_support::random_sym(g, 6);
  const auto full = sparse_pca(a, 6);
  CHECK(std::abs(full.leading_value) == Approx(spectral_norm(a)).epsilon(1e-12));
  double prev = 0.0;
  for (std::size_t s = 1; s <= 6; ++s) {
    const double v = std::abs(sparse_pca(a, s).leading_value);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  CHECK_THROWS_AS(sparse_pca(a, 7), Error);
  CHECK_THROWS_AS(sparse_pca(testing_support::random_sym(g, 80), 6, 1000), Error);
}

TEST_CASE("sparse PCA recovers the population spike") {
  const auto model = SigmaModel::spiked(12, 2.0, 3);
  const auto sigma = realize_sigma(model);
  const auto truth = spiked_direction(model);
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < truth.size(); ++j)
    if (truth[j] != 0.0) support.push_back(j);
  const auto res = sparse_pca(sigma.sym(), 3);
  CHECK(res.support == support);
  CHECK(sin_angle(res.leading_vector, truth) <= 1e-8);
  CHECK(res.leading_value == Approx(1.8).epsilon(1e-12));
}

TEST_CASE("sparse PCA agrees with reversed-order enumeration") {
  Gen g(3);
  for (int t = 0; t < 25; ++t) {
    const std::size_t d = 4 + g.below(6), s = 1 + g.below(4);
    const auto a = testing_support::random_sym(g, d);
    std::vector<std::size_t> arg;
    const double best = reversed_best(a, s, arg);
    const auto res = sparse_pca(a, s);
    CHECK(std::abs(res.leading_value) == Approx(best).epsilon(1e-13));
    const auto v = eigenvalues(a.principal(res.support));
    CHECK(std::max(std::abs(v.front()), std::abs(v.back())) == Approx(best).epsilon(1e-13));
  }
}

TEST_CASE("top-k projection distance") {
  const auto model = SigmaModel::spiked(10, 2.0, 3);
  const auto sigma = realize_sigma(model).sym();
  CHECK(pca_projections_compare(sigma, sigma, 1) <= 1e-12);
  const auto x = sample_latent(realize_sigma(model), 400, 4);
  const double dist = pca_projections_compare(sigma, sigma_hat_tau(kendall_tau_matrix(x)).sym(), 1);
  CHECK(dist > 0.0);
  CHECK(dist < 1.0);
  CHECK_THROWS_AS(pca_projections_compare(sigma, SymMatrix(3), 1), Error);
}
