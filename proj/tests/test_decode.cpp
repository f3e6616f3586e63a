#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "mbrdiv/decode.hpp"
#include "oracles.hpp"

using namespace mbrdiv;

TEST(MbrDecode, Examples) {
  const auto r = mbr_decode(ScoreMatrix::from_rows({{0.9, 0.8}, {0.1, 0.2}}));
  EXPECT_EQ(r.selected_index, 0u);
  EXPECT_NEAR(r.selected_score, 0.85, 1e-15);
  EXPECT_EQ(r.tie_count, 1u);

  const auto tie = mbr_decode(ScoreMatrix::from_rows({{0.4}, {0.4}}));
  EXPECT_EQ(tie.selected_index, 0u);
  EXPECT_EQ(tie.tie_count, 2u);

  EXPECT_EQ(mbr_decode(ScoreMatrix(1, 1, 3.0)).selected_index, 0u);
}

TEST(HumanSelect, Examples) {
  EXPECT_EQ(human_select({{0.1, 0.9, 0.3}, QualityKind::human}).selected_index, 1u);
  const auto eq = human_select({{2, 2, 2}, QualityKind::human});
  EXPECT_EQ(eq.selected_index, 0u);
  EXPECT_EQ(eq.tie_count, 3u);
  EXPECT_EQ(human_select({{-4}, QualityKind::human}).selected_index, 0u);
  EXPECT_THROW(human_select({}), ValidationError);
}

TEST(WeightedMbr, Examples) {
  const auto m = ScoreMatrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(weighted_mbr(m, std::vector<double>{1, 0}).selected_index, 0u);
  const auto r = weighted_mbr(m, std::vector<double>{1, 3});
  EXPECT_EQ(r.selected_index, 1u);
  EXPECT_DOUBLE_EQ(r.score_vector[0], 0.25);
  EXPECT_DOUBLE_EQ(r.score_vector[1], 0.75);
  EXPECT_THROW(weighted_mbr(m, std::vector<double>{1}), ValidationError);
  EXPECT_THROW(weighted_mbr(m, std::vector<double>{0, 0}), ValidationError);
}

TEST(WeightedMbr, UniformWeightsReproduceMbrExactly) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
    // Coarse integer entries make ties common.
    std::vector<double> v(r * c);
    for (auto& x : v) x = static_cast<double>(rng() % 3);
    const ScoreMatrix m(r, c, v);
    const auto a = mbr_decode(m);
    const auto b = weighted_mbr(m, std::vector<double>(c, 0.37));
    EXPECT_EQ(a.selected_index, b.selected_index);
    EXPECT_EQ(a.tie_count, b.tie_count);
    EXPECT_EQ(a.selected_score, b.selected_score);
  }
}

TEST(ImportanceWeights, Examples) {
  const std::vector<double> p{0.2, 0.3, 0.5};
  EXPECT_EQ(importance_weights(p, p), (std::vector<double>{1, 1, 1}));
  const auto w = importance_weights(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.75});
  EXPECT_DOUBLE_EQ(w[0], 2.0);
  EXPECT_DOUBLE_EQ(w[1], 2.0 / 3.0);
  EXPECT_THROW(importance_weights(std::vector<double>{0.5}, std::vector<double>{0.0}), ValidationError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.5}, std::vector<double>{-0.1}), ValidationError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}), ValidationError);
}

TEST(ImportanceWeights, UniformProposalReducesToModelWeighted) {
  // With a uniform proposal the ratios are proportional to P(y|x), so the
  // importance-weighted decision equals MBR weighted by P(y|x) directly.
  std::mt19937_64 rng(9);
  for (int k = 0; k < 100; ++k) {
    const std::size_t c = 2 + rng() % 6;
    const auto m = oracle::random_matrix(rng, 4, c, 0, 1);
    auto target = oracle::random_vector(rng, c, 0.01, 1);
    const double s = std::accumulate(target.begin(), target.end(), 0.0);
    for (auto& t : target) t /= s;
    const std::vector<double> uniform(c, 1.0 / static_cast<double>(c));
    const auto w = importance_weights(target, uniform);
    const auto a = weighted_mbr(m, w);
    const auto b = weighted_mbr(m, target);
    EXPECT_EQ(a.selected_index, b.selected_index);
    EXPECT_NEAR(a.selected_score, b.selected_score, 1e-12);
  }
}

TEST(Mambr, Examples) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_matrix(rng, 5, 4);
  const auto single = mambr_decode(std::vector<ScoreMatrix>{m});
  const auto ref = mbr_decode(m);
  EXPECT_EQ(single.selected_index, ref.selected_index);
  EXPECT_EQ(single.selected_score, ref.selected_score);
  const auto triple = mambr_decode(std::vector<ScoreMatrix>{m, m, m});
  EXPECT_EQ(triple.selected_index, ref.selected_index);
  EXPECT_EQ(triple.selected_score, ref.selected_score);

  const auto m1 = ScoreMatrix::from_rows({{1, 1}, {0, 0}});
  const auto m2 = ScoreMatrix::from_rows({{0, 0}, {1, 1}});
  const auto tie = mambr_decode(std::vector<ScoreMatrix>{m1, m2});
  EXPECT_EQ(tie.selected_index, 0u);
  EXPECT_EQ(tie.tie_count, 2u);
  EXPECT_DOUBLE_EQ(tie.selected_score, 0.5);
}

TEST(Mambr, Errors) {
  EXPECT_THROW(mambr_decode(std::vector<ScoreMatrix>{}), ValidationError);
  EXPECT_THROW(mambr_decode(std::vector<ScoreMatrix>{ScoreMatrix(2, 2, 0.0), ScoreMatrix(2, 3, 0.0)}),
               ValidationError);
}

TEST(DecodeProperties, ColumnPermutationInvariance) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    const std::size_t r = 1 + rng() % 7, c = 1 + rng() % 7;
    const auto m = oracle::random_matrix(rng, r, c);
    std::vector<std::size_t> perm(c);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(mbr_decode(m).selected_index, mbr_decode(m.select_columns(perm)).selected_index);
  }
}

TEST(DecodeProperties, BayesOptimalClassifierReduction) {
  // Columns are P(h | y), weights are P(y | x): the winning score is
  // max_h Σ_y P(h|y) P(y|x).
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const std::size_t nh = 2 + rng() % 5, ny = 1 + rng() % 6;
    oracle::Grid g(nh, std::vector<double>(ny));
    for (std::size_t j = 0; j < ny; ++j) {
      const auto col = oracle::random_vector(rng, nh, 0.01, 1);
      const double s = std::accumulate(col.begin(), col.end(), 0.0);
      for (std::size_t i = 0; i < nh; ++i) g[i][j] = col[i] / s;
    }
    auto prior = oracle::random_vector(rng, ny, 0.01, 1);
    const double s = std::accumulate(prior.begin(), prior.end(), 0.0);
    for (auto& p : prior) p /= s;

    double best = -1;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nh; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < ny; ++j) acc += g[i][j] * prior[j];
      if (acc > best) {
        best = acc;
        arg = i;
      }
    }
    const auto r = weighted_mbr(ScoreMatrix::from_rows(g), prior);
    EXPECT_EQ(r.selected_index, arg);
    EXPECT_NEAR(r.selected_score, best, 1e-12);
  }
}

TEST(DecodeProperties, GibbsSampledAverage) {
  // Pseudo-references drawn from P(y|x) with repetition; uniform-weight MBR
  // equals Σ_y (count_y / N) P(h|y).
  std::mt19937_64 rng(8);
  for (int k = 0; k < 100; ++k) {
    const std::size_t nh = 3, support = 4, draws = 50;
    oracle::Grid p_h_given_y(nh, std::vector<double>(support));
    for (std::size_t y = 0; y < support; ++y) {
      const auto col = oracle::random_vector(rng, nh, 0.01, 1);
      const double s = std::accumulate(col.begin(), col.end(), 0.0);
      for (std::size_t i = 0; i < nh; ++i) p_h_given_y[i][y] = col[i] / s;
    }
    std::discrete_distribution<std::size_t> p_y({0.1, 0.2, 0.3, 0.4});
    std::vector<std::size_t> counts(support, 0);
    oracle::Grid sampled(nh, std::vector<double>(draws));
    for (std::size_t d = 0; d < draws; ++d) {
      const std::size_t y = p_y(rng);
      ++counts[y];
      for (std::size_t i = 0; i < nh; ++i) sampled[i][d] = p_h_given_y[i][y];
    }
    std::vector<double> expected(nh, 0);
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t y = 0; y < support; ++y)
        expected[i] += static_cast<double>(counts[y]) / draws * p_h_given_y[i][y];
    const auto r = mbr_decode(ScoreMatrix::from_rows(sampled));
    for (std::size_t i = 0; i < nh; ++i) EXPECT_NEAR(r.score_vector[i], expected[i], 1e-12);
    EXPECT_EQ(r.selected_index, oracle::argmax(expected).index);
  }
}
