#include "stainshift/color_math.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "oracles.hpp"
#include "test_util.hpp"
#include "stainshift/error.hpp"
#include "stainshift/random.hpp"

namespace stainshift {
namespace {

using testing::kind_of;

RgbTile random_tile(Rng& rng, int w, int h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return RgbTile(w, h, std::move(px));
}

StainMatrix identity_stains(int n) {
  StainColumns cols = StainColumns::Identity(3, n);
  std::vector<std::string> names{"a", "b", "c"};
  names.resize(n);
  return StainMatrix(cols, names);
}

TEST(RgbToOd, BackgroundHasZeroDensity) {
  const RgbTile tile(4, 3);
  const auto od = rgb_to_od(tile);
  for (double v : od.values()) EXPECT_EQ(v, 0.0);
}

TEST(RgbToOd, TenfoldAttenuationIsUnitDensity) {
  // (24 + 1) / (249 + 1) = 0.1
  RgbTile tile(1, 1, {24, 249, 249}, {249.0, 249.0, 249.0});
  const auto od = rgb_to_od(tile);
  EXPECT_NEAR(od.at(0, 0, 0), 1.0, 1e-15);
  EXPECT_EQ(od.at(0, 0, 1), 0.0);
}

TEST(RgbToOd, BrighterThanWhiteClampsToZero) {
  RgbTile tile(1, 1, {255, 255, 255}, {200.0, 200.0, 200.0});
  const auto od = rgb_to_od(tile);
  for (double v : od.values()) EXPECT_EQ(v, 0.0);
}

TEST(RgbTile, RejectsBadDimensionsAndWhitePoint) {
  EXPECT_EQ(kind_of([] { RgbTile(0, 4); }), ErrorKind::kInvalidDimensions);
  EXPECT_EQ(kind_of([] { RgbTile(4, 0); }), ErrorKind::kInvalidDimensions);
  EXPECT_EQ(kind_of([] { RgbTile(2, 2, WhitePoint{255.0, 0.0, 255.0}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { RgbTile(2, 2, WhitePoint{255.0, 256.0, 255.0}); }), ErrorKind::kInvalidArgument);
}

TEST(OdToRgb, ZeroDensityIsBackground) {
  const OdImage od(2, 2);
  const auto tile = od_to_rgb(od, kDefaultWhitePoint);
  for (auto p : tile.pixels()) EXPECT_EQ(p, 255);
}

TEST(OdToRgb, UnitDensityHandCheck) {
  // round(256 * 0.1 - 1) = round(24.6) = 25
  const OdImage od(1, 1, {1.0, 1.0, 1.0});
  const auto tile = od_to_rgb(od, kDefaultWhitePoint);
  EXPECT_EQ(tile.at(0, 0, 0), 25);
  EXPECT_EQ(tile.at(0, 0, 1), 25);
  EXPECT_EQ(tile.at(0, 0, 2), 25);
}

TEST(OdToRgb, ClampsOutOfRangeIntensities) {
  const OdImage od(1, 1, {-0.5, 10.0, 0.0});
  const auto tile = od_to_rgb(od, kDefaultWhitePoint);
  EXPECT_EQ(tile.at(0, 0, 0), 255);
  EXPECT_EQ(tile.at(0, 0, 1), 0);
  EXPECT_EQ(tile.white_point(), kDefaultWhitePoint);
}

TEST(OdToRgb, RejectsNonFinite) {
  OdImage od(1, 1);
  od.at(0, 0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { od_to_rgb(od, kDefaultWhitePoint); }), ErrorKind::kInvalidImage);
  od.at(0, 0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(kind_of([&] { od_to_rgb(od, kDefaultWhitePoint); }), ErrorKind::kInvalidImage);
}

TEST(OdRoundTrip, ExhaustiveChannelValues) {
  std::vector<std::uint8_t> px;
  for (int v = 0; v < 256; ++v) {
    px.insert(px.end(), {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(255 - v),
                         static_cast<std::uint8_t>((v * 7) % 256)});
  }
  const RgbTile tile(256, 1, px);
  const auto back = od_to_rgb(rgb_to_od(tile), tile.white_point());
  for (std::size_t i = 0; i < px.size(); ++i) {
    EXPECT_LE(std::abs(int(back.pixels()[i]) - int(px[i])), 1) << "index " << i;
  }
}

TEST(OdRoundTrip, RandomTilesWithinOneLevel) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto tile = random_tile(rng, 8, 8);
    const auto back = od_to_rgb(rgb_to_od(tile), tile.white_point());
    for (std::size_t i = 0; i < tile.pixels().size(); ++i) {
      ASSERT_LE(std::abs(int(back.pixels()[i]) - int(tile.pixels()[i])), 1);
    }
  }
}

TEST(StainMatrix, EnforcesInvariants) {
  StainColumns neg(3, 1);
  neg << 0.6, -0.8, 0.0;
  EXPECT_EQ(kind_of([&] { StainMatrix(neg, {"x"}); }), ErrorKind::kInvalidArgument);
  StainColumns unnormalized(3, 1);
  unnormalized << 1.0, 1.0, 0.0;
  EXPECT_EQ(kind_of([&] { StainMatrix(unnormalized, {"x"}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { StainMatrix(StainColumns(3, 0), {}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([&] { StainMatrix(StainColumns::Identity(3, 2), {"x"}); }),
            ErrorKind::kInvalidArgument);

  const auto m = StainMatrix::from_vectors(unnormalized, {"x"});
  EXPECT_NEAR(m.column(0).norm(), 1.0, 1e-15);
  EXPECT_EQ(m.index_of("x"), 0);
  EXPECT_FALSE(m.index_of("y").has_value());
}

TEST(DefaultProfile, ResidualIsNonNegativeUnitAndWellConditioned) {
  const auto p = default_her2_profile();
  EXPECT_EQ(p.stain_matrix.names(), kHer2StainNames);
  const auto r = p.stain_matrix.column(2);
  EXPECT_NEAR(r.norm(), 1.0, 1e-12);
  EXPECT_GE(r.minCoeff(), 0.0);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(p.stain_matrix.columns()));
  const auto s = svd.singularValues();
  EXPECT_LT(s.maxCoeff() / s.minCoeff(), 10.0);
}

TEST(PseudoInverse, IdentityIsItsOwnInverse) {
  const auto p = pseudo_inverse(identity_stains(3));
  EXPECT_LT((Eigen::MatrixXd(p) - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-15);
}

TEST(PseudoInverse, OrthonormalColumnsGiveTranspose) {
  const auto m = identity_stains(2);
  const Eigen::MatrixXd p = pseudo_inverse(m);
  EXPECT_LT((p - Eigen::MatrixXd(m.columns()).transpose()).norm(), 1e-15);
  EXPECT_LT((p * m.columns() - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(PseudoInverse, RandomMatricesSatisfyMoorePenroseAndMatchSvd) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    const auto m = oracle::random_full_rank_stains(rng, n);
    const Eigen::MatrixXd mm = m.columns();
    const Eigen::MatrixXd p = pseudo_inverse(m);
    EXPECT_LT(oracle::moore_penrose_violation(mm, p), 1e-8);
    EXPECT_LT((p - oracle::svd_pseudo_inverse(mm)).norm(), 1e-8);
    EXPECT_LT((p * mm - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-8);
  }
}

TEST(PseudoInverse, ParallelColumnsAreRankDeficient) {
  StainColumns cols(3, 2);
  cols.col(0) = Eigen::Vector3d(0.6, 0.7, 0.3).normalized();
  cols.col(1) = cols.col(0);
  EXPECT_EQ(kind_of([&] { pseudo_inverse(StainMatrix(cols, {"a", "b"})); }),
            ErrorKind::kRankDeficient);
}

TEST(PseudoInverse, CoplanarColumnsAreRankDeficient) {
  StainColumns cols(3, 3);
  cols.col(0) = Eigen::Vector3d(1, 0, 0);
  cols.col(1) = Eigen::Vector3d(0, 1, 0);
  cols.col(2) = Eigen::Vector3d(1, 1, 0).normalized();
  EXPECT_EQ(kind_of([&] { pseudo_inverse(StainMatrix(cols, {"a", "b", "c"})); }),
            ErrorKind::kRankDeficient);
}

TEST(Deconvolve, IdentityUnmixingCopiesChannels) {
  Rng rng(3);
  OdImage od(5, 4);
  for (double& v : od.values()) v = rng.uniform(0.0, 2.0);
  const auto c = deconvolve(od, identity_stains(3));
  for (std::size_t i = 0; i < od.values().size(); ++i) {
    EXPECT_EQ(c.values()[i], od.values()[i]);
  }
}

TEST(Deconvolve, RecoversForwardModelConcentrations) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const auto m = oracle::random_full_rank_stains(rng, n);
    ConcentrationMap truth(6, 6, n);
    for (double& v : truth.values()) v = rng.uniform(0.0, 1.5);
    const auto c = deconvolve(oracle::forward_model(m, truth), m);
    for (std::size_t i = 0; i < truth.pixel_count(); ++i) {
      double err = 0.0;
      for (int k = 0; k < n; ++k) err += std::pow(c.pixel(i)[k] - truth.pixel(i)[k], 2);
      ASSERT_LT(std::sqrt(err), 1e-6);
    }
  }
}

TEST(Deconvolve, ZeroDensityGivesZeroConcentration) {
  const auto c = deconvolve(OdImage(3, 3), default_her2_profile().stain_matrix);
  for (double v : c.values()) EXPECT_EQ(v, 0.0);
}

TEST(Deconvolve, KeepsNegativeConcentrations) {
  const auto m = default_her2_profile().stain_matrix;
  // Pure red-channel absorbance is not in the stain cone.
  const OdImage od(1, 1, {0.0, 1.0, 0.0});
  const auto c = deconvolve(od, m);
  double min = 0.0;
  for (double v : c.values()) min = std::min(min, v);
  EXPECT_LT(min, 0.0);
}

TEST(Recompose, ZeroAndIdentity) {
  const auto zero = recompose(ConcentrationMap(2, 2, 3), default_her2_profile().stain_matrix);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);

  ConcentrationMap c(2, 1, 3, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  const auto od = recompose(c, identity_stains(3));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(od.values()[i], c.values()[i]);
}

TEST(Recompose, InvertsDeconvolveForSquareMatrices) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_full_rank_stains(rng, 3);
    OdImage od(4, 4);
    for (double& v : od.values()) v = rng.uniform(0.0, 2.0);
    const auto back = recompose(deconvolve(od, m), m);
    for (std::size_t i = 0; i < od.values().size(); ++i) {
      ASSERT_NEAR(back.values()[i], od.values()[i], 1e-6);
    }
  }
}

TEST(Recompose, ChannelMismatchIsRejected) {
  EXPECT_EQ(kind_of([] { recompose(ConcentrationMap(2, 2, 2), default_her2_profile().stain_matrix); }),
            ErrorKind::kChannelMismatch);
}

TEST(LinearTransfer, SameProfileIsIdentityUpToQuantization) {
  Rng rng(17);
  const auto profile = default_her2_profile();
  for (int trial = 0; trial < 20; ++trial) {
    const auto tile = random_tile(rng, 8, 8);
    const auto out = linear_transfer(tile, profile, profile);
    for (std::size_t i = 0; i < tile.pixels().size(); ++i) {
      ASSERT_LE(std::abs(int(out.pixels()[i]) - int(tile.pixels()[i])), 1);
    }
  }
}

TEST(LinearTransfer, BackgroundStaysBackground) {
  auto source = default_her2_profile();
  auto target = source;
  target.white_point = {240.0, 250.0, 245.0};
  target.domain_id = "other";
  const RgbTile tile(6, 6);
  const auto out = linear_transfer(tile, source, target);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      EXPECT_EQ(out.at(x, y, 0), 240);
      EXPECT_EQ(out.at(x, y, 1), 250);
      EXPECT_EQ(out.at(x, y, 2), 245);
    }
}

TEST(LinearTransfer, PreservesConcentrationsBeforeQuantization) {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const ReferenceProfile a{"a", oracle::random_full_rank_stains(rng, 3), kDefaultWhitePoint, ""};
    const ReferenceProfile b{"b", oracle::random_full_rank_stains(rng, 3), kDefaultWhitePoint, ""};
    const auto tile = random_tile(rng, 8, 8);
    const auto source_c = deconvolve(rgb_to_od(tile), a.stain_matrix);
    const auto moved_c = deconvolve(linear_transfer_od(tile, a, b), b.stain_matrix);
    for (std::size_t i = 0; i < source_c.values().size(); ++i) {
      ASSERT_NEAR(moved_c.values()[i], source_c.values()[i], 1e-4);
    }
  }
}

TEST(LinearTransfer, IsDeterministic) {
  Rng rng(23);
  const auto tile = random_tile(rng, 16, 16);
  const auto a = default_her2_profile();
  ReferenceProfile b{"b", oracle::random_full_rank_stains(rng, 3), kDefaultWhitePoint, ""};
  EXPECT_EQ(linear_transfer(tile, a, b), linear_transfer(tile, a, b));
}

TEST(LinearTransfer, RankDeficientSourceIsRejected) {
  StainColumns cols(3, 2);
  cols.col(0) = Eigen::Vector3d(0.6, 0.7, 0.3).normalized();
  cols.col(1) = cols.col(0);
  const ReferenceProfile bad{"bad", StainMatrix(cols, {"a", "b"}), kDefaultWhitePoint, ""};
  EXPECT_EQ(kind_of([&] { linear_transfer(RgbTile(2, 2), bad, bad); }), ErrorKind::kRankDeficient);
}

}  // namespace
}  // namespace stainshift
