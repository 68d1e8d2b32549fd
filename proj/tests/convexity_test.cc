#include "hconv/convexity.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_maps.hpp"

namespace hconv {
namespace {

using testing::Diagonal;
using testing::PositiveQuadraticMap;
using testing::RankDeficientMap;
using testing::ShearParabolaMap;

const VectorXd kOrigin = VectorXd::Zero(2);
const NormSpace kE2 = NormSpace::Euclidean(2);
const NormSpace kSup(2, kInfinity);

TEST(EstimateRadius, PositiveQuadratic) {
  const RadiusBound b = EstimateRadius(PositiveQuadraticMap(), kOrigin, kE2);
  EXPECT_DOUBLE_EQ(b.c, 0.125);
  EXPECT_NEAR(b.lip, 0.2, 1e-12);
  EXPECT_TRUE(b.lip_exact);
  EXPECT_DOUBLE_EQ(b.mu, 2.0);
  EXPECT_TRUE(b.regularity.validated);
  const double term = 0.5 / (2.0 * 1.2);
  EXPECT_NEAR(b.eps0, 0.9 * std::min({1.0, b.delta_mu, term}), 1e-15);
  EXPECT_LE(b.eps0, 0.9 * term + 1e-15);
}

TEST(EstimateRadius, Identity) {
  const RadiusBound b = EstimateRadius(PolyMap::Identity(2), kOrigin, kE2);
  EXPECT_EQ(b.lip, 0.0);
  EXPECT_DOUBLE_EQ(b.delta_mu, 1.0);
  EXPECT_NEAR(b.eps0, 0.9 * 0.25, 1e-15);
}

TEST(EstimateRadius, Errors) {
  EXPECT_THROW(EstimateRadius(PolyMap::Identity(2), kOrigin, NormSpace(2, 4.0)),
               ConditionFails);
  EXPECT_THROW(EstimateRadius(PolyMap::Identity(2), kOrigin, kSup),
               ConditionFails);
  EXPECT_THROW(EstimateRadius(RankDeficientMap(), kOrigin, kE2), NotSurjective);
  RadiusOptions bad;
  bad.theta = 1.0;
  EXPECT_THROW(EstimateRadius(PolyMap::Identity(2), kOrigin, kE2, bad),
               DomainError);
}

// Oracle: for the identity and a target outside the unit ball the gap is the
// target's distance to the ball.
TEST(ImageGapBound, DistanceToBallForIdentity) {
  const Ball ball(kOrigin, 1.0, kE2);
  const GapBound g =
      ImageGapBound(PolyMap::Identity(2), ball, Eigen::Vector2d(2.0, 0.0));
  EXPECT_LE(g.lower_bound, 1.0);
  EXPECT_GE(g.lower_bound, 1.0 - 2 * g.cell_slack - 1e-3);
  EXPECT_GE(g.grid_minimum, 1.0);

  const GapBound inside =
      ImageGapBound(PolyMap::Identity(2), ball, Eigen::Vector2d(0.2, 0.1));
  EXPECT_LE(inside.lower_bound, 0.0);
}

TEST(CertifyConvexity, IdentityCertified) {
  CertifyOptions opt;
  opt.n_pairs = 500;
  const ConvexityCertificate c =
      CertifyConvexity(PolyMap::Identity(2), kOrigin, kE2, 0.5, opt);
  EXPECT_EQ(c.verdict(), Verdict::kCertified);
  EXPECT_LE(c.max_preimage_residual, 1e-15);
  EXPECT_EQ(c.max_norm_excess, 0.0);
  EXPECT_EQ(c.pairs_tested + c.pairs_skipped, 500);
}

TEST(CertifyConvexity, PositiveQuadraticInsideRadius) {
  const ConvexityCertificate c =
      CertifyConvexity(PositiveQuadraticMap(), kOrigin, kE2, 0.18);
  EXPECT_EQ(c.verdict(), Verdict::kCertified);
  EXPECT_LE(c.max_preimage_residual, 1e-8);
  EXPECT_LE(c.max_norm_excess, 1e-6);
}

TEST(CertifyConvexity, RankDeficientRefuted) {
  CertifyOptions opt;
  opt.n_pairs = 400;
  for (double eps : {0.1, 0.5, 1.0}) {
    const ConvexityCertificate c =
        CertifyConvexity(RankDeficientMap(), kOrigin, kE2, eps, opt);
    ASSERT_EQ(c.verdict(), Verdict::kRefuted) << "eps=" << eps;
    for (const NonconvexityWitness& w : c.witnesses) {
      EXPECT_GT(w.gap_lower_bound, 10 * w.cell_slack);
      // Image points lie on the parabola y2 = y1^2; the midpoint is above it.
      EXPECT_GT(w.ybar[1], w.ybar[0] * w.ybar[0]);
    }
  }
}

TEST(CertifyConvexity, ShearParabolaDependsOnNorm) {
  CertifyOptions opt;
  opt.n_pairs = 500;
  for (double eps : {0.1, 0.5, 1.0}) {
    EXPECT_EQ(CertifyConvexity(ShearParabolaMap(), kOrigin, kSup, eps, opt)
                  .verdict(),
              Verdict::kRefuted)
        << "eps=" << eps;
  }
  const RadiusBound b = EstimateRadius(ShearParabolaMap(), kOrigin, kE2);
  EXPECT_EQ(CertifyConvexity(ShearParabolaMap(), kOrigin, kE2, b.eps0, opt)
                .verdict(),
            Verdict::kCertified);
}

TEST(CertifyConvexity, HalvingEpsKeepsCertification) {
  CertifyOptions opt;
  opt.n_pairs = 500;
  for (double eps : {0.18, 0.1}) {
    ASSERT_EQ(CertifyConvexity(PositiveQuadraticMap(), kOrigin, kE2, eps, opt)
                  .verdict(),
              Verdict::kCertified);
    EXPECT_EQ(
        CertifyConvexity(PositiveQuadraticMap(), kOrigin, kE2, eps / 2, opt)
            .verdict(),
        Verdict::kCertified);
  }
}

TEST(CertifyConvexity, DeterministicAndMergeable) {
  CertifyOptions opt;
  opt.n_pairs = 200;
  std::vector<PairRecord> ra;
  std::vector<PairRecord> rb;
  const ConvexityCertificate a =
      CertifyConvexity(PositiveQuadraticMap(), kOrigin, kE2, 0.15, opt, &ra);
  const ConvexityCertificate b =
      CertifyConvexity(PositiveQuadraticMap(), kOrigin, kE2, 0.15, opt, &rb);
  EXPECT_EQ(a.max_preimage_residual, b.max_preimage_residual);
  EXPECT_EQ(a.max_norm_excess, b.max_norm_excess);
  ASSERT_EQ(ra.size(), rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].x1, rb[i].x1);
    EXPECT_EQ(ra[i].residual, rb[i].residual);
  }

  ConvexityCertificate merged = a;
  const ConvexityCertificate refuted =
      CertifyConvexity(RankDeficientMap(), kOrigin, kE2, 0.5, opt);
  merged.Merge(refuted);
  EXPECT_EQ(merged.pairs_tested, a.pairs_tested + refuted.pairs_tested);
  EXPECT_EQ(merged.max_preimage_residual, refuted.max_preimage_residual);
  EXPECT_EQ(merged.witnesses.size(), refuted.witnesses.size());
  EXPECT_EQ(merged.verdict(), Verdict::kRefuted);
}

TEST(CertifyConvexity, Errors) {
  EXPECT_THROW(CertifyConvexity(PolyMap::Identity(2), kOrigin, kE2, 0.0),
               EpsilonNonpositive);
  EXPECT_THROW(CertifyConvexity(PolyMap::Identity(2), VectorXd::Zero(3), kE2,
                                0.1),
               DimensionMismatch);
}

// Minimum of |f(x) - ybar| over a grid ten times finer than the certified one
// restricted to the ball. It bounds the true gap from above, so it must not
// fall below the reported lower bound.
double FineGridGap(const PolyMap& f, const Ball& ball, const VectorXd& ybar,
                   int per_axis) {
  double best = kInfinity;
  const double h = 2.0 * ball.radius / per_axis;
  for (int i = 0; i <= per_axis; ++i) {
    for (int j = 0; j <= per_axis; ++j) {
      const VectorXd x = ball.center + Eigen::Vector2d(-ball.radius + i * h,
                                                       -ball.radius + j * h);
      if (!ball.Contains(x)) continue;
      best = std::min(best, (f.Evaluate(x) - ybar).norm());
    }
  }
  return best;
}

TEST(FindNonconvexityWitness, RankDeficientMap) {
  const auto w = FindNonconvexityWitness(RankDeficientMap(), kOrigin, kE2, 0.5,
                                         200, 42);
  ASSERT_TRUE(w.has_value());
  // Every image point lies on the parabola; ybar = (0, s^2) with s^2 >= 0.25
  // is at distance s^2 from it.
  EXPECT_GT(w->gap_lower_bound, 0.2);
  const double fine =
      FineGridGap(RankDeficientMap(), Ball(kOrigin, 0.5, kE2), w->ybar, 2000);
  EXPECT_GE(fine, 0.5 * w->gap_lower_bound);
  EXPECT_GE(fine, w->gap_lower_bound);
}

// Under the sup norm the corners (-eps, eps), (eps, eps) give
// ybar = (0, eps + eps^2) while the image reaches only y2 = y1^2 + eps.
TEST(FindNonconvexityWitness, ShearParabolaSupNorm) {
  for (double eps : {0.1, 0.5, 1.0}) {
    const auto w =
        FindNonconvexityWitness(ShearParabolaMap(), kOrigin, kSup, eps, 200, 42);
    ASSERT_TRUE(w.has_value()) << "eps=" << eps;
    // Distance from the corner midpoint to the top edge of the image.
    const double corner_gap =
        eps * eps < 0.5 ? eps * eps : std::sqrt(eps * eps - 0.25);
    EXPECT_GT(w->gap_lower_bound, 0.5 * corner_gap) << "eps=" << eps;
    const double fine =
        FineGridGap(ShearParabolaMap(), Ball(kOrigin, eps, kSup), w->ybar, 2000);
    EXPECT_GE(fine, w->gap_lower_bound);
  }
}

TEST(FindNonconvexityWitness, NoneForConvexImages) {
  EXPECT_FALSE(FindNonconvexityWitness(PolyMap::Identity(2), kOrigin, kE2, 0.5,
                                       200, 42)
                   .has_value());
  EXPECT_FALSE(FindNonconvexityWitness(Diagonal(2, 0.5), kOrigin, kSup, 0.5,
                                       200, 42)
                   .has_value());
}

TEST(FindNonconvexityWitness, DimensionTooLarge) {
  EXPECT_THROW(FindNonconvexityWitness(PolyMap::Identity(4), VectorXd::Zero(4),
                                       NormSpace::Euclidean(4), 0.5, 10, 1),
               DimensionTooLarge);
}

TEST(BoundaryPreimageCheck, Examples) {
  EXPECT_TRUE(
      BoundaryPreimageCheck(PolyMap::Identity(2), kOrigin, kE2, 0.5, 200, 1)
          .passed);
  EXPECT_TRUE(
      BoundaryPreimageCheck(PositiveQuadraticMap(), kOrigin, kE2, 0.18, 200, 1)
          .passed);
  EXPECT_THROW(
      BoundaryPreimageCheck(RankDeficientMap(), kOrigin, kE2, 0.5, 10, 1),
      NotSurjective);
}

}  // namespace
}  // namespace hconv
