#include <gtest/gtest.h>

#include "zpfsim/lp.hpp"

using namespace zpfsim::lp;

TEST(Simplex, SmallMaximization) {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), value 36.
  Problem p;
  p.A.resize(3, 2);
  p.A << 1, 0, 0, 2, 3, 2;
  p.b = Eigen::Vector3d(4, 12, 18);
  p.c = Eigen::Vector2d(-3, -5);
  p.kinds.assign(3, RowKind::LessEqual);
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.x(0), 2.0, 1e-12);
  EXPECT_NEAR(r.x(1), 6.0, 1e-12);
  EXPECT_NEAR(r.objective, -36.0, 1e-12);
}

TEST(Simplex, EqualityAndGreaterRows) {
  // min x + 2y  s.t. x + y = 3, x >= 1, y >= 0.5 -> (2.5, 0.5), value 3.5.
  Problem p;
  p.A.resize(3, 2);
  p.A << 1, 1, 1, 0, 0, 1;
  p.b = Eigen::Vector3d(3, 1, 0.5);
  p.c = Eigen::Vector2d(1, 2);
  p.kinds = {RowKind::Equal, RowKind::GreaterEqual, RowKind::GreaterEqual};
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 3.5, 1e-12);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  Problem inf;
  inf.A.resize(2, 1);
  inf.A << 1, 1;
  inf.b = Eigen::Vector2d(1, 2);
  inf.c = Eigen::VectorXd::Ones(1);
  inf.kinds = {RowKind::LessEqual, RowKind::GreaterEqual};
  EXPECT_EQ(solve(inf).status, Status::Infeasible);

  Problem unb;
  unb.A.resize(1, 2);
  unb.A << 1, -1;
  unb.b = Eigen::VectorXd::Ones(1);
  unb.c = Eigen::Vector2d(-1, 0);
  unb.kinds = {RowKind::LessEqual};
  EXPECT_EQ(solve(unb).status, Status::Unbounded);
}

TEST(Simplex, NegativeRightHandSide) {
  // min x s.t. -x <= -2 (x >= 2).
  Problem p;
  p.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.b = Eigen::VectorXd::Constant(1, -2.0);
  p.c = Eigen::VectorXd::Ones(1);
  p.kinds = {RowKind::LessEqual};
  const auto r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.x(0), 2.0, 1e-12);
}
