#include <cmath>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "ghosttrack/geometry.hpp"

using namespace ghosttrack;

TEST(Iou, IdenticalBoxes) {
  const BBox b{10, 10, 0.5, 20};
  EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
}

TEST(Iou, DisjointBoxes) { EXPECT_DOUBLE_EQ(iou(BBox{0, 0, 1, 1}, BBox{5, 5, 1, 1}), 0.0); }

TEST(Iou, HalfOffsetUnitSquares) {
  EXPECT_NEAR(iou(BBox{0.5, 0.5, 1, 1}, BBox{1.0, 0.5, 1, 1}), 1.0 / 3.0, 1e-15);
}

TEST(Iou, SymmetricAndBounded) {
  gt_test::Gen g(11);
  for (int i = 0; i < 1000; ++i) {
    const BBox a = g.box(50), b = g.box(50);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
  }
}

TEST(BBox, TlwhRoundTrip) {
  const BBox b = BBox::from_tlwh(10, 20, 30, 60);
  EXPECT_DOUBLE_EQ(b.cx, 25);
  EXPECT_DOUBLE_EQ(b.cy, 50);
  EXPECT_DOUBLE_EQ(b.aspect, 0.5);
  EXPECT_DOUBLE_EQ(b.height, 60);
  const auto t = b.tlwh();
  EXPECT_DOUBLE_EQ(t[0], 10);
  EXPECT_DOUBLE_EQ(t[1], 20);
  EXPECT_DOUBLE_EQ(t[2], 30);
  EXPECT_DOUBLE_EQ(t[3], 60);
}

TEST(BBox, Validity) {
  EXPECT_TRUE((BBox{0, 0, 0.5, 1}).valid());
  EXPECT_FALSE((BBox{0, 0, 0.5, 0}).valid());
  EXPECT_FALSE((BBox{0, 0, -1, 1}).valid());
  EXPECT_FALSE((BBox{NAN, 0, 0.5, 1}).valid());
}

TEST(Project, ReferenceExample) {
  const CameraModel cam{1000, 0, 0};
  const BBox b = project(Cylinder3D{1, 0, 10, 1.7, 0.4}, cam);
  EXPECT_NEAR(b.cx, 100, 1e-12);
  EXPECT_NEAR(b.cy, 0, 1e-12);
  EXPECT_NEAR(b.height, 170, 1e-12);
  EXPECT_NEAR(b.aspect, 0.4, 1e-15);
}

TEST(Project, OpticalAxisMapsToPrincipalPoint) {
  const CameraModel cam{800, 320, 240};
  for (double z : {0.5, 3.0, 40.0}) {
    const BBox b = project(Cylinder3D{0, 0, z, 1.7, 0.4}, cam);
    EXPECT_DOUBLE_EQ(b.cx, 320);
    EXPECT_DOUBLE_EQ(b.cy, 240);
  }
}

TEST(Project, DoublingDepthHalvesOffsetAndHeight) {
  const CameraModel cam{700, 100, 50};
  const BBox a = project(Cylinder3D{1.3, 0.2, 6, 1.8, 0.4}, cam);
  const BBox b = project(Cylinder3D{1.3, 0.2, 12, 1.8, 0.4}, cam);
  EXPECT_DOUBLE_EQ(b.cx - cam.px, 0.5 * (a.cx - cam.px));
  EXPECT_DOUBLE_EQ(b.height, 0.5 * a.height);
}

TEST(Project, RejectsNonpositiveDepth) {
  EXPECT_THROW(project(Cylinder3D{0, 0, 0, 1, 1}, CameraModel{}), std::invalid_argument);
  EXPECT_THROW(project(Cylinder3D{0, 0, -2, 1, 1}, CameraModel{}), std::invalid_argument);
}

TEST(Backproject, RecoversReferenceCylinder) {
  const CameraModel cam{1000, 0, 0};
  const Cylinder3D c = backproject(BBox{100, 0, 0.4, 170}, 0.1, cam);
  EXPECT_NEAR(c.x, 1, 1e-12);
  EXPECT_NEAR(c.y, 0, 1e-12);
  EXPECT_NEAR(c.z, 10, 1e-12);
  EXPECT_NEAR(c.height, 1.7, 1e-12);
  EXPECT_NEAR(c.aspect, 0.4, 1e-15);
}

TEST(Backproject, UnitInverseDepth) {
  const CameraModel cam{500, 320, 180};
  const Cylinder3D c = backproject(BBox{420, 180, 0.4, 50}, 1.0, cam);
  EXPECT_DOUBLE_EQ(c.z, 1.0);
  EXPECT_DOUBLE_EQ(c.x, 100.0 / 500.0);
}

TEST(Backproject, RejectsNonpositiveInverseDepth) {
  EXPECT_THROW(backproject(BBox{0, 0, 1, 1}, 0.0, CameraModel{}), std::invalid_argument);
}

TEST(Backproject, RandomRoundTrip) {
  gt_test::Gen g(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const CameraModel cam{g.uniform(200, 2000), g.uniform(0, 1000), g.uniform(0, 600)};
    const BBox b{g.uniform(-100, 1100), g.uniform(-100, 700), g.uniform(0.2, 1.0), g.uniform(5, 400)};
    const double gamma = g.uniform(0.01, 2.0);
    const BBox r = project(backproject(b, gamma, cam), cam);
    worst = std::max({worst, std::abs(r.cx - b.cx), std::abs(r.cy - b.cy), std::abs(r.height - b.height),
                      std::abs(r.aspect - b.aspect)});
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(CameraModel, ForImage) {
  const CameraModel c = CameraModel::for_image(640, 360);
  EXPECT_DOUBLE_EQ(c.focal, 640);
  EXPECT_DOUBLE_EQ(c.px, 320);
  EXPECT_DOUBLE_EQ(c.py, 180);
  EXPECT_DOUBLE_EQ(CameraModel::for_image(640, 360, 500).focal, 500);
}
