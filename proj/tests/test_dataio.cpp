#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gen.hpp"
#include "ghosttrack/error.hpp"
#include "ghosttrack/io.hpp"
#include "ghosttrack/sequence.hpp"

using namespace ghosttrack;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("ghosttrack_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir;
};

using Io = TempDir;

long parse_error_line(auto&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_F(Io, GroundTruthLine) {
  const GtRecord g = read_mot_gt(write("gt.txt", "1,3,10,20,30,60,1,1,0.5\n"));
  ASSERT_EQ(g.at(1).size(), 1u);
  const GtBox& b = g.at(1)[0];
  EXPECT_EQ(b.id, 3);
  EXPECT_DOUBLE_EQ(b.box.cx, 25);
  EXPECT_DOUBLE_EQ(b.box.cy, 50);
  EXPECT_DOUBLE_EQ(b.box.height, 60);
  EXPECT_DOUBLE_EQ(b.box.aspect, 0.5);
  EXPECT_DOUBLE_EQ(b.visibility, 0.5);
}

TEST_F(Io, GroundTruthFiltersNonPedestrians) {
  const fs::path p = write("gt.txt", "1,1,0,0,10,20,1,1,1\n1,2,0,0,10,20,0,1,1\n1,3,0,0,10,20,1,2,1\n\n2,4,0,0,10,20\n");
  const GtRecord g = read_mot_gt(p);
  ASSERT_EQ(g.at(1).size(), 1u);
  EXPECT_EQ(g.at(1)[0].id, 1);
  EXPECT_EQ(g.at(2)[0].visibility, 1.0);
  EXPECT_EQ(read_mot_gt(p, false).at(1).size(), 3u);
}

TEST_F(Io, GroundTruthErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line([&] { read_mot_gt(write("a.txt", "1,1,0,0,10,20\n1,1,0,0,x,20\n")); }), 2);
  EXPECT_EQ(parse_error_line([&] { read_mot_gt(write("b.txt", "1,1,0,0,10\n")); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_mot_gt(write("c.txt", "0,1,0,0,10,20\n")); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_mot_gt(write("d.txt", "1,1,0,0,-10,20\n")); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_mot_gt(write("e.txt", "1,1,0,0,10,20,1,1,1.5\n")); }), 1);
  EXPECT_THROW(read_mot_gt(dir / "missing.txt"), IoError);
}

TEST_F(Io, DetectionConfidenceFilter) {
  const fs::path p = write("det.txt", "1,-1,0,0,10,20,0.9\n1,-1,5,5,10,20,0.2,-1,-1,-1\n2,-1,0,0,10,20,0.5\n");
  EXPECT_EQ(read_mot_det(p).at(1).size(), 2u);
  const DetectionRecord d = read_mot_det(p, 0.5);
  EXPECT_EQ(d.at(1).size(), 1u);
  EXPECT_EQ(d.at(2).size(), 1u);
  DetectionRecord all = read_mot_det(p);
  filter_confidence(all, 0.6);
  EXPECT_EQ(all.size(), 1u);
}

TEST_F(Io, GroundTruthAndDetectionRoundTrip) {
  gt_test::Gen g(3);
  GtRecord gts;
  DetectionRecord dets;
  for (int f = 1; f <= 5; ++f)
    for (int i = 0; i < 3; ++i) {
      const auto q = [](double v) { return std::round(v * 100) / 100; };
      const BBox b = BBox::from_tlwh(q(g.uniform(0, 100)), q(g.uniform(0, 100)), q(g.uniform(5, 30)), q(g.uniform(20, 80)));
      gts[f].push_back(GtBox{f, i + 1, b, std::round(g.uniform(0, 1) * 1e6) / 1e6, 1});
      dets[f].push_back(DetRecord{f, b, 0.5, {}});
    }
  write_mot_gt(gts, dir / "gt.txt");
  write_mot_det(dets, dir / "det.txt");
  const GtRecord g2 = read_mot_gt(dir / "gt.txt");
  const DetectionRecord d2 = read_mot_det(dir / "det.txt");
  for (int f = 1; f <= 5; ++f)
    for (int i = 0; i < 3; ++i) {
      const auto a = gts[f][i].box.tlwh(), b = g2.at(f)[i].box.tlwh(), c = d2.at(f)[i].box.tlwh();
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(a[j], b[j], 1e-9);
        EXPECT_NEAR(a[j], c[j], 1e-9);
      }
      EXPECT_DOUBLE_EQ(gts[f][i].visibility, g2.at(f)[i].visibility);
    }
  write_mot_gt(g2, dir / "gt2.txt");
  EXPECT_EQ(slurp(dir / "gt.txt"), slurp(dir / "gt2.txt"));
}

TEST_F(Io, HypothesesRoundTripExactly) {
  PredictionRecord p;
  p[1].push_back(PredEntry{1, 2, HypothesisSet{{BBox::from_tlwh(0.5, 1.25, 10, 20), BBox::from_tlwh(3, 4, 10, 20)}}, true, 0.125});
  p[1].push_back(PredEntry{1, 1, HypothesisSet{{BBox::from_tlwh(-2, 7.75, 16, 32)}}, false, 0.0625});
  p[4].push_back(PredEntry{4, 1, HypothesisSet{{BBox::from_tlwh(1.5, 2.5, 8, 16)}}, true, 0.25});
  write_hypotheses(p, dir / "a.hyp.jsonl");
  const PredictionRecord q = read_hypotheses(dir / "a.hyp.jsonl");
  PredictionRecord sorted = p;
  std::swap(sorted[1][0], sorted[1][1]);
  EXPECT_EQ(q, sorted);
  write_hypotheses(sorted, dir / "s.hyp.jsonl");
  write_hypotheses(q, dir / "b.hyp.jsonl");
  EXPECT_EQ(slurp(dir / "b.hyp.jsonl"), slurp(dir / "s.hyp.jsonl"));
  EXPECT_EQ(read_predictions(dir / "a.hyp.jsonl"), sorted);
}

TEST_F(Io, HypothesisLineFormat) {
  PredictionRecord p;
  p[3].push_back(PredEntry{3, 7, HypothesisSet{{BBox::from_tlwh(1, 2, 4, 8)}}, true, 0.5});
  write_hypotheses(p, dir / "h.jsonl");
  EXPECT_EQ(slurp(dir / "h.jsonl"), "{\"frame\":3,\"id\":7,\"occluded\":true,\"gamma\":0.5,\"hypotheses\":[[1.0,2.0,4.0,8.0]]}\n");
}

TEST_F(Io, TopOneTextMatchesFirstHypothesis) {
  gt_test::Gen g(4);
  PredictionRecord p;
  for (int f = 1; f <= 10; ++f)
    for (int id = 1; id <= 3; ++id) {
      HypothesisSet h;
      for (int i = 0; i < 4; ++i) h.boxes.push_back(g.box(300));
      p[f].push_back(PredEntry{f, id, h, g.chance(0.5), 0.1});
    }
  write_predictions(p, dir / "p.txt", dir / "p.hyp.jsonl");
  const PredictionRecord txt = read_predictions(dir / "p.txt");
  const PredictionRecord hyp = read_predictions(dir / "p.hyp.jsonl");
  ASSERT_EQ(txt.size(), hyp.size());
  for (const auto& [f, v] : txt)
    for (size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(v[i].id, hyp.at(f)[i].id);
      const auto a = v[i].hypotheses.top().tlwh(), b = hyp.at(f)[i].hypotheses.top().tlwh();
      for (int j = 0; j < 4; ++j) EXPECT_NEAR(a[j], b[j], 0.005 + 1e-9);
    }
}

TEST_F(Io, HypothesisErrors) {
  EXPECT_EQ(parse_error_line([&] { read_hypotheses(write("a.jsonl", "{\"frame\":1}\n")); }), 1);
  EXPECT_EQ(parse_error_line([&] {
              read_hypotheses(write("b.jsonl", "{\"frame\":1,\"id\":1,\"occluded\":false,\"gamma\":0.1,\"hypotheses\":[]}\n"));
            }),
            1);
  EXPECT_EQ(parse_error_line([&] {
              read_hypotheses(write("c.jsonl", "\n{\"frame\":1,\"id\":1,\"occluded\":false,\"gamma\":0.1,\"hypotheses\":[[0,0,0,1]]}\n"));
            }),
            2);
  EXPECT_EQ(parse_error_line([&] { read_hypotheses(write("d.jsonl", "not json\n")); }), 1);
}

TEST_F(Io, EmptyPredictionsWriteEmptyFiles) {
  write_predictions({}, dir / "e.txt", dir / "e.hyp.jsonl");
  EXPECT_EQ(slurp(dir / "e.txt"), "");
  EXPECT_EQ(slurp(dir / "e.hyp.jsonl"), "");
  EXPECT_TRUE(read_predictions(dir / "e.txt").empty());
}

TEST_F(Io, Warps) {
  const fs::path p = write("warps.txt", "2 1 0 5 0 1 0 0 0 1\n3  2 0 0 0 2 0 0 0 1\n");
  const WarpRecord w = read_warps(p);
  EXPECT_EQ(warp_for(w, 1), Warp::Identity());
  EXPECT_EQ(warp_for(w, 2)(0, 2), 5);
  EXPECT_EQ(warp_for(w, 3)(1, 1), 2);
  EXPECT_TRUE(read_warps(dir / "none.txt").empty());
  EXPECT_EQ(parse_error_line([&] { read_warps(write("s.txt", "1 0 0 0 0 0 0 0 0 1\n")); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_warps(write("d.txt", "1 1 0 0 0 1 0 0 0 1\n1 1 0 0 0 1 0 0 0 1\n")); }), 2);
  EXPECT_EQ(parse_error_line([&] { read_warps(write("n.txt", "1 1 0 0 0 1 0 0 0\n")); }), 1);

  WarpRecord ident;
  for (int f = 1; f <= 4; ++f) ident[f] = Warp::Identity();
  write_warps(ident, dir / "id.txt");
  const WarpRecord back = read_warps(dir / "id.txt");
  for (int f = 1; f <= 6; ++f) EXPECT_EQ(warp_for(back, f), warp_for({}, f));

  WarpRecord odd;
  odd[1] << 1.0 / 3, 0.1, 7.25, -0.2, 0.9, 1e-7, 1e-5, 2e-6, 1;
  write_warps(odd, dir / "odd.txt");
  EXPECT_EQ(read_warps(dir / "odd.txt").at(1), odd[1]);
}

TEST_F(Io, FeaturesAreNormalizedAndComplete) {
  DetectionRecord d = read_mot_det(write("det.txt", "1,-1,0,0,10,20,1\n1,-1,5,5,10,20,1\n2,-1,0,0,10,20,1\n"));
  read_features(write("f.txt", "1,0,2,3,4\n1,1,2,0,2\n2,0,2,-1,0\n"), d);
  EXPECT_FLOAT_EQ(d.at(1)[0].feature[0], 0.6f);
  EXPECT_FLOAT_EQ(d.at(1)[0].feature[1], 0.8f);
  EXPECT_FLOAT_EQ(d.at(1)[1].feature[1], 1.0f);
  EXPECT_FLOAT_EQ(d.at(2)[0].feature[0], -1.0f);

  DetectionRecord d2 = d;
  EXPECT_EQ(parse_error_line([&] { read_features(write("dup.txt", "1,0,2,3,4\n1,0,2,3,4\n"), d2); }), 2);
  EXPECT_EQ(parse_error_line([&] { read_features(write("len.txt", "1,0,3,3,4\n"), d2); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_features(write("ref.txt", "1,5,2,3,4\n"), d2); }), 1);
  EXPECT_EQ(parse_error_line([&] { read_features(write("zero.txt", "1,0,2,0,0\n"), d2); }), 1);
  EXPECT_THROW(read_features(write("few.txt", "1,0,2,3,4\n"), d2), std::runtime_error);

  write_features(d, dir / "out.txt");
  DetectionRecord d3 = read_mot_det(dir / "det.txt");
  read_features(dir / "out.txt", d3);
  for (const auto& [f, v] : d)
    for (size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i].feature, d3.at(f)[i].feature);
}

TEST_F(Io, PfmRoundTripAndLayout) {
  std::vector<float> v(12);
  for (int i = 0; i < 12; ++i) v[static_cast<size_t>(i)] = 1.5f + static_cast<float>(i) * 0.25f;
  const DepthField d(4, 3, v);
  write_pfm(d, dir / "d.pfm");
  const std::string raw = slurp(dir / "d.pfm");
  EXPECT_EQ(raw.substr(0, 12), "Pf\n4 3\n-1.0\n");
  ASSERT_EQ(raw.size(), 12 + 48u);
  float first_stored;
  std::memcpy(&first_stored, raw.data() + 12, 4);  // bottom row first
  EXPECT_EQ(first_stored, d.at(2, 0));
  const DepthField back = read_pfm(dir / "d.pfm", 9);
  EXPECT_EQ(back.frame_id(), 9);
  EXPECT_TRUE(std::equal(back.values().begin(), back.values().end(), d.values().begin()));

  std::string be = "Pf\n1 1\n1.0\n";
  const unsigned char two[4] = {0x40, 0x00, 0x00, 0x00};
  be.append(reinterpret_cast<const char*>(two), 4);
  EXPECT_EQ(read_pfm(write("be.pfm", be)).at(0, 0), 2.0f);

  EXPECT_THROW(read_pfm(write("pf.pfm", "PF\n1 1\n-1.0\n")), ParseError);
  EXPECT_THROW(read_pfm(write("t.pfm", "Pf\n2 2\n-1.0\nabc")), ParseError);
  EXPECT_THROW(read_pfm(write("z.pfm", "Pf\n1 1\n0\n1234")), ParseError);
}

TEST_F(Io, PgmRoundTrip) {
  const BinaryMask m(3, 2, {0, 1, 255, 0, 0, 7});
  write_pgm(m, dir / "m.pgm");
  EXPECT_EQ(slurp(dir / "m.pgm").substr(0, 11), "P5\n3 2\n255\n");
  const BinaryMask back = read_pgm(dir / "m.pgm");
  EXPECT_FALSE(back.at(0, 0));
  EXPECT_TRUE(back.at(0, 1));
  EXPECT_TRUE(back.at(1, 2));
  EXPECT_THROW(read_pgm(write("p2.pgm", "P2\n1 1\n255\n0")), ParseError);
}

TEST_F(Io, SequenceInfo) {
  fs::create_directories(dir / "seq");
  std::ofstream(dir / "seq" / "seqinfo.ini") << "[Sequence]\nname = walk\nimWidth=640\nimHeight=360\nseqLength=12\nframeRate=25\nfocal=420\n";
  const SequenceSource s = SequenceSource::open(dir / "seq");
  EXPECT_EQ(s.info.name, "walk");
  EXPECT_EQ(s.info.width, 640);
  EXPECT_EQ(s.info.length, 12);
  EXPECT_DOUBLE_EQ(s.info.fps, 25);
  EXPECT_DOUBLE_EQ(*s.info.focal, 420);
  EXPECT_EQ(s.depth, dir / "seq" / "depth");
  EXPECT_EQ(frame_filename(42, ".pfm"), "frame_000042.pfm");

  std::ofstream(dir / "seq" / "seqinfo.ini") << "[Sequence]\nname=walk\nimWidth=640\n";
  EXPECT_THROW(SequenceSource::open(dir / "seq"), ParseError);
  EXPECT_THROW(SequenceSource::open(dir / "nowhere"), IoError);
}
