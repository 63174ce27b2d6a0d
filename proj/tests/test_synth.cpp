#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "evidloss/synth.hpp"

using namespace evidloss;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "evidloss_synth_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t count(const std::vector<LabeledPoint>& pts, PointRole role) {
  std::size_t n = 0;
  for (const auto& p : pts) n += p.role == role;
  return n;
}

}  // namespace

TEST(Synth, DefaultCountsMatchArithmetic) {
  const auto spec = SyntheticDatasetSpec::default_spec();
  const auto split = generate(spec);
  const auto c = expected_counts(spec);
  EXPECT_EQ(c.id_train, 3 * 280);
  EXPECT_EQ(c.id_val, 3 * 60);
  EXPECT_EQ(c.id_test, 3 * 60);
  EXPECT_EQ(c.pseudo_train + c.pseudo_val, spec.n_pseudo_ood);
  EXPECT_EQ(count(split.train, PointRole::kInDistribution), std::size_t(c.id_train));
  EXPECT_EQ(count(split.val, PointRole::kInDistribution), std::size_t(c.id_val));
  EXPECT_EQ(count(split.test, PointRole::kInDistribution), std::size_t(c.id_test));
  EXPECT_EQ(count(split.train, PointRole::kPseudoOod), std::size_t(c.pseudo_train));
  EXPECT_EQ(count(split.val, PointRole::kPseudoOod), std::size_t(c.pseudo_val));
  EXPECT_EQ(count(split.test, PointRole::kTrueOod), std::size_t(spec.n_true_ood));
  // split principle
  EXPECT_EQ(count(split.test, PointRole::kPseudoOod), 0u);
  EXPECT_EQ(count(split.train, PointRole::kTrueOod) + count(split.val, PointRole::kTrueOod), 0u);
}

TEST(Synth, DefaultGeometry) {
  const auto spec = SyntheticDatasetSpec::default_spec();
  ASSERT_EQ(spec.classes(), 3u);
  for (const auto& m : spec.class_means) EXPECT_NEAR(std::hypot(m[0], m[1]), 4.0, 1e-12);
  EXPECT_EQ(spec.true_ood_mean, (Point2{8.0, 8.0}));
  EXPECT_EQ(spec.pseudo_ood_mean, (Point2{0.0, 0.0}));
}

TEST(Synth, LabelIffId) {
  const auto split = generate(SyntheticDatasetSpec::default_spec(3));
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (const auto& p : *part) EXPECT_EQ(p.label >= 0, p.role == PointRole::kInDistribution);
  }
}

TEST(Synth, NoTrueOodMeansIdOnlyTest) {
  auto spec = SyntheticDatasetSpec::default_spec();
  spec.n_true_ood = 0;
  const auto split = generate(spec);
  for (const auto& p : split.test) EXPECT_EQ(p.role, PointRole::kInDistribution);
}

TEST(Synth, Deterministic) {
  EXPECT_EQ(generate(SyntheticDatasetSpec::default_spec(5)), generate(SyntheticDatasetSpec::default_spec(5)));
  EXPECT_NE(generate(SyntheticDatasetSpec::default_spec(5)), generate(SyntheticDatasetSpec::default_spec(6)));
}

TEST(Synth, SampleMeansAndCorrelation) {
  auto spec = SyntheticDatasetSpec::default_spec();
  spec.n_id_per_class = 20000;
  spec.class_covariances[1] = {2.0, 0.8, 0.8, 1.0};
  const auto split = generate(spec);
  for (std::size_t k = 0; k < 3; ++k) {
    double sx = 0, sy = 0, sxy = 0, n = 0;
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      for (const auto& p : *part) {
        if (p.label != int(k)) continue;
        sx += p.x[0];
        sy += p.x[1];
        n += 1;
      }
    }
    const double mx = sx / n, my = sy / n;
    const auto& cov = spec.class_covariances[k];
    EXPECT_LE(std::abs(mx - spec.class_means[k][0]), 3 * std::sqrt(cov[0] / n));
    EXPECT_LE(std::abs(my - spec.class_means[k][1]), 3 * std::sqrt(cov[3] / n));
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      for (const auto& p : *part) {
        if (p.label == int(k)) sxy += (p.x[0] - mx) * (p.x[1] - my);
      }
    }
    EXPECT_NEAR(sxy / (n - 1), cov[1], 0.05);
  }
}

TEST(Synth, RejectsBadSpecs) {
  auto spec = SyntheticDatasetSpec::default_spec();
  spec.class_covariances[0] = {1.0, 2.0, 2.0, 1.0};  // indefinite
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SyntheticDatasetSpec::default_spec();
  spec.class_covariances[2] = {1.0, 0.5, 0.0, 1.0};  // asymmetric
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SyntheticDatasetSpec::default_spec();
  spec.class_means.resize(1);
  spec.class_covariances.resize(1);
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SyntheticDatasetSpec::default_spec();
  spec.true_ood_mean = spec.pseudo_ood_mean;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(SynthCsv, RoundTrip) {
  const auto split = generate(SyntheticDatasetSpec::default_spec());
  const auto path = temp_file("roundtrip.csv");
  write_csv(split, path);
  EXPECT_EQ(read_csv(path), split);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x1,x2,label,role,split");
}

TEST(SynthCsv, FourColumnFormGoesToTest) {
  const auto path = temp_file("four.csv");
  write(path, "x1,x2,label,role\n0.5,1.5,0,id\n8,8,-1,true_ood\n");
  const auto s = read_csv(path);
  EXPECT_TRUE(s.train.empty());
  ASSERT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.test[1].role, PointRole::kTrueOod);
}

TEST(SynthCsv, ErrorsNameTheLine) {
  const auto path = temp_file("bad.csv");
  write(path, "x1,x2,label,role,split\n0,0,1,id,train\n0,0,-1,alien,test\n");
  try {
    read_csv(path);
    FAIL();
  } catch (const DataFormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("alien"), std::string::npos);
  }
  write(path, "");
  EXPECT_THROW(read_csv(path), DataFormatError);
  write(path, "x1,x2,label,role,split\n");
  EXPECT_THROW(read_csv(path), DataFormatError);
  write(path, "x1,x2,label,role,split\n1,2,0,pseudo_ood,train\n");
  EXPECT_THROW(read_csv(path), DataFormatError);
  write(path, "x1,x2,label,role,split\n1,2,-1,true_ood,train\n");
  EXPECT_THROW(read_csv(path), DataFormatError);
  write(path, "x1,x2,label,role,split\n1,abc,0,id,train\n");
  EXPECT_THROW(read_csv(path), DataFormatError);
  EXPECT_THROW(read_csv(temp_file("missing.csv")), DataFormatError);
}
