#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evidloss {

using Point2 = std::array<double, 2>;
/// Row-major 2x2 matrix.
using Matrix2 = std::array<double, 4>;

enum class PointRole { kInDistribution, kPseudoOod, kTrueOod };

std::string role_token(PointRole role);
std::optional<PointRole> parse_role_token(const std::string& token);

struct LabeledPoint {
  Point2 x{};
  int label = -1;  // class index for ID points, -1 otherwise
  PointRole role = PointRole::kInDistribution;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Train and validation carry ID + pseudo-OOD; test carries ID + true-OOD.
struct DatasetSplit {
  std::vector<LabeledPoint> train;
  std::vector<LabeledPoint> val;
  std::vector<LabeledPoint> test;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

struct SyntheticDatasetSpec {
  int n_id_per_class = 400;
  int n_pseudo_ood = 300;
  int n_true_ood = 40;
  std::vector<Point2> class_means;
  std::vector<Matrix2> class_covariances;
  Point2 pseudo_ood_mean{0.0, 0.0};
  Matrix2 pseudo_ood_cov{1.0, 0.0, 0.0, 1.0};
  Point2 true_ood_mean{8.0, 8.0};
  Matrix2 true_ood_cov{1.0, 0.0, 0.0, 1.0};
  std::uint64_t seed = 7;

  /// Three classes on a radius-4 triangle, unit covariances, true-OOD at
  /// (8, 8). Pseudo-OOD is centred on the origin with standard deviation 8 so
  /// that it also covers the space around the classes, not only between them.
  static SyntheticDatasetSpec default_spec(std::uint64_t seed = 7);

  std::size_t classes() const { return class_means.size(); }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Counts produced by generate(): ID points are split 70/15/15 per class,
/// pseudo-OOD 70:15 between train and val, true-OOD all to test.
struct SplitCounts {
  int id_train = 0, id_val = 0, id_test = 0;
  int pseudo_train = 0, pseudo_val = 0;
  int true_ood_test = 0;
};
SplitCounts expected_counts(const SyntheticDatasetSpec& spec);

DatasetSplit generate(const SyntheticDatasetSpec& spec);

class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header x1,x2,label,role,split. Values use shortest round-trip
/// formatting, so write/read is lossless.
void write_csv(const DatasetSplit& split, const std::filesystem::path& path);
/// Also accepts the four-column form (x1,x2,label,role); such rows go to test.
DatasetSplit read_csv(const std::filesystem::path& path);

}  // namespace evidloss
