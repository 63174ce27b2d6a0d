#include "evidloss/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "evidloss/random.hpp"

namespace evidloss {

std::string role_token(PointRole role) {
  switch (role) {
    case PointRole::kInDistribution: return "id";
    case PointRole::kPseudoOod: return "pseudo_ood";
    case PointRole::kTrueOod: return "true_ood";
  }
  return "?";
}

std::optional<PointRole> parse_role_token(const std::string& token) {
  if (token == "id") return PointRole::kInDistribution;
  if (token == "pseudo_ood") return PointRole::kPseudoOod;
  if (token == "true_ood") return PointRole::kTrueOod;
  return std::nullopt;
}

SyntheticDatasetSpec SyntheticDatasetSpec::default_spec(std::uint64_t seed) {
  SyntheticDatasetSpec s;
  // vertices at 90, 210 and 330 degrees
  const double r = 4.0;
  const double h = r * std::numbers::sqrt3 / 2.0;
  s.class_means = {{0.0, r}, {-h, -r / 2.0}, {h, -r / 2.0}};
  s.class_covariances.assign(3, Matrix2{1.0, 0.0, 0.0, 1.0});
  s.pseudo_ood_cov = {64.0, 0.0, 0.0, 64.0};
  s.seed = seed;
  return s;
}

namespace {

struct Cholesky2 {
  double l11, l21, l22;
};

std::optional<Cholesky2> cholesky(const Matrix2& m) {
  if (!(std::abs(m[1] - m[2]) <= 1e-12 * (std::abs(m[1]) + 1.0))) return std::nullopt;
  if (!(m[0] > 0.0)) return std::nullopt;
  const double l11 = std::sqrt(m[0]);
  const double l21 = m[2] / l11;
  const double rem = m[3] - l21 * l21;
  if (!(rem > 0.0)) return std::nullopt;
  return Cholesky2{l11, l21, std::sqrt(rem)};
}

Point2 draw(Rng& rng, const Point2& mean, const Cholesky2& l) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  return {mean[0] + l.l11 * z1, mean[1] + l.l21 * z1 + l.l22 * z2};
}

int round_share(int n, int num, int den) {
  return static_cast<int>(std::lround(static_cast<double>(n) * num / den));
}

}  // namespace

void SyntheticDatasetSpec::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("data." + key + ": " + why);
  };
  if (class_means.size() < 2) fail("class_means", "need at least 2 classes");
  if (class_covariances.size() != class_means.size()) {
    fail("class_covariances", "need one covariance per class");
  }
  if (n_id_per_class < 1) fail("n_id_per_class", "must be >= 1");
  if (n_pseudo_ood < 0) fail("n_pseudo_ood", "must be >= 0");
  if (n_true_ood < 0) fail("n_true_ood", "must be >= 0");
  for (std::size_t k = 0; k < class_covariances.size(); ++k) {
    if (!cholesky(class_covariances[k])) {
      fail("class_covariances[" + std::to_string(k) + "]", "not symmetric positive definite");
    }
  }
  if (!cholesky(pseudo_ood_cov)) fail("pseudo_ood_cov", "not symmetric positive definite");
  if (!cholesky(true_ood_cov)) fail("true_ood_cov", "not symmetric positive definite");
  if (pseudo_ood_mean == true_ood_mean) fail("true_ood_mean", "must differ from pseudo_ood_mean");
}

SplitCounts expected_counts(const SyntheticDatasetSpec& spec) {
  SplitCounts c;
  const int per_train = round_share(spec.n_id_per_class, 70, 100);
  const int per_val = round_share(spec.n_id_per_class, 15, 100);
  const int per_test = spec.n_id_per_class - per_train - per_val;
  const int classes = static_cast<int>(spec.classes());
  c.id_train = per_train * classes;
  c.id_val = per_val * classes;
  c.id_test = per_test * classes;
  c.pseudo_train = round_share(spec.n_pseudo_ood, 70, 85);
  c.pseudo_val = spec.n_pseudo_ood - c.pseudo_train;
  c.true_ood_test = spec.n_true_ood;
  return c;
}

DatasetSplit generate(const SyntheticDatasetSpec& spec) {
  spec.validate();
  Rng rng = Rng::derive(spec.seed, "synth");
  DatasetSplit out;
  const int per_train = round_share(spec.n_id_per_class, 70, 100);
  const int per_val = round_share(spec.n_id_per_class, 15, 100);

  for (std::size_t k = 0; k < spec.classes(); ++k) {
    const auto l = *cholesky(spec.class_covariances[k]);
    for (int i = 0; i < spec.n_id_per_class; ++i) {
      LabeledPoint pt{draw(rng, spec.class_means[k], l), static_cast<int>(k),
                      PointRole::kInDistribution};
      if (i < per_train) {
        out.train.push_back(pt);
      } else if (i < per_train + per_val) {
        out.val.push_back(pt);
      } else {
        out.test.push_back(pt);
      }
    }
  }
  const auto lp = *cholesky(spec.pseudo_ood_cov);
  const int pseudo_train = round_share(spec.n_pseudo_ood, 70, 85);
  for (int i = 0; i < spec.n_pseudo_ood; ++i) {
    LabeledPoint pt{draw(rng, spec.pseudo_ood_mean, lp), -1, PointRole::kPseudoOod};
    (i < pseudo_train ? out.train : out.val).push_back(pt);
  }
  const auto lt = *cholesky(spec.true_ood_cov);
  for (int i = 0; i < spec.n_true_ood; ++i) {
    out.test.push_back(LabeledPoint{draw(rng, spec.true_ood_mean, lt), -1, PointRole::kTrueOod});
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

void write_csv(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot open '" + path.string() + "' for writing");
  out << "x1,x2,label,role,split\n";
  auto emit = [&](const std::vector<LabeledPoint>& points, const char* name) {
    for (const auto& p : points) {
      out << format_double(p.x[0]) << ',' << format_double(p.x[1]) << ',' << p.label << ','
          << role_token(p.role) << ',' << name << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.val, "val");
  emit(split.test, "test");
  if (!out) throw DataFormatError("write failed for '" + path.string() + "'");
}

DatasetSplit read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataFormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_split;
  if (line == "x1,x2,label,role,split") {
    with_split = true;
  } else if (line == "x1,x2,label,role") {
    with_split = false;
  } else {
    throw DataFormatError(path.string() + ":1: unexpected header '" + line + "'");
  }

  DatasetSplit out;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto f = split_fields(line);
    if (f.size() != (with_split ? 5u : 4u)) throw DataFormatError(where + "wrong field count");
    LabeledPoint p;
    if (!parse_number(f[0], p.x[0]) || !parse_number(f[1], p.x[1]) ||
        !std::isfinite(p.x[0]) || !std::isfinite(p.x[1])) {
      throw DataFormatError(where + "bad coordinate");
    }
    if (!parse_number(f[2], p.label)) throw DataFormatError(where + "bad label '" + f[2] + "'");
    const auto role = parse_role_token(f[3]);
    if (!role) throw DataFormatError(where + "bad role '" + f[3] + "'");
    p.role = *role;
    if ((p.role == PointRole::kInDistribution) != (p.label >= 0) || p.label < -1) {
      throw DataFormatError(where + "label inconsistent with role");
    }
    std::vector<LabeledPoint>* dest = &out.test;
    if (with_split) {
      if (f[4] == "train") {
        dest = &out.train;
      } else if (f[4] == "val") {
        dest = &out.val;
      } else if (f[4] != "test") {
        throw DataFormatError(where + "bad split '" + f[4] + "'");
      }
    }
    if (!with_split && p.role == PointRole::kPseudoOod) dest = &out.train;
    if (p.role == PointRole::kTrueOod && dest != &out.test) {
      throw DataFormatError(where + "true_ood rows belong to the test split");
    }
    if (p.role == PointRole::kPseudoOod && dest == &out.test) {
      throw DataFormatError(where + "pseudo_ood rows cannot be in the test split");
    }
    dest->push_back(p);
    ++rows;
  }
  if (rows == 0) throw DataFormatError(path.string() + ": no data rows");
  return out;
}

}  // namespace evidloss
