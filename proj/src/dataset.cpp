#include "lec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "apportion.hpp"
#include "lec/random.hpp"

namespace lec {

LabeledDataset::LabeledDataset(std::vector<ExampleId> ids, FeatureMatrix features, std::vector<int> observed,
                               std::vector<int> truth, std::vector<std::uint8_t> substituted, int num_classes)
    : ids_(std::move(ids)),
      features_(std::move(features)),
      observed_(std::move(observed)),
      truth_(std::move(truth)),
      substituted_(std::move(substituted)),
      num_classes_(num_classes) {
  const std::size_t n = ids_.size();
  if (static_cast<std::size_t>(features_.rows()) != n || observed_.size() != n || truth_.size() != n ||
      substituted_.size() != n)
    throw std::invalid_argument("dataset columns have inconsistent lengths");
  if (num_classes_ < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  for (std::size_t i = 0; i < n; ++i) {
    if (observed_[i] < 0 || observed_[i] >= num_classes_ || truth_[i] < 0 || truth_[i] >= num_classes_)
      throw std::out_of_range("label out of range at row " + std::to_string(i));
    if (ids_[i] < 0) throw std::invalid_argument("example ids must be non-negative");
    if (!row_index_.emplace(ids_[i], i).second)
      throw std::invalid_argument("duplicate example id " + std::to_string(ids_[i]));
  }
}

LabeledDataset LabeledDataset::clean(std::vector<ExampleId> ids, FeatureMatrix features, std::vector<int> labels,
                                     int num_classes) {
  std::vector<std::uint8_t> substituted(labels.size(), 0);
  std::vector<int> truth = labels;
  return {std::move(ids), std::move(features), std::move(labels), std::move(truth), std::move(substituted),
          num_classes};
}

std::size_t LabeledDataset::noisy_count() const {
  std::size_t k = 0;
  for (std::size_t i = 0; i < size(); ++i) k += is_noisy(i);
  return k;
}

std::optional<std::size_t> LabeledDataset::row_of(ExampleId id) const {
  auto it = row_index_.find(id);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabeledDataset::require_row(ExampleId id) const {
  auto row = row_of(id);
  if (!row) throw std::out_of_range("unknown example id " + std::to_string(id));
  return *row;
}

LabeledDataset LabeledDataset::with_observed(std::vector<int> observed) const {
  return {ids_, features_, std::move(observed), truth_, substituted_, num_classes_};
}

LabeledDataset LabeledDataset::with_substitutions(FeatureMatrix features, std::vector<std::uint8_t> substituted) const {
  return {ids_, std::move(features), observed_, truth_, std::move(substituted), num_classes_};
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<ExampleId> ids;
  std::vector<int> obs, tru;
  std::vector<std::uint8_t> sub;
  ids.reserve(rows.size());
  for (std::size_t r : rows) {
    ids.push_back(ids_.at(r));
    obs.push_back(observed_[r]);
    tru.push_back(truth_[r]);
    sub.push_back(substituted_[r]);
  }
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  FeatureMatrix feats = features_(idx, Eigen::all);
  return {std::move(ids), std::move(feats), std::move(obs), std::move(tru), std::move(sub), num_classes_};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxError::Kind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ByteReader {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;
  std::string name;

  std::uint32_t u32() {
    if (pos + 4 > bytes.size()) throw IdxError(IdxError::Kind::Truncated, name + ": truncated header");
    std::uint32_t v = (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
                      (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
    pos += 4;
    return v;
  }
  void require(std::size_t count) const {
    if (pos + count > bytes.size())
      throw IdxError(IdxError::Kind::Truncated, name + ": expected " + std::to_string(count) + " payload bytes, found " +
                                                    std::to_string(bytes.size() - pos));
  }
};

FeatureMatrix parse_images(const std::vector<unsigned char>& bytes, const std::string& name) {
  ByteReader r{bytes, 0, name};
  const std::uint32_t magic = r.u32();
  if (magic != kIdxImageMagic) {
    std::ostringstream msg;
    msg << name << ": bad image magic 0x" << std::hex << magic;
    throw IdxError(IdxError::Kind::BadMagic, msg.str());
  }
  const std::size_t count = r.u32();
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  const std::size_t dim = rows * cols;
  r.require(count * dim);
  FeatureMatrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = bytes[r.pos + i * dim + j] / 255.0;
  return x;
}

}  // namespace

FeatureMatrix load_idx_images(const std::filesystem::path& images) {
  return parse_images(read_file(images), images.string());
}

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::optional<int> num_classes) {
  const auto label_bytes = read_file(labels);
  ByteReader r{label_bytes, 0, labels.string()};
  const std::uint32_t magic = r.u32();
  if (magic != kIdxLabelMagic) {
    std::ostringstream msg;
    msg << labels.string() << ": bad label magic 0x" << std::hex << magic;
    throw IdxError(IdxError::Kind::BadMagic, msg.str());
  }
  const std::size_t count = r.u32();
  r.require(count);
  std::vector<int> y(label_bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                     label_bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + count));

  FeatureMatrix x = load_idx_images(images);
  if (static_cast<std::size_t>(x.rows()) != count)
    throw IdxError(IdxError::Kind::CountMismatch, "image count " + std::to_string(x.rows()) +
                                                      " does not match label count " + std::to_string(count));
  const int classes = num_classes.value_or(y.empty() ? 2 : std::max(2, *std::max_element(y.begin(), y.end()) + 1));
  std::vector<ExampleId> ids(count);
  std::iota(ids.begin(), ids.end(), ExampleId{0});
  return LabeledDataset::clean(std::move(ids), std::move(x), std::move(y), classes);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd cluster_means(const ClusterSpec& spec) {
  if (spec.classes < 2 || spec.per_class < 1 || !(spec.spread > 0.0) || !(spec.separation > 0.0))
    throw std::invalid_argument("synth_clusters: need classes >= 2, per_class >= 1, spread > 0, separation > 0");
  if (spec.first_axis < 0 || spec.first_axis + spec.classes > spec.dim)
    throw std::invalid_argument("synth_clusters: dim must be at least first_axis + classes");
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(spec.classes, spec.dim);
  const double scale = spec.separation / std::sqrt(2.0);
  for (int k = 0; k < spec.classes; ++k) means(k, spec.first_axis + k) = scale;
  return means;
}

LabeledDataset synth_clusters(const ClusterSpec& spec) {
  const Eigen::MatrixXd means = cluster_means(spec);
  const std::size_t n = static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.per_class);
  FeatureMatrix x(static_cast<Eigen::Index>(n), spec.dim);
  std::vector<int> y(n);
  std::vector<ExampleId> ids(n);
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, spec.spread);
  // Interleave classes so a prefix of the dataset is class-balanced.
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
    y[i] = k;
    ids[i] = static_cast<ExampleId>(i);
    for (int j = 0; j < spec.dim; ++j) x(static_cast<Eigen::Index>(i), j) = means(k, j) + gauss(rng);
  }
  return LabeledDataset::clean(std::move(ids), std::move(x), std::move(y), spec.classes);
}

// ---------------------------------------------------------------------------

Split split(const LabeledDataset& dataset, const SplitSpec& spec) {
  const double tf = spec.train_fraction, sf = spec.test_fraction;
  if (!(tf > 0.0 && tf <= 1.0) || !(sf >= 0.0 && sf <= 1.0) || tf + sf > 1.0 + 1e-12)
    throw std::invalid_argument("split fractions must satisfy 0 < train <= 1, 0 <= test, train + test <= 1");
  const std::size_t n = dataset.size();
  const std::size_t n_train = static_cast<std::size_t>(std::floor(tf * static_cast<double>(n) + 1e-9));
  const std::size_t n_test = std::min(n - n_train, static_cast<std::size_t>(std::floor(sf * static_cast<double>(n) + 1e-9)));

  const auto classes = static_cast<std::size_t>(dataset.num_classes());
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(dataset.truth(i))].push_back(i);
  Rng rng(spec.seed);
  std::vector<std::size_t> sizes(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    std::shuffle(by_class[k].begin(), by_class[k].end(), rng);
    sizes[k] = by_class[k].size();
  }

  const auto train_quota = detail::apportion(n_train, sizes);
  std::vector<std::size_t> room(classes);
  for (std::size_t k = 0; k < classes; ++k) room[k] = sizes[k] - train_quota[k];
  const auto test_quota = detail::apportion(n_test, sizes, &room);

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t k = 0; k < classes; ++k) {
    const auto& rows = by_class[k];
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(train_quota[k]));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(train_quota[k]),
                     rows.begin() + static_cast<std::ptrdiff_t>(train_quota[k] + test_quota[k]));
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {dataset.subset(train_rows), dataset.subset(test_rows)};
}

// ---------------------------------------------------------------------------

void write_label_table(std::ostream& os, const LabeledDataset& dataset) {
  os << "id,true,observed,is_noisy\n";
  for (std::size_t i = 0; i < dataset.size(); ++i)
    os << dataset.id(i) << ',' << dataset.truth(i) << ',' << dataset.observed(i) << ',' << (dataset.is_noisy(i) ? 1 : 0)
       << '\n';
}

std::vector<LabelRow> read_label_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "id,true,observed,is_noisy")
    throw std::runtime_error("label table: missing header");
  std::vector<LabelRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    LabelRow r{};
    char c1 = 0, c2 = 0, c3 = 0;
    int noisy = 0;
    if (!(ss >> r.id >> c1 >> r.truth >> c2 >> r.observed >> c3 >> noisy) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("label table line " + std::to_string(lineno) + ": malformed row");
    r.noisy = noisy != 0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lec
