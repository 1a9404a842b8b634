#pragma once

// Training procedures under label noise. Every method shares the warm-up /
// filtering structure: T_w epochs on whole mini-batches, then updates restricted
// to examples the ensemble agrees are small-loss.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lec/dataset.hpp"
#include "lec/metrics.hpp"
#include "lec/model.hpp"
#include "lec/selection.hpp"

namespace lec {

enum class Method { Standard, SelfTraining, LNEC, LSEC, LTEC, LTECFull, CoTeaching };

std::string_view method_name(Method m);
/// Case-insensitive; accepts "self" and "ltec-full"/"ltec_full" spellings.
std::optional<Method> parse_method(std::string_view name);

using Net = ModelState<float>;

struct TrainConfig {
  Method method = Method::Standard;
  int warmup_epochs = 10;
  int total_epochs = 60;
  EnsembleSize ensemble{5};
  double assumed_noise = 0.0;  // percent
  int batch_size = 128;
  double learning_rate = 1e-3;
  std::vector<Index> hidden{128, 128};
  double dropout = 0.25;
  std::uint64_t init_seed = 1;
  std::uint64_t shuffle_seed = 2;
  std::uint64_t dropout_seed = 3;
  /// When false, every member of a multi-network method shares member 0's
  /// initialization and dropout stream.
  bool independent_members = true;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  MlpShape shape(Index inputs, int classes) const;
};

/// Receives the set of ids each network trained on in an epoch.
struct TrainHooks {
  std::function<void(const SelectionSet& used)> on_epoch_used;
};

/// Losses of one perturbed view (member `m`) of the network on a mini-batch.
/// The generic single-network loop intersects the small-loss sets of these
/// views for m = 0..M-1.
using PerturbedLoss =
    std::function<std::vector<double>(const Net& model, const Matrix<float>& features, std::span<const int> labels,
                                      int member, int epoch, int batch)>;

RunLog train_standard(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                      const TrainHooks& hooks = {});
/// Generic single-network consensus loop with a caller-provided perturbation.
RunLog train_lec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                 const PerturbedLoss& perturbed, std::string name = "LEC", const TrainHooks& hooks = {});
RunLog train_self(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});
RunLog train_lnec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});
RunLog train_lsec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});
RunLog train_ltec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});
RunLog train_ltec_full(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                       const TrainHooks& hooks = {});
RunLog train_coteaching(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                        const TrainHooks& hooks = {});

/// Dispatches on cfg.method.
RunLog train(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
             const TrainHooks& hooks = {});

/// Standard training with no evaluation; returns the final network.
Net fit_standard(const LabeledDataset& train, const TrainConfig& cfg);

/// Co-teaching keep ratio in percent at (1-based) epoch t: 100 - eps * min(t, 10) / 10.
double coteaching_keep_percent(double assumed_noise, int epoch);

}  // namespace lec
