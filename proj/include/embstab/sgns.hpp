#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "embstab/pointcloud.hpp"
#include "embstab/rng.hpp"
#include "embstab/walks.hpp"

namespace embstab {

// Skip-gram-with-negative-sampling hyperparameters. The learning rate
// decays linearly over the planned number of updates down to lr_floor.
// min_delta for early stopping is relative: the absolute improvement
// threshold is early_stop_min_delta_rel times the first epoch's mean loss.
struct EmbedParams {
    int dim = 32;
    int window = 5;  // context offsets 1..window on both sides
    int epochs_max = 5;
    double learning_rate = 0.025;
    double lr_floor = 1e-4;
    int negatives_per_positive = 5;
    int early_stop_patience = 2;
    double early_stop_min_delta_rel = 1e-4;
    std::uint64_t seed = 0;
    int threads = 1;  // >1 enables racy lock-free updates; determinism waived

    void validate() const;
};

struct LossTrace {
    std::vector<double> epoch_mean_loss;
    bool stopped_early = false;
    int epochs_run() const { return static_cast<int>(epoch_mean_loss.size()); }
};

struct TrainResult {
    PointCloud cloud;  // center ("input") vectors
    LossTrace loss;
};

// Consumes per-epoch losses; stops after `patience` consecutive epochs that
// fail to improve on the best seen loss by min_delta. The threshold is fixed
// on the first observation as min_delta_rel * first_loss.
class EarlyStopping {
  public:
    EarlyStopping(int patience, double min_delta_rel)
        : patience_(patience), min_delta_rel_(min_delta_rel) {}

    // Returns true when training should stop after this epoch.
    bool observe(double epoch_loss);

  private:
    int patience_;
    double min_delta_rel_;
    double min_delta_abs_ = 0.0;
    double best_ = 0.0;
    int stale_epochs_ = 0;
    bool primed_ = false;
};

// Samples nodes with probability proportional to corpus-frequency^0.75.
class NegativeSampler {
  public:
    explicit NegativeSampler(const WalkCorpus& corpus);

    NodeId sample(rng::Stream& stream) const;
    const std::vector<std::int64_t>& frequencies() const { return frequencies_; }

  private:
    std::vector<std::int64_t> frequencies_;
    std::vector<double> cumulative_;
};

struct SgnsGradients {
    Eigen::VectorXd center;
    Eigen::VectorXd context;
    std::vector<Eigen::VectorXd> negatives;
    double loss = 0.0;
};

// Analytic gradients of the per-pair loss
//   -log sigma(x.y_o) - sum_n log sigma(-x.y_n)
// with respect to every participating vector.
SgnsGradients sgns_gradients(const Eigen::VectorXd& center,
                             const Eigen::VectorXd& context,
                             const std::vector<Eigen::VectorXd>& negatives);

// Trains SGNS on the walk corpus and returns the center vectors as a
// PointCloud plus the per-epoch loss trace. Deterministic per seed when
// params.threads == 1.
TrainResult train(const WalkCorpus& corpus, const EmbedParams& params);

}  // namespace embstab
