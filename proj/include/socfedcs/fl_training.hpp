#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "socfedcs/network_model.hpp"
#include "socfedcs/rng.hpp"

namespace socfedcs {

/// n x d features in [0, 1] with labels in [0, classes).
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    int classes = 0;

    std::size_t size() const { return labels.size(); }
    int dim() const { return static_cast<int>(features.cols()); }
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled by 1/255. Throws IdxFormatError on bad magic, truncated
/// payload, or an image/label count mismatch.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Gaussian blobs (unit variance) with pairwise centre distance `separation`
/// when dim >= classes, then min-max scaled to [0, 1] per feature.
Dataset generate_synthetic(int classes, int dim, int n, double separation, Rng& rng);

/// Splits off the last `tail` samples, e.g. as a test set.
std::pair<Dataset, Dataset> split_tail(const Dataset& dataset, std::size_t tail);

struct ClientShard {
    int owner = 0;
    std::vector<std::size_t> indices; // rows of the parent Dataset
    std::vector<int> labels;          // labels after noise, parallel to indices
    double noise_fraction = 0.0;
    int flipped = 0;

    std::size_t size() const { return indices.size(); }
};

struct NoiseConfig {
    double scale = 0.5;
    /// scale (1 - w_row / w) for FCs and scale (1 - w_col / w) for SCs.
    /// Otherwise each tier is max-normalised: scale (1 - w_row / max_row).
    bool paper_literal = false;
};

/// Noise fraction per client id (FCs first, then SCs).
std::vector<double> trust_noise_fractions(const TrustGraph& trust, const NoiseConfig& noise);

/// Shard sizes for a dataset of n samples: the requested sizes, scaled down
/// proportionally (at least 1 each) when they do not fit.
std::vector<int> fit_shard_sizes(std::span<const int> requested, std::size_t n);

/// IID split into one shard per client, then trust-derived label noise: the
/// rounded fraction of each shard is flipped uniformly to a different class.
std::vector<ClientShard> partition_scenario1(const Dataset& dataset, const TrustGraph& trust,
                                             std::span<const int> sizes, const NoiseConfig& noise, Rng& rng);

/// Like scenario 1, but `heterogeneity` of each shard is drawn from a dominant
/// class (client id mod classes). heterogeneity = 0 reproduces scenario 1.
std::vector<ClientShard> partition_scenario2(const Dataset& dataset, const TrustGraph& trust,
                                             std::span<const int> sizes, double heterogeneity,
                                             const NoiseConfig& noise, Rng& rng);

/// Multinomial logistic regression.
struct GlobalModel {
    Eigen::MatrixXd weights; // d x classes
    Eigen::VectorXd bias;    // classes
    int round = 0;

    static GlobalModel zeros(int dim, int classes);
    bool all_finite() const;
};

struct TrainParams {
    double lr = 0.1;
    int batch_size = 32;
    double nu = 5.0;
};

/// ceil(nu ln(1/theta)), at least 1.
int local_epochs(double theta, double nu);

struct LossGradient {
    double loss = 0.0;
    Eigen::MatrixXd grad_weights;
    Eigen::VectorXd grad_bias;
};

/// Mean softmax cross-entropy over the rows of x and its analytic gradient.
LossGradient softmax_loss_gradient(const GlobalModel& model, const Eigen::MatrixXd& x, std::span<const int> labels);

/// Mean cross-entropy of the model on a shard's (noisy) labels.
double shard_loss(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard);

/// Mini-batch gradient descent from the global weights for local_epochs(theta) epochs.
GlobalModel local_train(const GlobalModel& global, const Dataset& dataset, const ClientShard& shard, double theta,
                        const TrainParams& params, Rng& rng);

struct LocalUpdate {
    GlobalModel model;
    std::size_t samples = 0;
};

/// Sample-count weighted average. With no updates the current model is returned unchanged.
GlobalModel aggregate(const GlobalModel& current, std::span<const LocalUpdate> updates);

/// Argmax accuracy; ties go to the lowest class index.
double evaluate(const GlobalModel& model, const Dataset& test);

/// (1 / D) sum 1/2 ||y - (W^T x + b)||^2 with one-hot y, the PowCS ranking loss.
double squared_loss(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard);

/// Per-sample cross-entropy on the shard, used for Oort's statistical utility.
std::vector<double> sample_losses(const GlobalModel& model, const Dataset& dataset, const ClientShard& shard);

} // namespace socfedcs
