// Feed-forward autoencoder with a one-dimensional bottleneck, trained from
// scratch by full-batch gradient descent with the Adam update rule. The
// bottleneck activation is the synthetic index; an ensemble of replications
// yields its distribution, and per-feature reconstruction errors yield the
// indicator relevance.
#pragma once

#include "autosynth/types.hpp"

#include <cstdint>
#include <vector>

namespace autosynth {

enum class Activation { ReLU, Linear };

/// Layer dimensions are [p, h, 1, h, p]; weights[l] maps layer l to l+1.
struct AutoencoderModel {
    std::vector<int> layer_dims;
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;   // biases[l]: dims[l+1]
    std::vector<Activation> activations;   // one per transition
    std::vector<double> training_trace;    // loss per epoch

    Eigen::Index input_dim() const {
        return layer_dims.empty() ? 0 : layer_dims.front();
    }
};

struct TrainConfig {
    int hidden_width = 0;          // 0 selects ceil(p / 2)
    double learning_rate = 1e-3;
    int max_epochs = 2000;
    double tolerance = 1e-6;       // early stop on relative loss plateau
    std::uint64_t seed = 0;
    Eigen::VectorXd feature_weights;  // empty selects uniform 1/p
};

struct ForwardResult {
    Eigen::VectorXd codes;           // length N, bottleneck activations
    Eigen::MatrixXd reconstruction;  // N x p
};

struct AlignedIndex {
    Eigen::VectorXd values;
    bool flipped = false;
};

struct AutoSynthResult {
    IndexResult index;            // method AutoSynth, ensemble populated
    Eigen::VectorXd relevance;    // length p, nonnegative, sums to 1
    Eigen::MatrixXd reconstruction;  // from the median-loss replication
    std::vector<double> losses;   // final training loss per replication
    double flip_fraction = 0.0;   // share of replications that were flipped
};

/// Builds an untrained model of shape [p, h, 1, h, p] with Glorot-uniform
/// weights and zero biases, drawn deterministically from the seed.
AutoencoderModel init_model(Eigen::Index p, int hidden_width, std::uint64_t seed);

/// Runs the encoder/decoder on a batch (rows are units).
ForwardResult forward(const AutoencoderModel& model, const Eigen::MatrixXd& R);

/// Weighted reconstruction loss:
/// (1/N) sum_i sum_j w_j (r_ij - r~_ij)^2.
double loss(const AutoencoderModel& model, const Eigen::MatrixXd& R,
            const Eigen::VectorXd& feature_weights);

/// Analytic parameter gradients of the loss, layer by layer; exposed so the
/// trainer and the finite-difference checks share one definition.
struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};
Gradients backward(const AutoencoderModel& model, const Eigen::MatrixXd& R,
                   const Eigen::VectorXd& feature_weights);

/// Trains a model on the normalized matrix. Stops at max_epochs or when the
/// relative loss change drops below the tolerance; returns the parameters
/// with the lowest loss seen, so the final loss never exceeds the initial.
/// Throws TrainingError when the loss becomes non-finite.
AutoencoderModel train(const Eigen::MatrixXd& R, const TrainConfig& config);

/// Mean absolute per-feature reconstruction error, normalized to sum to 1.
/// Returns the uniform vector when the total error is below 1e-12.
Eigen::VectorXd indicator_relevance(const Eigen::MatrixXd& R,
                                    const Eigen::MatrixXd& reconstruction);

/// Orients an index against a compass: when the unit with the highest
/// compass value does not rank within the top ceil(N/4) positions of the
/// raw index, the index direction is inverted (complement to 200 on the
/// [70, 130] scale, otherwise negated and rescaled).
AlignedIndex align_polarity(const Eigen::VectorXd& raw_index, const IndexResult& compass);

/// The ensemble index: trains `replications` models with seeds derived from
/// config.seed, rescales each replication's codes to [70, 130], aligns them
/// against the compass, and reports the per-unit median. Failed replications
/// are retried once with a perturbed seed; more than 10% failures is an
/// error. Replications may run concurrently; results are merged by
/// replication number, so the output is independent of thread count.
AutoSynthResult autosynth_index(const Eigen::MatrixXd& R, const TrainConfig& config,
                                int replications, const IndexResult& compass,
                                int threads = 0);

}  // namespace autosynth
