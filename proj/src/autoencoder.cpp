#include "autosynth/autoencoder.hpp"

#include "autosynth/normalize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace autosynth {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr std::uint64_t kSeedPerturb = 0x9E3779B97F4A7C15ULL;

Eigen::VectorXd resolve_feature_weights(const Eigen::VectorXd& w, Eigen::Index p) {
    if (w.size() == 0)
        return Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
    if (w.size() != p)
        throw ValidationError("feature weights length does not match indicator count");
    double total = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(w[j] >= 0.0))
            throw ValidationError("feature weights must be nonnegative");
        total += w[j];
    }
    if (total <= 0.0)
        throw ValidationError("feature weights must not all be zero");
    return w / total;
}

void check_shapes(const AutoencoderModel& model, const Eigen::MatrixXd& R) {
    if (model.layer_dims.size() < 2 || model.weights.size() != model.layer_dims.size() - 1 ||
        model.biases.size() != model.weights.size() ||
        model.activations.size() != model.weights.size())
        throw ValidationError("autoencoder model is structurally incomplete");
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (model.weights[l].rows() != model.layer_dims[l + 1] ||
            model.weights[l].cols() != model.layer_dims[l] ||
            model.biases[l].size() != model.layer_dims[l + 1])
            throw ValidationError("autoencoder layer " + std::to_string(l) +
                                  " has inconsistent shapes");
    }
    if (R.cols() != model.layer_dims.front())
        throw ValidationError("input width " + std::to_string(R.cols()) +
                              " does not match model input dimension " +
                              std::to_string(model.layer_dims.front()));
    if (model.layer_dims.front() != model.layer_dims.back())
        throw ValidationError("autoencoder input and output widths differ");
}

// Forward pass keeping every layer's activations; acts[0] is the input.
void forward_cached(const AutoencoderModel& model, const Eigen::MatrixXd& R,
                    std::vector<Eigen::MatrixXd>& acts) {
    const std::size_t L = model.weights.size();
    acts.resize(L + 1);
    acts[0] = R;
    for (std::size_t l = 0; l < L; ++l) {
        acts[l + 1].noalias() = acts[l] * model.weights[l].transpose();
        acts[l + 1].rowwise() += model.biases[l].transpose();
        if (model.activations[l] == Activation::ReLU)
            acts[l + 1] = acts[l + 1].cwiseMax(0.0);
    }
}

double loss_from_recon(const Eigen::MatrixXd& R, const Eigen::MatrixXd& recon,
                       const Eigen::VectorXd& w) {
    const Eigen::MatrixXd diff = recon - R;
    return (diff.array().square().matrix() * w).sum() / static_cast<double>(R.rows());
}

Gradients backward_from_acts(const AutoencoderModel& model, const Eigen::MatrixXd& R,
                             const Eigen::VectorXd& w,
                             const std::vector<Eigen::MatrixXd>& acts) {
    const std::size_t L = model.weights.size();
    const double n = static_cast<double>(R.rows());

    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);

    // dL/d(output), column j scaled by its feature weight
    Eigen::MatrixXd grad = (2.0 / n) * (acts[L] - R);
    for (Eigen::Index j = 0; j < grad.cols(); ++j) grad.col(j) *= w[j];

    for (std::size_t l = L; l-- > 0;) {
        if (model.activations[l] == Activation::ReLU)
            grad.array() *= (acts[l + 1].array() > 0.0).cast<double>();
        g.weights[l].noalias() = grad.transpose() * acts[l];
        g.biases[l] = grad.colwise().sum();
        if (l > 0) grad = grad * model.weights[l];
    }
    return g;
}

struct Slot {
    bool ok = false;
    Eigen::VectorXd values;
    Eigen::MatrixXd reconstruction;
    double loss = 0.0;
    bool flipped = false;
};

}  // namespace

namespace {

AutoencoderModel init_model_from(Eigen::Index p, int hidden_width, std::mt19937_64& rng) {
    if (p < 1)
        throw ValidationError("autoencoder needs at least one input feature");
    const int h = hidden_width > 0 ? hidden_width : static_cast<int>((p + 1) / 2);

    AutoencoderModel model;
    model.layer_dims = {static_cast<int>(p), h, 1, h, static_cast<int>(p)};
    model.activations = {Activation::ReLU, Activation::ReLU, Activation::ReLU,
                         Activation::Linear};

    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const int fan_in = model.layer_dims[l];
        const int fan_out = model.layer_dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd W(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) W(i, j) = dist(rng);
        model.weights.push_back(std::move(W));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

}  // namespace

AutoencoderModel init_model(Eigen::Index p, int hidden_width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return init_model_from(p, hidden_width, rng);
}

ForwardResult forward(const AutoencoderModel& model, const Eigen::MatrixXd& R) {
    check_shapes(model, R);
    std::vector<Eigen::MatrixXd> acts;
    forward_cached(model, R, acts);

    ForwardResult out;
    const std::size_t bottleneck = model.layer_dims.size() / 2;  // index of the width-1 layer
    out.codes = acts[bottleneck].col(0);
    out.reconstruction = std::move(acts.back());
    return out;
}

double loss(const AutoencoderModel& model, const Eigen::MatrixXd& R,
            const Eigen::VectorXd& feature_weights) {
    const Eigen::VectorXd w = resolve_feature_weights(feature_weights, R.cols());
    return loss_from_recon(R, forward(model, R).reconstruction, w);
}

Gradients backward(const AutoencoderModel& model, const Eigen::MatrixXd& R,
                   const Eigen::VectorXd& feature_weights) {
    check_shapes(model, R);
    const Eigen::VectorXd w = resolve_feature_weights(feature_weights, R.cols());
    std::vector<Eigen::MatrixXd> acts;
    forward_cached(model, R, acts);
    return backward_from_acts(model, R, w, acts);
}

AutoencoderModel train(const Eigen::MatrixXd& R, const TrainConfig& config) {
    if (R.rows() < 1 || R.cols() < 1)
        throw ValidationError("training data is empty");
    if (!(config.learning_rate > 0.0))
        throw ValidationError("learning rate must be positive");
    if (config.max_epochs < 1)
        throw ValidationError("max_epochs must be positive");
    if (!(config.tolerance >= 0.0))
        throw ValidationError("tolerance must be nonnegative");

    const Eigen::VectorXd w = resolve_feature_weights(config.feature_weights, R.cols());

    // With zero biases and an all-positive input range, roughly half of the
    // random draws start with every bottleneck pre-activation negative; the
    // code is then stuck at zero and no gradient reaches the encoder.
    // Resample (continuing the seeded stream) until the starting code has
    // spread.
    std::mt19937_64 init_rng(config.seed);
    AutoencoderModel model;
    for (int attempt = 0;; ++attempt) {
        model = init_model_from(R.cols(), config.hidden_width, init_rng);
        check_shapes(model, R);
        const Eigen::VectorXd codes = forward(model, R).codes;
        if (codes.maxCoeff() - codes.minCoeff() > 0.0) break;
        if (attempt >= 256)
            throw TrainingError("could not find a live bottleneck initialization", 0);
    }

    const std::size_t L = model.weights.size();
    std::vector<Eigen::MatrixXd> mW(L), vW(L);
    std::vector<Eigen::VectorXd> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mW[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        vW[l] = mW[l];
        mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        vb[l] = mb[l];
    }

    std::vector<Eigen::MatrixXd> best_weights = model.weights;
    std::vector<Eigen::VectorXd> best_biases = model.biases;
    double best_loss = std::numeric_limits<double>::infinity();
    double prev_loss = std::numeric_limits<double>::infinity();

    std::vector<Eigen::MatrixXd> acts;
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        forward_cached(model, R, acts);
        const double current = loss_from_recon(R, acts.back(), w);
        if (!std::isfinite(current))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch), epoch);
        model.training_trace.push_back(current);

        if (current < best_loss) {
            best_loss = current;
            best_weights = model.weights;
            best_biases = model.biases;
        }
        if (current == 0.0) break;
        if (epoch > 0 && std::abs(current - prev_loss) < config.tolerance * prev_loss) break;
        prev_loss = current;

        Gradients g = backward_from_acts(model, R, w, acts);
        beta1_t *= kAdamBeta1;
        beta2_t *= kAdamBeta2;
        const double m_corr = 1.0 / (1.0 - beta1_t);
        const double v_corr = 1.0 / (1.0 - beta2_t);
        for (std::size_t l = 0; l < L; ++l) {
            mW[l] = kAdamBeta1 * mW[l] + (1.0 - kAdamBeta1) * g.weights[l];
            vW[l] = (kAdamBeta2 * vW[l].array() +
                     (1.0 - kAdamBeta2) * g.weights[l].array().square())
                        .matrix();
            model.weights[l].array() -=
                config.learning_rate * (mW[l].array() * m_corr) /
                ((vW[l].array() * v_corr).sqrt() + kAdamEps);

            mb[l] = kAdamBeta1 * mb[l] + (1.0 - kAdamBeta1) * g.biases[l];
            vb[l] = (kAdamBeta2 * vb[l].array() +
                     (1.0 - kAdamBeta2) * g.biases[l].array().square())
                        .matrix();
            model.biases[l].array() -=
                config.learning_rate * (mb[l].array() * m_corr) /
                ((vb[l].array() * v_corr).sqrt() + kAdamEps);
        }
    }

    // Account for the very last update, then keep the best parameters seen.
    forward_cached(model, R, acts);
    const double final_loss = loss_from_recon(R, acts.back(), w);
    if (std::isfinite(final_loss)) model.training_trace.push_back(final_loss);
    if (std::isfinite(final_loss) && final_loss < best_loss) {
        best_loss = final_loss;
    } else {
        model.weights = best_weights;
        model.biases = best_biases;
    }
    model.training_trace.push_back(best_loss);
    return model;
}

Eigen::VectorXd indicator_relevance(const Eigen::MatrixXd& R,
                                    const Eigen::MatrixXd& reconstruction) {
    if (R.rows() != reconstruction.rows() || R.cols() != reconstruction.cols())
        throw ValidationError("relevance: reconstruction shape does not match input");
    const Eigen::Index p = R.cols();
    Eigen::VectorXd eps =
        (reconstruction - R).cwiseAbs().colwise().mean().transpose();
    const double total = eps.sum();
    if (total < 1e-12)
        return Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
    return eps / total;
}

AlignedIndex align_polarity(const Eigen::VectorXd& raw_index, const IndexResult& compass) {
    const Eigen::Index n = raw_index.size();
    if (n != compass.values.size())
        throw ValidationError("align_polarity: index and compass cover different unit counts");
    if (n < 1)
        throw ValidationError("align_polarity: empty index");

    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (compass.values[i] > compass.values[best]) best = i;

    const auto ranks = ranks_descending(raw_index);
    const int threshold = static_cast<int>((n + 3) / 4);  // ceil(N/4)
    if (ranks[static_cast<std::size_t>(best)] <= threshold)
        return {raw_index, false};

    const double lo = raw_index.minCoeff();
    const double hi = raw_index.maxCoeff();
    AlignedIndex out;
    out.flipped = true;
    if (lo >= 70.0 - 1e-9 && hi <= 130.0 + 1e-9) {
        out.values = (200.0 - raw_index.array()).matrix();
    } else {
        out.values = rescale_to_scale(-raw_index);
    }
    return out;
}

AutoSynthResult autosynth_index(const Eigen::MatrixXd& R, const TrainConfig& config,
                                int replications, const IndexResult& compass,
                                int threads) {
    if (replications < 1)
        throw ValidationError("autosynth needs at least one replication");
    if (compass.values.size() != R.rows())
        throw ValidationError("autosynth compass does not cover the same units");

    const Eigen::Index n = R.rows();
    std::vector<Slot> slots(static_cast<std::size_t>(replications));

    auto run_one = [&](std::uint64_t seed) -> Slot {
        TrainConfig local = config;
        local.seed = seed;
        AutoencoderModel model = train(R, local);
        ForwardResult fr = forward(model, R);
        const double span = fr.codes.maxCoeff() - fr.codes.minCoeff();
        const double scale = std::max({1.0, std::abs(fr.codes.maxCoeff()),
                                       std::abs(fr.codes.minCoeff())});
        if (!(span > 1e-12 * scale))
            throw NumericError("bottleneck collapsed to a constant code");
        AlignedIndex aligned = align_polarity(rescale_to_scale(fr.codes), compass);
        Slot slot;
        slot.ok = true;
        slot.values = std::move(aligned.values);
        slot.flipped = aligned.flipped;
        slot.reconstruction = std::move(fr.reconstruction);
        slot.loss = model.training_trace.back();
        return slot;
    };

    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= replications) return;
            const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(k);
            try {
                slots[static_cast<std::size_t>(k)] = run_one(seed);
            } catch (const Error&) {
                try {
                    slots[static_cast<std::size_t>(k)] = run_one(seed ^ kSeedPerturb);
                } catch (const Error&) {
                    // recorded as a failed replication
                } catch (...) {
                    std::scoped_lock lock(fatal_mutex);
                    if (!fatal) fatal = std::current_exception();
                }
            } catch (...) {
                std::scoped_lock lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };

    int n_threads = threads > 0 ? threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, replications);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    std::vector<int> ok_order;
    for (int k = 0; k < replications; ++k)
        if (slots[static_cast<std::size_t>(k)].ok) ok_order.push_back(k);
    const int failures = replications - static_cast<int>(ok_order.size());
    if (failures * 10 > replications)
        throw NumericError("autosynth: " + std::to_string(failures) + " of " +
                           std::to_string(replications) + " replications failed");

    const auto S = ok_order.size();
    AutoSynthResult result;
    result.index.method = Method::AutoSynth;
    result.index.ensemble.resize(n, static_cast<Eigen::Index>(S));
    result.losses.reserve(S);
    int flips = 0;
    for (std::size_t c = 0; c < S; ++c) {
        const Slot& slot = slots[static_cast<std::size_t>(ok_order[c])];
        result.index.ensemble.col(static_cast<Eigen::Index>(c)) = slot.values;
        result.losses.push_back(slot.loss);
        if (slot.flipped) ++flips;
    }
    result.flip_fraction = static_cast<double>(flips) / static_cast<double>(S);
    result.index.polarity_flipped = 2 * flips > static_cast<int>(S);

    result.index.values.resize(n);
    std::vector<double> row(S);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < S; ++c)
            row[c] = result.index.ensemble(i, static_cast<Eigen::Index>(c));
        std::sort(row.begin(), row.end());
        result.index.values[i] = S % 2 == 1 ? row[S / 2]
                                            : 0.5 * (row[S / 2 - 1] + row[S / 2]);
    }
    result.index.ranks = ranks_descending(result.index.values);

    // Relevance and reconstruction come from the median-loss replication
    // (the lower median, ties resolved by replication order).
    std::vector<std::size_t> by_loss(S);
    std::iota(by_loss.begin(), by_loss.end(), std::size_t{0});
    std::stable_sort(by_loss.begin(), by_loss.end(), [&](std::size_t a, std::size_t b) {
        return result.losses[a] < result.losses[b];
    });
    const Slot& median_slot =
        slots[static_cast<std::size_t>(ok_order[by_loss[(S - 1) / 2]])];
    result.reconstruction = median_slot.reconstruction;
    result.relevance = indicator_relevance(R, result.reconstruction);
    return result;
}

}  // namespace autosynth
