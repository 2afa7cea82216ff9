#include "embstab/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "embstab/errors.hpp"

namespace embstab {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow; -log sigma(s) == softplus(-s).
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::size_t count_walk_pairs(const std::vector<NodeId>& walk, int window) {
    std::size_t pairs = 0;
    const long T = static_cast<long>(walk.size());
    for (long t = 0; t < T; ++t) {
        const long lo = std::max<long>(0, t - window);
        const long hi = std::min<long>(T - 1, t + window);
        pairs += static_cast<std::size_t>(hi - lo);  // excludes s == t
    }
    return pairs;
}

nlohmann::json params_json(const EmbedParams& p) {
    return {{"dim", p.dim},
            {"window", p.window},
            {"epochs_max", p.epochs_max},
            {"learning_rate", p.learning_rate},
            {"lr_floor", p.lr_floor},
            {"negatives_per_positive", p.negatives_per_positive},
            {"early_stop_patience", p.early_stop_patience},
            {"early_stop_min_delta_rel", p.early_stop_min_delta_rel},
            {"seed", p.seed}};
}

nlohmann::json walk_params_json(const WalkParams& p) {
    return {{"walk_length", p.walk_length},
            {"walks_per_node", p.walks_per_node},
            {"return_bias", p.return_bias},
            {"inout_bias", p.inout_bias},
            {"seed", p.seed}};
}

}  // namespace

void EmbedParams::validate() const {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (epochs_max < 1) throw std::invalid_argument("epochs_max must be >= 1");
    if (negatives_per_positive < 1)
        throw std::invalid_argument("negatives_per_positive must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(lr_floor >= 0.0)) throw std::invalid_argument("lr_floor must be >= 0");
    if (early_stop_patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (!(early_stop_min_delta_rel >= 0.0))
        throw std::invalid_argument("min_delta must be >= 0");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

bool EarlyStopping::observe(double epoch_loss) {
    if (!primed_) {
        primed_ = true;
        best_ = epoch_loss;
        min_delta_abs_ = min_delta_rel_ * epoch_loss;
        stale_epochs_ = 0;
        return false;
    }
    if (epoch_loss < best_ - min_delta_abs_) {
        best_ = epoch_loss;
        stale_epochs_ = 0;
    } else {
        ++stale_epochs_;
    }
    return stale_epochs_ >= patience_;
}

NegativeSampler::NegativeSampler(const WalkCorpus& corpus) {
    frequencies_.assign(static_cast<std::size_t>(corpus.num_nodes), 0);
    for (const auto& walk : corpus.walks)
        for (NodeId v : walk) {
            if (v < 0 || v >= corpus.num_nodes)
                throw std::invalid_argument("corpus node id out of range");
            ++frequencies_[static_cast<std::size_t>(v)];
        }
    cumulative_.resize(frequencies_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < frequencies_.size(); ++i) {
        total += std::pow(static_cast<double>(frequencies_[i]), 0.75);
        cumulative_[i] = total;
    }
    if (!(total > 0.0)) throw std::invalid_argument("empty corpus");
}

NodeId NegativeSampler::sample(rng::Stream& stream) const {
    const double target = stream.next_double() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    return static_cast<NodeId>(it - cumulative_.begin());
}

SgnsGradients sgns_gradients(const Eigen::VectorXd& center,
                             const Eigen::VectorXd& context,
                             const std::vector<Eigen::VectorXd>& negatives) {
    if (context.size() != center.size())
        throw std::invalid_argument("context dimension mismatch");
    for (const auto& n : negatives)
        if (n.size() != center.size())
            throw std::invalid_argument("negative dimension mismatch");

    SgnsGradients g;
    const double s_pos = center.dot(context);
    const double coeff_pos = sigmoid(s_pos) - 1.0;  // d(-log sigma(s))/ds
    g.loss = softplus(-s_pos);
    g.center = coeff_pos * context;
    g.context = coeff_pos * center;
    g.negatives.reserve(negatives.size());
    for (const auto& n : negatives) {
        const double s_neg = center.dot(n);
        const double coeff_neg = sigmoid(s_neg);  // d(-log sigma(-s))/ds
        g.loss += softplus(s_neg);
        g.center += coeff_neg * n;
        g.negatives.push_back(coeff_neg * center);
    }
    return g;
}

TrainResult train(const WalkCorpus& corpus, const EmbedParams& params) {
    params.validate();
    if (corpus.walks.empty() || corpus.num_nodes < 1)
        throw std::invalid_argument("empty corpus");

    const auto n = static_cast<std::size_t>(corpus.num_nodes);
    const auto d = static_cast<std::size_t>(params.dim);

    NegativeSampler sampler(corpus);
    for (std::size_t v = 0; v < n; ++v)
        if (sampler.frequencies()[v] == 0)
            throw std::invalid_argument("node " + std::to_string(v) +
                                        " absent from corpus");

    // Flat row-major parameter blocks; center rows are the embedding.
    std::vector<double> center(n * d), context(n * d, 0.0);
    rng::Stream init(params.seed, rng::Purpose::Init);
    const double half = 0.5 / static_cast<double>(d);
    for (double& x : center) x = init.next_uniform(-half, half);

    std::vector<std::size_t> walk_pairs(corpus.walks.size());
    for (std::size_t i = 0; i < corpus.walks.size(); ++i)
        walk_pairs[i] = count_walk_pairs(corpus.walks[i], params.window);
    const std::size_t pairs_per_epoch =
        std::accumulate(walk_pairs.begin(), walk_pairs.end(), std::size_t{0});
    if (pairs_per_epoch == 0)
        throw std::invalid_argument("corpus has no context pairs (walks too short)");
    const double planned_updates =
        static_cast<double>(pairs_per_epoch) * params.epochs_max;
    const std::size_t terms_per_epoch =
        pairs_per_epoch * (1 + static_cast<std::size_t>(params.negatives_per_positive));

    std::vector<std::size_t> walk_order(corpus.walks.size());
    std::iota(walk_order.begin(), walk_order.end(), 0);

    LossTrace trace;
    EarlyStopping stopper(params.early_stop_patience, params.early_stop_min_delta_rel);
    std::size_t updates_done = 0;

    // One walk's worth of SGD. Returns the summed term loss. Thread-safe in
    // the hogwild sense only: concurrent runs race on center/context.
    auto train_walk = [&](std::size_t walk_idx, rng::Stream& negatives_stream,
                          std::size_t update_base) {
        const auto& walk = corpus.walks[walk_idx];
        const long T = static_cast<long>(walk.size());
        double loss = 0.0;
        std::size_t local_updates = 0;
        std::vector<double> center_grad(d);
        for (long t = 0; t < T; ++t) {
            double* xc = center.data() + static_cast<std::size_t>(walk[t]) * d;
            const long lo = std::max<long>(0, t - params.window);
            const long hi = std::min<long>(T - 1, t + params.window);
            for (long s = lo; s <= hi; ++s) {
                if (s == t) continue;
                const double progress =
                    static_cast<double>(update_base + local_updates) / planned_updates;
                const double lr = std::max(params.lr_floor,
                                           params.learning_rate * (1.0 - progress));
                ++local_updates;

                std::fill(center_grad.begin(), center_grad.end(), 0.0);
                {  // positive pair
                    double* yo = context.data() + static_cast<std::size_t>(walk[s]) * d;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < d; ++k) dot += xc[k] * yo[k];
                    loss += softplus(-dot);
                    const double coeff = sigmoid(dot) - 1.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        center_grad[k] += coeff * yo[k];
                        yo[k] -= lr * coeff * xc[k];
                    }
                }
                for (int neg = 0; neg < params.negatives_per_positive; ++neg) {
                    const NodeId nid = sampler.sample(negatives_stream);
                    double* yn = context.data() + static_cast<std::size_t>(nid) * d;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < d; ++k) dot += xc[k] * yn[k];
                    loss += softplus(dot);
                    const double coeff = sigmoid(dot);
                    for (std::size_t k = 0; k < d; ++k) {
                        center_grad[k] += coeff * yn[k];
                        yn[k] -= lr * coeff * xc[k];
                    }
                }
                for (std::size_t k = 0; k < d; ++k) xc[k] -= lr * center_grad[k];
            }
        }
        return loss;
    };

    for (int epoch = 0; epoch < params.epochs_max; ++epoch) {
        // Deterministic Fisher-Yates reshuffle of walk order per epoch.
        rng::Stream shuffle(params.seed, rng::Purpose::Shuffle,
                            static_cast<std::uint64_t>(epoch));
        for (std::size_t i = walk_order.size(); i > 1; --i) {
            const std::size_t j = shuffle.next_below(i);
            std::swap(walk_order[i - 1], walk_order[j]);
        }

        double epoch_loss = 0.0;
        if (params.threads == 1) {
            rng::Stream negatives(params.seed, rng::Purpose::Negatives,
                                  static_cast<std::uint64_t>(epoch));
            std::size_t update_base = updates_done;
            for (std::size_t idx : walk_order) {
                epoch_loss += train_walk(idx, negatives, update_base);
                update_base += walk_pairs[idx];
            }
        } else {
            // Opt-in lock-free mode: threads race on the shared vectors and
            // track lr progress through a shared pair counter.
            std::atomic<std::size_t> cursor{0};
            std::atomic<std::size_t> pairs_done{updates_done};
            std::vector<double> thread_loss(params.threads, 0.0);
            std::vector<std::thread> pool;
            for (int th = 0; th < params.threads; ++th) {
                pool.emplace_back([&, th] {
                    rng::Stream negatives(params.seed, rng::Purpose::Negatives,
                                          static_cast<std::uint64_t>(epoch),
                                          static_cast<std::uint64_t>(th));
                    for (;;) {
                        const std::size_t i = cursor.fetch_add(1);
                        if (i >= walk_order.size()) break;
                        const std::size_t idx = walk_order[i];
                        const std::size_t base =
                            pairs_done.fetch_add(walk_pairs[idx]);
                        thread_loss[th] += train_walk(idx, negatives, base);
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (double l : thread_loss) epoch_loss += l;
        }
        updates_done += pairs_per_epoch;

        const double mean_loss = epoch_loss / static_cast<double>(terms_per_epoch);
        if (!std::isfinite(mean_loss))
            throw TrainError("non-finite training loss (learning rate too high?)");
        trace.epoch_mean_loss.push_back(mean_loss);
        if (stopper.observe(mean_loss) && epoch + 1 < params.epochs_max) {
            trace.stopped_early = true;
            break;
        }
    }

    TrainResult result;
    result.cloud.graph_id = corpus.graph_id;
    result.cloud.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k)
            result.cloud.points(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(k)) = center[i * d + k];
    nlohmann::json provenance;
    provenance["walk"] = walk_params_json(corpus.params);
    provenance["embed"] = params_json(params);
    provenance["init"] = "center ~ U(-0.5/d, 0.5/d); context = 0";
    result.cloud.provenance_json = provenance.dump();
    result.loss = trace;
    return result;
}

}  // namespace embstab
