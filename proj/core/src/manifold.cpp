#include "mpdr/manifold.hpp"

#include <cmath>

#include "mpdr/adam.hpp"
#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"

namespace mpdr {

void ManifoldEnsemble::validate() const {
    if (members.empty()) throw ConfigError("manifold ensemble needs at least one autoencoder");
    std::size_t dx = members.front().input_dim();
    for (const Autoencoder& ae : members) {
        if (ae.input_dim() != dx) {
            throw ConfigError("manifold ensemble members disagree on input dimension");
        }
    }
    if (!(sigma_range.min > 0.0) || sigma_range.min > sigma_range.max) {
        throw ConfigError("sigma range must satisfy 0 < min <= max");
    }
}

std::uint64_t ManifoldEnsemble::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Autoencoder& ae : members) {
        std::uint64_t c = ae.param_checksum();
        h = fnv1a64(&c, sizeof c, h);
    }
    return h;
}

PretrainResult pretrain_autoencoder(const Dataset& data, const AutoencoderSpec& spec,
                                    const PretrainConfig& cfg) {
    if (data.size() == 0) throw ConfigError("pretrain_autoencoder: empty dataset");
    if (data.dim() != spec.input_dim) {
        throw ConfigError("pretrain_autoencoder: data dimension " + std::to_string(data.dim()) +
                          " does not match spec input dimension " +
                          std::to_string(spec.input_dim));
    }
    if (cfg.batch_size == 0) throw ConfigError("pretrain_autoencoder: zero batch size");
    if (cfg.lr < 0.0 || cfg.weight_decay_enc < 0.0) {
        throw ConfigError("pretrain_autoencoder: negative learning rate or weight decay");
    }

    Rng rng(cfg.seed);
    PretrainResult result{Autoencoder(spec, rng), {}};
    Autoencoder& ae = result.ae;
    result.epoch_loss.push_back(ae.reconstruction_loss(data.rows));

    AdamConfig acfg;
    acfg.lr = cfg.lr;
    Adam opt(acfg);
    Rng shuffle_rng = rng.split(1);

    std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = shuffle_rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t stop = std::min(n, start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + stop);
            Tensor batch = data.rows.gather_rows(idx);

            Graph g;
            Graph::NodeId x = g.constant(std::move(batch));
            std::vector<Graph::NodeId> enc_theta, dec_theta;
            Graph::NodeId z = ae.build_encoder(g, x, &enc_theta);
            Graph::NodeId recon = ae.build_decoder(g, z, &dec_theta);
            Graph::NodeId loss = g.mean(g.row_sqnorm(g.sub(x, recon)));
            if (cfg.weight_decay_enc > 0.0) {
                // Penalize encoder weight matrices only; biases stay free.
                Graph::NodeId penalty = Graph::kNoNode;
                for (std::size_t t = 0; t < enc_theta.size(); t += 2) {
                    Graph::NodeId sq = g.sum(g.mul(enc_theta[t], enc_theta[t]));
                    penalty = penalty == Graph::kNoNode ? sq : g.add(penalty, sq);
                }
                loss = g.add(loss, g.scale(penalty, cfg.weight_decay_enc));
            }

            std::vector<Graph::NodeId> theta = enc_theta;
            theta.insert(theta.end(), dec_theta.begin(), dec_theta.end());
            Bindings bind;
            for (std::size_t t = 0; t < theta.size(); ++t) bind.set(theta[t], ae.params()[t]);
            GradientResult res = gradient(g, loss, bind, theta);
            opt.step(ae.params(), res.grads);
        }
        result.epoch_loss.push_back(ae.reconstruction_loss(data.rows));
    }
    return result;
}

PerturbationRecord mpd_perturb(const Autoencoder& ae, const Tensor& x,
                               std::span<const double> sigma, Rng& rng, bool reproject) {
    if (x.rank() != 2 || x.cols() != ae.input_dim()) {
        throw ConfigError("mpd_perturb: input shape " + x.shape_string() +
                          " does not match autoencoder input dimension " +
                          std::to_string(ae.input_dim()));
    }
    if (sigma.size() != x.rows()) {
        throw ContractError("mpd_perturb: " + std::to_string(sigma.size()) + " sigmas for " +
                            std::to_string(x.rows()) + " samples");
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw ConfigError("mpd_perturb: sigma must be positive");
    }

    PerturbationRecord rec;
    rec.x = x;
    rec.z = ae.encode(x);
    rec.sigma.assign(sigma.begin(), sigma.end());
    rec.manifold_index.assign(x.rows(), 0);

    std::size_t dz = rec.z.cols();
    rec.z_tilde = rec.z;
    for (std::size_t i = 0; i < rec.z.rows(); ++i) {
        for (std::size_t j = 0; j < dz; ++j) {
            rec.z_tilde.at(i, j) += sigma[i] * rng.normal();
        }
    }
    if (ae.spherical() && reproject) {
        for (std::size_t i = 0; i < rec.z_tilde.rows(); ++i) {
            double norm = 0.0;
            for (std::size_t j = 0; j < dz; ++j) {
                double v = rec.z_tilde.at(i, j);
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm < 1e-12) {
                throw DegenerateInputError("mpd_perturb: diffused latent of row " +
                                           std::to_string(i) + " has near-zero norm");
            }
            for (std::size_t j = 0; j < dz; ++j) rec.z_tilde.at(i, j) /= norm;
        }
    }
    rec.x_tilde = ae.decode(rec.z_tilde);
    return rec;
}

std::vector<double> sample_sigma(const SigmaRange& range, Rng& rng, std::size_t n) {
    if (!(range.min > 0.0) || range.min > range.max) {
        throw ConfigError("sample_sigma: range must satisfy 0 < min <= max");
    }
    std::vector<double> out(n);
    for (double& s : out) s = rng.uniform(range.min, range.max);
    return out;
}

std::vector<std::vector<std::size_t>> split_batch(std::size_t batch_size, std::size_t k) {
    if (k == 0) throw ConfigError("split_batch: need at least one group");
    if (k > batch_size) {
        throw ConfigError("split_batch: " + std::to_string(k) + " groups for a batch of " +
                          std::to_string(batch_size));
    }
    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t i = 0; i < batch_size; ++i) groups[i % k].push_back(i);
    return groups;
}

} // namespace mpdr
