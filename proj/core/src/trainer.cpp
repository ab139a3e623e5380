#include "mpdr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpdr/energy.hpp"
#include "mpdr/error.hpp"
#include "mpdr/metrics.hpp"

namespace mpdr {

namespace {

void shuffle_in_place(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(order[i - 1], order[j]);
    }
}

/// Points spread uniformly over the decoded manifold, used as synthetic
/// outliers for the validation AUROC. Spherical members decode uniform
/// sphere latents; others decode uniform draws from the latent bounding box
/// of the training data.
Tensor manifold_uniform_points(const ManifoldEnsemble& ensemble, const Tensor& data_rows,
                               std::size_t n, Rng& rng) {
    const std::size_t k = std::min(n, ensemble.members.size());
    Tensor out({n, data_rows.cols()});
    auto groups = split_batch(n, k);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const Autoencoder& ae = ensemble.members[g];
        const std::size_t dz = ae.latent_dim();
        Tensor latents({groups[g].size(), dz});
        if (ae.spherical()) {
            for (std::size_t r = 0; r < latents.rows(); ++r) {
                double norm = 0.0;
                do {
                    norm = 0.0;
                    for (std::size_t d = 0; d < dz; ++d) {
                        latents.at(r, d) = rng.normal();
                        norm += latents.at(r, d) * latents.at(r, d);
                    }
                    norm = std::sqrt(norm);
                } while (norm < 1e-12);
                for (std::size_t d = 0; d < dz; ++d) latents.at(r, d) /= norm;
            }
        } else {
            Tensor z = ae.encode(data_rows);
            std::vector<double> lo(dz, 0.0), hi(dz, 0.0);
            for (std::size_t d = 0; d < dz; ++d) {
                lo[d] = hi[d] = z.at(0, d);
                for (std::size_t r = 1; r < z.rows(); ++r) {
                    lo[d] = std::min(lo[d], z.at(r, d));
                    hi[d] = std::max(hi[d], z.at(r, d));
                }
            }
            for (std::size_t r = 0; r < latents.rows(); ++r) {
                for (std::size_t d = 0; d < dz; ++d) {
                    latents.at(r, d) = lo[d] + rng.uniform() * (hi[d] - lo[d]);
                }
            }
        }
        out.scatter_rows(groups[g], ae.decode(latents));
    }
    return out;
}

double validation_auroc(const EnergyModel& model, const Tensor& inliers, const Tensor& outliers) {
    ScoredSamples s;
    s.normal = model.energy(inliers).values();
    s.anomalous = model.energy(outliers).values();
    return auroc(s);
}

} // namespace

const char* reg_kind_name(RegKind k) {
    switch (k) {
    case RegKind::Scalar: return "scalar";
    case RegKind::Reconstruction: return "reconstruction";
    }
    throw std::logic_error("reg_kind_name: unknown kind");
}

void MpdrTrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ConfigError("trainer: learning rate must be positive and finite");
    }
    if (batch_size == 0) throw ConfigError("trainer: zero batch size");
    if (ensemble_k == 0) throw ConfigError("trainer: zero ensemble size");
    if (batch_size < ensemble_k) {
        throw ConfigError("trainer: batch size " + std::to_string(batch_size) +
                          " is smaller than the ensemble size " + std::to_string(ensemble_k));
    }
    if (!(reg_coef >= 0.0) || !std::isfinite(reg_coef)) {
        throw ConfigError("trainer: regularization coefficient must be non-negative and finite");
    }
    if (latent_chain.space != Space::Latent) {
        throw ConfigError("trainer: latent chain spec has space " +
                          std::string(space_name(latent_chain.space)));
    }
    if (visible_chain.space != Space::Visible) {
        throw ConfigError("trainer: visible chain spec has space " +
                          std::string(space_name(visible_chain.space)));
    }
    latent_chain.validate();
    visible_chain.validate();
    recovery.validate();
    if (!(sigma_range.min > 0.0) || !(sigma_range.max >= sigma_range.min)) {
        throw ConfigError("trainer: invalid sigma range [" + std::to_string(sigma_range.min) +
                          ", " + std::to_string(sigma_range.max) + "]");
    }
}

MpdrLoss build_mpdr_loss(Graph& g, const EnergyModel& model, const Tensor& x,
                         const Tensor& x_minus, RegKind kind, double reg_coef) {
    if (x.rank() != 2 || x.rows() == 0) {
        throw ConfigError("mpdr loss: positive batch must be a non-empty matrix, got shape " +
                          x.shape_string());
    }
    if (!x_minus.same_shape(x)) {
        throw ContractError("mpdr loss: negative batch shape " + x_minus.shape_string() +
                            " does not match positive batch shape " + x.shape_string());
    }
    if (x.cols() != model.input_dim()) {
        throw ConfigError("mpdr loss: batch has " + std::to_string(x.cols()) +
                          " columns, model expects " + std::to_string(model.input_dim()));
    }
    if (!(reg_coef >= 0.0) || !std::isfinite(reg_coef)) {
        throw ConfigError("mpdr loss: regularization coefficient must be non-negative and finite");
    }

    MpdrLoss out;
    Graph::NodeId xp = g.constant(x, "x_pos");
    Graph::NodeId xn = g.constant(x_minus, "x_neg");
    // First build creates the parameter placeholders, second reuses them:
    // both energy heads read the same theta nodes.
    Graph::NodeId e_pos = model.build(g, xp, &out.theta);
    Graph::NodeId e_neg = model.build(g, xn, &out.theta);
    out.pos_mean = g.mean(e_pos);
    out.neg_mean = g.mean(e_neg);
    Graph::NodeId contrast = g.sub(out.pos_mean, out.neg_mean);
    if (reg_coef == 0.0) {
        out.total = contrast;
        return out;
    }
    Graph::NodeId reg = g.mean(g.mul(e_neg, e_neg));
    if (kind == RegKind::Scalar) {
        reg = g.add(g.mean(g.mul(e_pos, e_pos)), reg);
    }
    out.reg = reg;
    out.total = g.add(contrast, g.scale(reg, reg_coef));
    return out;
}

StepResult mpdr_step(EnergyModel& model, const ManifoldEnsemble& ensemble, const Tensor& batch,
                     const MpdrTrainConfig& cfg, Adam& opt, Rng& rng,
                     const NegativeSampler* negative_override) {
    cfg.validate();
    ensemble.validate();
    if (batch.rank() != 2 || batch.rows() == 0) {
        throw ConfigError("mpdr step: batch must be a non-empty matrix, got shape " +
                          batch.shape_string());
    }
    if (batch.cols() != model.input_dim()) {
        throw ConfigError("mpdr step: batch has " + std::to_string(batch.cols()) +
                          " columns, model expects " + std::to_string(model.input_dim()));
    }
    if (ensemble.size() != cfg.ensemble_k) {
        throw ConfigError("mpdr step: config expects " + std::to_string(cfg.ensemble_k) +
                          " ensemble members, got " + std::to_string(ensemble.size()));
    }

    const std::size_t rows = batch.rows();
    std::vector<double> sigmas = sample_sigma(cfg.sigma_range, rng, rows);

    Tensor x_minus;
    if (negative_override != nullptr) {
        x_minus = (*negative_override)(batch, sigmas, rng);
        if (!x_minus.same_shape(batch)) {
            throw ContractError("mpdr step: negative sampler returned shape " +
                                x_minus.shape_string() + ", expected " + batch.shape_string());
        }
    } else if (rows < ensemble.size()) {
        // A kept partial batch can be smaller than the ensemble; round-robin
        // over the first `rows` members so every sample still lands in
        // exactly one group.
        ManifoldEnsemble trimmed;
        trimmed.sigma_range = ensemble.sigma_range;
        trimmed.members.assign(ensemble.members.begin(),
                               ensemble.members.begin() + static_cast<std::ptrdiff_t>(rows));
        x_minus = two_stage_sample(model, trimmed, batch, sigmas, cfg.latent_chain,
                                   cfg.visible_chain, cfg.recovery, rng, cfg.latent_reproject)
                      .x_minus;
    } else {
        x_minus = two_stage_sample(model, ensemble, batch, sigmas, cfg.latent_chain,
                                   cfg.visible_chain, cfg.recovery, rng, cfg.latent_reproject)
                      .x_minus;
    }

    Graph g;
    MpdrLoss loss = build_mpdr_loss(g, model, batch, x_minus, cfg.reg_kind, cfg.reg_coef);
    Bindings bind;
    model.bind_params(bind, loss.theta);
    std::vector<Graph::NodeId> watch = {loss.pos_mean, loss.neg_mean};
    if (loss.reg != Graph::kNoNode) watch.push_back(loss.reg);
    GradientResult res = gradient(g, loss.total, bind, loss.theta, watch);
    opt.step(model.params(), res.grads);

    StepResult out;
    out.loss = res.value;
    out.pos_energy = res.watched[0].item();
    out.neg_energy = res.watched[1].item();
    out.reg = loss.reg != Graph::kNoNode ? res.watched[2].item() : 0.0;
    return out;
}

TrainHistory train(EnergyModel& model, const ManifoldEnsemble& ensemble, const Dataset& data,
                   const MpdrTrainConfig& cfg, const NegativeSampler* negative_override) {
    cfg.validate();
    ensemble.validate();
    if (data.size() == 0) throw ConfigError("train: empty dataset");
    if (data.dim() != model.input_dim()) {
        throw ConfigError("train: dataset dimension " + std::to_string(data.dim()) +
                          " does not match model input dimension " +
                          std::to_string(model.input_dim()));
    }

    const std::uint64_t frozen = ensemble.checksum();
    const std::size_t n = data.size();

    Rng rng(cfg.seed);
    Rng shuffle_rng = rng.split(1);
    Rng val_rng = rng.split(2);

    // One fixed outlier set keeps the validation AUROC comparable across
    // epochs.
    Tensor val_outliers;
    if (cfg.val_outliers > 0) {
        val_outliers = manifold_uniform_points(ensemble, data.rows, cfg.val_outliers, val_rng);
    }

    AdamConfig acfg;
    acfg.lr = cfg.lr;
    Adam opt(acfg);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    TrainHistory history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_in_place(order, shuffle_rng);
        double pos_sum = 0.0, neg_sum = 0.0, loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t stop = std::min(n, start + cfg.batch_size);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            Tensor batch = data.rows.gather_rows(idx);
            StepResult step;
            try {
                step = mpdr_step(model, ensemble, batch, cfg, opt, rng, negative_override);
            } catch (const NumericError& e) {
                throw NumericError("train: epoch " + std::to_string(epoch) + ", batch at sample " +
                                   std::to_string(start) + ": " + e.what());
            }
            const double w = static_cast<double>(stop - start);
            pos_sum += step.pos_energy * w;
            neg_sum += step.neg_energy * w;
            loss_sum += step.loss * w;
        }
        EpochRecord rec;
        rec.pos_energy = pos_sum / static_cast<double>(n);
        rec.neg_energy = neg_sum / static_cast<double>(n);
        rec.loss = loss_sum / static_cast<double>(n);
        if (cfg.val_outliers > 0) {
            rec.val_auroc = validation_auroc(model, data.rows, val_outliers);
        }
        history.epochs.push_back(rec);
    }

    if (ensemble.checksum() != frozen) {
        throw std::logic_error("train: ensemble parameters changed during training");
    }
    return history;
}

double consistency_smoke(const Dataset& data, double initial_mean, const MpdrTrainConfig& cfg) {
    if (data.size() == 0 || data.dim() != 1) {
        throw ConfigError("consistency smoke: expects non-empty one-dimensional data");
    }
    if (cfg.ensemble_k != 1) {
        throw ConfigError("consistency smoke: runs a single identity manifold");
    }
    // Zero step size moves nothing; the general config contract demands a
    // positive rate, so the degenerate case resolves here.
    if (cfg.lr == 0.0) return initial_mean;
    QuadraticMeanEnergy model(Tensor::vector({initial_mean}));
    ManifoldEnsemble ensemble;
    ensemble.members.push_back(Autoencoder::identity(1));
    ensemble.sigma_range = cfg.sigma_range;
    train(model, ensemble, data, cfg);
    return model.mean()[0];
}

} // namespace mpdr
