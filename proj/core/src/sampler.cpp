#include "mpdr/sampler.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "mpdr/error.hpp"

namespace mpdr {

void ChainSpec::validate() const {
    if (!(step_size >= 0.0) || !std::isfinite(step_size) || !(noise_scale >= 0.0) ||
        !std::isfinite(noise_scale)) {
        throw ConfigError("chain: step size and noise scale must be finite and non-negative");
    }
    if (constraint == Constraint::Clamp && !(clamp_lo < clamp_hi)) {
        throw ConfigError("chain: clamp bounds must satisfy lo < hi");
    }
}

namespace {

void project_rows_to_sphere(Tensor& x) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) norm += x.at(i, j) * x.at(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            throw DegenerateInputError("sphere projection of near-zero row " + std::to_string(i) +
                                       " in a sampling chain");
        }
        for (std::size_t j = 0; j < x.cols(); ++j) x.at(i, j) /= norm;
    }
}

void apply_constraint(Tensor& x, const ChainSpec& spec) {
    switch (spec.constraint) {
        case Constraint::None: break;
        case Constraint::Sphere:
            project_rows_to_sphere(x);
            break;
        case Constraint::Clamp:
            for (std::size_t i = 0; i < x.numel(); ++i) {
                x[i] = std::min(spec.clamp_hi, std::max(spec.clamp_lo, x[i]));
            }
            break;
    }
}

// Recovery (or pullback) energy with everything frozen, built once so the
// chain only rebinds its iterate.
EnergyGradFn frozen_energy_fn(const EnergyModel& model, const Autoencoder& ae,
                              const Tensor& z_tilde, std::span<const double> sigma, double gamma,
                              Space space, std::size_t batch, std::size_t dim) {
    auto g = std::make_shared<Graph>();
    Graph::NodeId p = g->placeholder({batch, dim}, "chain_point");
    Graph::NodeId e = space == Space::Visible
                          ? build_recovery_energy(*g, model, ae, p, z_tilde, sigma, gamma, nullptr)
                          : build_latent_energy(*g, model, ae, p, z_tilde, sigma, gamma, nullptr);
    Graph::NodeId total = g->sum(e);

    EnergyGradFn fn;
    fn.energy = [g, p, e](const Tensor& x) {
        Bindings b;
        b.set(p, x);
        return evaluate(*g, e, b);
    };
    fn.grad = [g, p, total](const Tensor& x) {
        Bindings b;
        b.set(p, x);
        std::vector<Graph::NodeId> wrt{p};
        return gradient(*g, total, b, wrt).grads[0];
    };
    return fn;
}

} // namespace

ChainResult lmc(const EnergyGradFn& fn, const Tensor& x0, const ChainSpec& spec, Rng& rng) {
    spec.validate();
    if (x0.rank() != 2) {
        throw ContractError("lmc: chain state must be a batch of rows, got " + x0.shape_string());
    }

    ChainResult result;
    result.initial = x0;
    result.energy_start = fn.energy(x0);

    Tensor x = x0;
    for (std::size_t step = 0; step < spec.steps; ++step) {
        Tensor g = fn.grad(x);
        if (!g.all_finite()) {
            throw NumericError("lmc: non-finite gradient at step " + std::to_string(step));
        }
        for (std::size_t i = 0; i < x.numel(); ++i) {
            x[i] -= spec.step_size * g[i];
        }
        if (spec.noise_scale > 0.0) {
            for (std::size_t i = 0; i < x.numel(); ++i) {
                x[i] += spec.noise_scale * rng.normal();
            }
        }
        apply_constraint(x, spec);
    }

    result.energy_end = spec.steps == 0 ? result.energy_start : fn.energy(x);
    result.final = std::move(x);
    result.accepted = spec.steps;
    return result;
}

Tensor latent_chain(const EnergyModel& model, const Autoencoder& ae, const Tensor& z_tilde,
                    const ChainSpec& spec, const RecoveryConfig& cfg,
                    std::span<const double> sigma, Rng& rng) {
    if (spec.space != Space::Latent) {
        throw ContractError("latent_chain: spec.space must be latent");
    }
    spec.validate();
    cfg.validate();
    if (spec.steps == 0) return z_tilde; // chain disabled

    ChainSpec effective = spec;
    if (ae.spherical()) effective.constraint = Constraint::Sphere;
    EnergyGradFn fn = frozen_energy_fn(model, ae, z_tilde, sigma, cfg.gamma_latent, Space::Latent,
                                       z_tilde.rows(), ae.latent_dim());
    return lmc(fn, z_tilde, effective, rng).final;
}

Tensor visible_chain(const EnergyModel& model, const Autoencoder& ae, const Tensor& x0,
                     const Tensor& z_tilde, const ChainSpec& spec, const RecoveryConfig& cfg,
                     std::span<const double> sigma, Rng& rng) {
    if (spec.space != Space::Visible) {
        throw ContractError("visible_chain: spec.space must be visible");
    }
    spec.validate();
    cfg.validate();
    if (spec.steps == 0) return x0;

    EnergyGradFn fn = frozen_energy_fn(model, ae, z_tilde, sigma, cfg.gamma_visible,
                                       Space::Visible, x0.rows(), ae.input_dim());
    return lmc(fn, x0, spec, rng).final;
}

TwoStageResult two_stage_sample(const EnergyModel& model, const ManifoldEnsemble& ensemble,
                                const Tensor& x, std::span<const double> sigmas,
                                const ChainSpec& latent_spec, const ChainSpec& visible_spec,
                                const RecoveryConfig& cfg, Rng& rng, bool reproject) {
    ensemble.validate();
    cfg.validate();
    if (x.rank() != 2 || x.rows() == 0) {
        throw ConfigError("two_stage_sample: need a non-empty batch of rows, got " +
                          x.shape_string());
    }
    if (x.cols() != ensemble.members.front().input_dim() || x.cols() != model.input_dim()) {
        throw ConfigError("two_stage_sample: data dimension " + std::to_string(x.cols()) +
                          " does not match the model or the ensemble");
    }
    if (sigmas.size() != x.rows()) {
        throw ContractError("two_stage_sample: " + std::to_string(sigmas.size()) +
                            " sigmas for a batch of " + std::to_string(x.rows()));
    }

    TwoStageResult result;
    result.x_minus = Tensor::zeros_like(x);
    result.groups = split_batch(x.rows(), ensemble.members.size());

    for (std::size_t k = 0; k < result.groups.size(); ++k) {
        const std::vector<std::size_t>& idx = result.groups[k];
        const Autoencoder& ae = ensemble.members[k];

        Tensor xk = x.gather_rows(idx);
        std::vector<double> sk(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) sk[i] = sigmas[idx[i]];

        PerturbationRecord rec = mpd_perturb(ae, xk, sk, rng, reproject);
        rec.manifold_index.assign(idx.size(), k);

        Tensor z_minus = latent_chain(model, ae, rec.z_tilde, latent_spec, cfg, sk, rng);
        Tensor x_start = ae.decode(z_minus);
        Tensor x_minus = visible_chain(model, ae, x_start, rec.z_tilde, visible_spec, cfg, sk, rng);

        result.x_minus.scatter_rows(idx, x_minus);
        result.records.push_back(std::move(rec));
    }
    return result;
}

} // namespace mpdr
