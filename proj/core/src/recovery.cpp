#include "mpdr/recovery.hpp"

#include <cmath>

#include "mpdr/error.hpp"

namespace mpdr {

const char* space_name(Space s) { return s == Space::Visible ? "visible" : "latent"; }

void RecoveryConfig::validate() const {
    if (!(gamma_visible >= 0.0) || !std::isfinite(gamma_visible) || !(gamma_latent >= 0.0) ||
        !std::isfinite(gamma_latent)) {
        throw ConfigError("recovery gammas must be finite and non-negative");
    }
}

namespace {

void validate_sigma(std::span<const double> sigma, std::size_t batch) {
    if (sigma.size() != 1 && sigma.size() != batch) {
        throw ContractError("recovery: " + std::to_string(sigma.size()) + " sigmas for a batch of " +
                            std::to_string(batch));
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw ConfigError("recovery: sigma must be positive");
    }
}

// One coefficient gamma/(2 sigma^2) per row.
Tensor perturbation_coeffs(std::span<const double> sigma, std::size_t batch, double gamma) {
    Tensor c({batch});
    for (std::size_t i = 0; i < batch; ++i) {
        double s = sigma[sigma.size() == 1 ? 0 : i];
        c[i] = gamma / (2.0 * s * s);
    }
    return c;
}

void check_gamma(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("recovery: gamma must be finite and non-negative");
    }
}

void check_z_tilde(const Autoencoder& ae, const Tensor& z_tilde, std::size_t batch) {
    if (z_tilde.rank() != 2 || z_tilde.rows() != batch || z_tilde.cols() != ae.latent_dim()) {
        throw ConfigError("recovery: z_tilde shape " + z_tilde.shape_string() +
                          " does not match batch " + std::to_string(batch) + " x latent dim " +
                          std::to_string(ae.latent_dim()));
    }
}

} // namespace

Graph::NodeId build_recovery_energy(Graph& g, const EnergyModel& model, const Autoencoder& ae,
                                    Graph::NodeId x, const Tensor& z_tilde,
                                    std::span<const double> sigma, double gamma,
                                    std::vector<Graph::NodeId>* theta_io) {
    check_gamma(gamma);
    const auto& xshape = g.shape(x);
    if (xshape.size() != 2 || xshape[1] != model.input_dim() || xshape[1] != ae.input_dim()) {
        throw ConfigError("recovery: input node has shape " + g.describe(x) +
                          " but model and autoencoder expect dimension " +
                          std::to_string(model.input_dim()));
    }
    std::size_t batch = xshape[0];
    validate_sigma(sigma, batch);
    check_z_tilde(ae, z_tilde, batch);

    Graph::NodeId base = model.build(g, x, theta_io);
    if (gamma == 0.0) return base; // exactly the model energy

    Tensor coeffs = perturbation_coeffs(sigma, batch, gamma);
    Graph::NodeId enc = ae.build_encoder(g, x, nullptr);
    Graph::NodeId resid = g.row_sqnorm(g.sub(g.constant(z_tilde, "z_tilde"), enc));
    return g.add(base, g.mul(g.constant(std::move(coeffs), "recovery_coeff"), resid));
}

Graph::NodeId build_latent_energy(Graph& g, const EnergyModel& model, const Autoencoder& ae,
                                  Graph::NodeId z, const Tensor& z_tilde,
                                  std::span<const double> sigma, double gamma,
                                  std::vector<Graph::NodeId>* theta_io) {
    const auto& zshape = g.shape(z);
    if (zshape.size() != 2 || zshape[1] != ae.latent_dim()) {
        throw ConfigError("recovery: latent node has shape " + g.describe(z) +
                          " but the autoencoder's latent dimension is " +
                          std::to_string(ae.latent_dim()));
    }
    Graph::NodeId decoded = ae.build_decoder(g, z, nullptr);
    return build_recovery_energy(g, model, ae, decoded, z_tilde, sigma, gamma, theta_io);
}

Tensor recovery_energy(const EnergyModel& model, const Autoencoder& ae, const Tensor& x,
                       const Tensor& z_tilde, std::span<const double> sigma, double gamma) {
    Graph g;
    Graph::NodeId xn = g.constant(x);
    Graph::NodeId e = build_recovery_energy(g, model, ae, xn, z_tilde, sigma, gamma, nullptr);
    return evaluate(g, e, Bindings{});
}

Tensor latent_energy(const EnergyModel& model, const Autoencoder& ae, const Tensor& z,
                     const Tensor& z_tilde, std::span<const double> sigma, double gamma) {
    Graph g;
    Graph::NodeId zn = g.constant(z);
    Graph::NodeId e = build_latent_energy(g, model, ae, zn, z_tilde, sigma, gamma, nullptr);
    return evaluate(g, e, Bindings{});
}

Tensor grad_recovery(const EnergyModel& model, const Autoencoder& ae, const Tensor& point,
                     const Tensor& z_tilde, std::span<const double> sigma, double gamma,
                     Space space) {
    Graph g;
    Graph::NodeId p = g.placeholder({point.rows(), point.cols()}, "point");
    Graph::NodeId e = space == Space::Visible
                          ? build_recovery_energy(g, model, ae, p, z_tilde, sigma, gamma, nullptr)
                          : build_latent_energy(g, model, ae, p, z_tilde, sigma, gamma, nullptr);
    Graph::NodeId total = g.sum(e);
    Bindings b;
    b.set(p, point);
    std::vector<Graph::NodeId> wrt{p};
    return gradient(g, total, b, wrt).grads[0];
}

} // namespace mpdr
