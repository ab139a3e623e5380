#include <iostream>
#include <memory>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mpdr/error.hpp"

namespace {

using CommandFn = void (*)(const mpdr::cli::CliOptions&);

/// Option storage for one subcommand; overrides only apply when the flag was
/// actually given.
struct SubState {
    mpdr::cli::CliOptions opts;
    std::uint64_t seed = 0;
    std::string out;
    std::string label;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* label_opt = nullptr;
};

void attach(CLI::App& app, const char* name, const char* help, CommandFn fn,
            std::vector<std::unique_ptr<SubState>>& states) {
    auto state = std::make_unique<SubState>();
    SubState* st = state.get();
    states.push_back(std::move(state));

    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", st->opts.config_path, "Experiment config file")->required();
    st->seed_opt = cmd->add_option("--seed", st->seed, "Override the [experiment] seed");
    st->out_opt = cmd->add_option("--out", st->out, "Override the output directory");
    st->label_opt =
        cmd->add_option("--label-col", st->label, "CSV label column: none or last");
    cmd->add_flag("--no-latent-reproject", st->opts.no_latent_reproject,
                  "Skip the spherical re-projection of diffused latents");
    cmd->callback([st, fn] {
        if (st->seed_opt->count() > 0) st->opts.seed = st->seed;
        if (st->out_opt->count() > 0) st->opts.out = st->out;
        if (st->label_opt->count() > 0) st->opts.label_col = st->label;
        fn(st->opts);
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manifold projection-diffusion recovery experiments"};
    app.require_subcommand(1);

    std::vector<std::unique_ptr<SubState>> states;
    attach(app, "pretrain-ae", "Pretrain the manifold autoencoder ensemble",
           mpdr::cli::cmd_pretrain_ae, states);
    attach(app, "train", "Train the energy model against the pretrained manifolds",
           mpdr::cli::cmd_train, states);
    attach(app, "eval", "Score inlier and outlier files and report ranking metrics",
           mpdr::cli::cmd_eval, states);
    attach(app, "density-grid", "Dump grid energies and densities with the l1 error",
           mpdr::cli::cmd_density_grid, states);
    attach(app, "sample", "Dump negative samples drawn through the two-stage sampler",
           mpdr::cli::cmd_sample, states);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error code=usage message=" << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error code=" << mpdr::error_code(e) << " message=" << e.what() << "\n";
        return 1;
    }
    return 0;
}
