#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <vector>

#include "mpdr/checkpoint.hpp"
#include "mpdr/config.hpp"
#include "mpdr/data.hpp"
#include "mpdr/energy.hpp"
#include "mpdr/error.hpp"
#include "mpdr/manifold.hpp"
#include "mpdr/metrics.hpp"
#include "mpdr/parallel.hpp"
#include "mpdr/trainer.hpp"

namespace mpdr::cli {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory '" + out + "': " + ec.message());
}

/// The parsed config plus the values every command starts from. Child seeds
/// are derived from the root seed through fixed split keys: 3 energy init,
/// 4 energy pretrain, 5 preprocessing noise, 6 negative dumps, 10+i ensemble
/// member i.
struct Experiment {
    Config cfg;
    std::uint64_t seed = 0;
    std::string out;
};

Experiment resolve_experiment(const CliOptions& opts) {
    Experiment ex;
    ex.cfg = load_config(opts.config_path);
    ex.cfg.allow_sections({"experiment", "data", "autoencoder", "energy", "train",
                           "latent_chain", "visible_chain", "metrics", "eval", "density",
                           "sample"});
    const ConfigSection& s = ex.cfg.section("experiment");
    s.allow_keys({"seed", "out"});
    ex.seed = opts.seed ? *opts.seed : s.get_u64("seed");
    ex.out = opts.out ? *opts.out : s.get_string("out", ".");
    return ex;
}

bool parse_label_col(const std::string& v, const std::string& where) {
    if (v == "none") return false;
    if (v == "last") return true;
    throw ConfigError(where + ": expected none or last, got '" + v + "'");
}

Dataset filter_inliers(const Dataset& ds) {
    if (!ds.has_labels()) {
        throw ConfigError("config: [data] inliers_only needs a label column");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == 0) keep.push_back(i);
    }
    if (keep.empty()) throw ConfigError("config: [data] no rows labeled 0 to train on");
    Dataset out;
    out.rows = ds.rows.gather_rows(keep);
    out.labels.assign(keep.size(), 0);
    out.meta = ds.meta;
    return out;
}

struct LoadedData {
    Dataset ds;
    PreprocessStats stats;
};

LoadedData resolve_dataset(const Experiment& ex, const CliOptions& opts) {
    const ConfigSection& d = ex.cfg.section("data");
    const std::string source = d.get_string("source");
    Dataset ds;
    bool inliers_only = false;
    if (source == "eight-gaussians") {
        d.allow_keys({"source", "n", "radius", "stddev", "standardize", "sphere_normalize",
                      "noise_std"});
        ds = make_eight_gaussians(d.get_size("n", 2048), d.get_double("radius", 2.0),
                                  d.get_double("stddev", 0.25), ex.seed);
    } else if (source == "circle-benchmark" || source == "sphere-shell-benchmark") {
        d.allow_keys({"source", "dim", "n_in", "n_out", "inliers_only", "standardize",
                      "sphere_normalize", "noise_std"});
        ManifoldKind kind =
            source == "circle-benchmark" ? ManifoldKind::Circle : ManifoldKind::SphereShell;
        ds = make_manifold_benchmark(kind, d.get_size("dim", 2), d.get_size("n_in", 1024),
                                     d.get_size("n_out", 0), ex.seed);
        inliers_only = d.get_bool("inliers_only", true);
    } else if (source == "csv") {
        d.allow_keys({"source", "path", "label_col", "inliers_only", "standardize",
                      "sphere_normalize", "noise_std"});
        const std::string label =
            opts.label_col ? *opts.label_col : d.get_string("label_col", "none");
        ds = load_csv(d.get_string("path"), parse_label_col(label, "config: [data] label_col"));
        inliers_only = d.get_bool("inliers_only", false);
    } else {
        throw ConfigError("config: [data] unknown source '" + source + "'");
    }
    if (inliers_only) ds = filter_inliers(ds);

    std::vector<PreprocessOp> ops;
    if (d.get_bool("standardize", false)) ops.push_back(PreprocessOp::Standardize);
    if (d.get_bool("sphere_normalize", false)) ops.push_back(PreprocessOp::SphereNormalize);
    const double noise = d.get_double("noise_std", 0.0);
    if (noise < 0.0) throw ConfigError("config: [data] noise_std must be non-negative");
    if (noise > 0.0) ops.push_back(PreprocessOp::AddGaussianNoise);

    Rng noise_rng = Rng(ex.seed).split(5);
    LoadedData out{std::move(ds), {}};
    out.stats = preprocess(out.ds, ops, noise_rng, noise > 0.0 ? noise : 0.01);
    return out;
}

AutoencoderSpec spec_from(const ConfigSection& s, std::size_t input_dim) {
    AutoencoderSpec spec;
    spec.input_dim = input_dim;
    spec.latent_dim = s.get_size("latent_dim");
    spec.enc_hidden = s.get_size_list("enc_hidden", {});
    spec.dec_hidden = s.get_size_list("dec_hidden", {});
    spec.act = parse_activation(s.get_string("activation", "leaky_relu"));
    spec.spherical = s.get_bool("spherical", true);
    spec.dec_out = parse_output_transform(s.get_string("dec_out", "none"));
    return spec;
}

bool same_spec(const AutoencoderSpec& a, const AutoencoderSpec& b) {
    return a.input_dim == b.input_dim && a.latent_dim == b.latent_dim &&
           a.enc_hidden == b.enc_hidden && a.dec_hidden == b.dec_hidden && a.act == b.act &&
           a.spherical == b.spherical && a.dec_out == b.dec_out;
}

PretrainConfig pretrain_from(const ConfigSection& s) {
    PretrainConfig pre;
    pre.epochs = s.get_size("epochs", pre.epochs);
    pre.lr = s.get_double("lr", pre.lr);
    pre.batch_size = s.get_size("batch_size", pre.batch_size);
    pre.weight_decay_enc = s.get_double("weight_decay", pre.weight_decay_enc);
    return pre;
}

struct AeJob {
    AutoencoderSpec spec;
    PretrainConfig pre;
};

std::vector<AeJob> resolve_autoencoders(const Experiment& ex, std::size_t input_dim) {
    auto sections = ex.cfg.all("autoencoder");
    if (sections.empty()) throw ConfigError("config: missing section [autoencoder]");
    std::vector<AeJob> jobs;
    for (const ConfigSection* s : sections) {
        s->allow_keys({"count", "latent_dim", "enc_hidden", "dec_hidden", "activation",
                       "spherical", "dec_out", "epochs", "lr", "batch_size", "weight_decay"});
        const std::size_t count = s->get_size("count", 1);
        if (count == 0) throw ConfigError("config: [autoencoder] count must be positive");
        if (count > 1 && sections.size() > 1) {
            throw ConfigError("config: [autoencoder] count only replicates a single section");
        }
        const AeJob job{spec_from(*s, input_dim), pretrain_from(*s)};
        for (std::size_t i = 0; i < count; ++i) jobs.push_back(job);
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        jobs[i].pre.seed = Rng(ex.seed).split(10 + i).seed();
    }
    return jobs;
}

ChainSpec resolve_chain(const Experiment& ex, const char* name, Space space, double& gamma) {
    ChainSpec spec;
    spec.space = space;
    if (!ex.cfg.has_section(name)) return spec;
    const ConfigSection& s = ex.cfg.section(name);
    s.allow_keys({"steps", "step_size", "noise_scale", "gamma", "constraint", "clamp_lo",
                  "clamp_hi"});
    spec.steps = s.get_size("steps", 0);
    spec.step_size = s.get_double("step_size", 0.0);
    spec.noise_scale = s.get_double("noise_scale", 0.0);
    gamma = s.get_double("gamma", gamma);
    const std::string c = s.get_string("constraint", "none");
    if (c == "none") {
        spec.constraint = Constraint::None;
    } else if (c == "sphere") {
        spec.constraint = Constraint::Sphere;
    } else if (c == "clamp") {
        spec.constraint = Constraint::Clamp;
    } else {
        throw ConfigError("config: [" + std::string(name) + "] unknown constraint '" + c + "'");
    }
    spec.clamp_lo = s.get_double("clamp_lo", spec.clamp_lo);
    spec.clamp_hi = s.get_double("clamp_hi", spec.clamp_hi);
    return spec;
}

RegKind parse_reg(const std::string& v) {
    if (v == "scalar") return RegKind::Scalar;
    if (v == "reconstruction") return RegKind::Reconstruction;
    throw ConfigError("config: [train] unknown reg '" + v + "'");
}

MpdrTrainConfig resolve_train(const Experiment& ex, const CliOptions& opts, std::size_t k) {
    MpdrTrainConfig t;
    t.latent_chain = resolve_chain(ex, "latent_chain", Space::Latent, t.recovery.gamma_latent);
    t.visible_chain =
        resolve_chain(ex, "visible_chain", Space::Visible, t.recovery.gamma_visible);
    if (ex.cfg.has_section("train")) {
        const ConfigSection& s = ex.cfg.section("train");
        s.allow_keys({"epochs", "batch_size", "lr", "reg", "reg_coef", "sigma_min", "sigma_max",
                      "val_outliers", "latent_reproject"});
        t.epochs = s.get_size("epochs", t.epochs);
        t.batch_size = s.get_size("batch_size", t.batch_size);
        t.lr = s.get_double("lr", t.lr);
        t.reg_kind = parse_reg(s.get_string("reg", "scalar"));
        t.reg_coef = s.get_double("reg_coef", t.reg_coef);
        t.sigma_range.min = s.get_double("sigma_min", t.sigma_range.min);
        t.sigma_range.max = s.get_double("sigma_max", t.sigma_range.max);
        t.val_outliers = s.get_size("val_outliers", t.val_outliers);
        t.latent_reproject = s.get_bool("latent_reproject", true);
    }
    if (opts.no_latent_reproject) t.latent_reproject = false;
    t.ensemble_k = k;
    t.seed = ex.seed;
    return t;
}

std::string member_path(const Experiment& ex, std::size_t i) {
    return ex.out + "/ae_" + std::to_string(i) + ".ckpt";
}

ManifoldEnsemble load_ensemble(const Experiment& ex, std::size_t k, std::size_t data_dim,
                               SigmaRange range) {
    ManifoldEnsemble ens;
    ens.sigma_range = range;
    for (std::size_t i = 0; i < k; ++i) {
        const std::string path = member_path(ex, i);
        Autoencoder ae = autoencoder_from_checkpoint(load_checkpoint(path));
        if (ae.input_dim() != data_dim) {
            throw ConfigError("checkpoint '" + path + "' expects dimension " +
                              std::to_string(ae.input_dim()) + ", data has dimension " +
                              std::to_string(data_dim));
        }
        ens.members.push_back(std::move(ae));
    }
    return ens;
}

std::unique_ptr<EnergyModel> resolve_energy(const Experiment& ex, std::size_t input_dim,
                                            const Autoencoder& member0, const Dataset& data) {
    const ConfigSection& s = ex.cfg.section("energy");
    const std::string kind = s.get_string("kind");
    if (kind == "scalar") {
        s.allow_keys({"kind", "hidden", "activation"});
        MlpSpec spec;
        spec.widths.push_back(input_dim);
        for (std::size_t w : s.get_size_list("hidden", {32, 32})) spec.widths.push_back(w);
        spec.widths.push_back(1);
        spec.hidden_act = parse_activation(s.get_string("activation", "leaky_relu"));
        Rng init = Rng(ex.seed).split(3);
        return std::make_unique<ScalarEnergy>(spec, init);
    }
    if (kind == "quadratic_mean") {
        s.allow_keys({"kind", "mu"});
        const double mu = s.get_double("mu", 0.0);
        return std::make_unique<QuadraticMeanEnergy>(
            Tensor::vector(std::vector<double>(input_dim, mu)));
    }
    if (kind == "reconstruction") {
        s.allow_keys({"kind", "init", "latent_dim", "enc_hidden", "dec_hidden", "activation",
                      "spherical", "dec_out", "epochs", "lr", "batch_size", "weight_decay"});
        const bool own_spec = s.has("latent_dim") || s.has("enc_hidden") ||
                              s.has("dec_hidden") || s.has("activation") ||
                              s.has("spherical") || s.has("dec_out");
        const AutoencoderSpec spec = own_spec ? spec_from(s, input_dim) : member0.spec();
        const std::string init = s.get_string("init", "auto");
        const bool matches = same_spec(spec, member0.spec());
        if (init == "copy" && !matches) {
            throw ConfigError(
                "config: [energy] init=copy needs the first manifold member's architecture");
        }
        if (init == "copy" || (init == "auto" && matches)) {
            return std::make_unique<ReconstructionEnergy>(member0);
        }
        if (init == "random") {
            Rng rng = Rng(ex.seed).split(3);
            return std::make_unique<ReconstructionEnergy>(spec, rng);
        }
        if (init == "auto" || init == "pretrain") {
            PretrainConfig pre = pretrain_from(s);
            pre.seed = Rng(ex.seed).split(4).seed();
            return std::make_unique<ReconstructionEnergy>(
                pretrain_autoencoder(data, spec, pre).ae);
        }
        throw ConfigError("config: [energy] unknown init '" + init + "'");
    }
    throw ConfigError("config: [energy] unknown kind '" + kind + "'");
}

/// Per-row energies, chunked across the thread budget. Rows are independent,
/// so the split cannot change any value.
std::vector<double> score_energies(const EnergyModel& model, const Tensor& rows) {
    std::vector<double> out(rows.rows());
    parallel_for(rows.rows(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> idx(end - begin);
        std::iota(idx.begin(), idx.end(), begin);
        Tensor en = model.energy(rows.gather_rows(idx));
        for (std::size_t i = begin; i < end; ++i) out[i] = en[i - begin];
    });
    return out;
}

void check_dim(const EnergyModel& model, const Dataset& ds, const std::string& path) {
    if (ds.dim() != model.input_dim()) {
        throw ConfigError("model expects dimension " + std::to_string(model.input_dim()) +
                          ", '" + path + "' has dimension " + std::to_string(ds.dim()));
    }
}

} // namespace

void cmd_pretrain_ae(const CliOptions& opts) {
    Experiment ex = resolve_experiment(opts);
    LoadedData data = resolve_dataset(ex, opts);
    std::vector<AeJob> jobs = resolve_autoencoders(ex, data.ds.dim());
    ensure_out_dir(ex.out);

    std::string history;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        PretrainResult r = pretrain_autoencoder(data.ds, jobs[i].spec, jobs[i].pre);
        Checkpoint c = checkpoint_of_autoencoder(r.ae);
        c.preprocess = data.stats;
        c.config_hash = ex.cfg.content_hash;
        c.seed = ex.seed;
        save_checkpoint(c, member_path(ex, i));
        // epoch=0 is the untrained loss; epochs+1 lines per member.
        for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
            history += "member=" + std::to_string(i) + " epoch=" + std::to_string(e) +
                       " loss=" + fmt17(r.epoch_loss[e]) + "\n";
        }
    }
    write_text(ex.out + "/pretrain_history.txt", history);
}

void cmd_train(const CliOptions& opts) {
    Experiment ex = resolve_experiment(opts);
    LoadedData data = resolve_dataset(ex, opts);
    std::vector<AeJob> jobs = resolve_autoencoders(ex, data.ds.dim());
    MpdrTrainConfig tcfg = resolve_train(ex, opts, jobs.size());
    ManifoldEnsemble ens = load_ensemble(ex, jobs.size(), data.ds.dim(), tcfg.sigma_range);
    std::unique_ptr<EnergyModel> model =
        resolve_energy(ex, data.ds.dim(), ens.members.front(), data.ds);

    TrainHistory hist = train(*model, ens, data.ds, tcfg);

    ensure_out_dir(ex.out);
    std::string lines;
    for (std::size_t e = 0; e < hist.epochs.size(); ++e) {
        const EpochRecord& r = hist.epochs[e];
        lines += "epoch=" + std::to_string(e + 1) + " pos_energy=" + fmt17(r.pos_energy) +
                 " neg_energy=" + fmt17(r.neg_energy) + " loss=" + fmt17(r.loss);
        if (r.val_auroc) lines += " val_auroc=" + fmt17(*r.val_auroc);
        lines += "\n";
    }
    write_text(ex.out + "/train_history.txt", lines);

    Checkpoint c = checkpoint_of_model(*model);
    c.preprocess = data.stats;
    c.config_hash = ex.cfg.content_hash;
    c.seed = ex.seed;
    save_checkpoint(c, ex.out + "/energy.ckpt");
}

void cmd_eval(const CliOptions& opts) {
    Experiment ex = resolve_experiment(opts);
    const ConfigSection& s = ex.cfg.section("eval");
    s.allow_keys({"model", "inliers", "outliers"});
    const std::string model_path = s.get_string("model", ex.out + "/energy.ckpt");
    const std::string inlier_path = s.get_string("inliers");
    const std::string outlier_path = s.get_string("outliers");

    Checkpoint c = load_checkpoint(model_path);
    std::unique_ptr<EnergyModel> model = model_from_checkpoint(c);

    Dataset inliers = load_csv(inlier_path);
    Dataset outliers = load_csv(outlier_path);
    check_dim(*model, inliers, inlier_path);
    check_dim(*model, outliers, outlier_path);
    apply_preprocess(inliers, c.preprocess);
    apply_preprocess(outliers, c.preprocess);

    ScoredSamples scored;
    scored.normal = score_energies(*model, inliers.rows);
    scored.anomalous = score_energies(*model, outliers.rows);

    bool want_auroc = true, want_pauroc = true, want_aupr = true;
    double p = 0.1;
    if (ex.cfg.has_section("metrics")) {
        const ConfigSection& m = ex.cfg.section("metrics");
        m.allow_keys({"auroc", "pauroc", "pauroc_p", "aupr"});
        want_auroc = m.get_bool("auroc", true);
        want_pauroc = m.get_bool("pauroc", true);
        p = m.get_double("pauroc_p", 0.1);
        want_aupr = m.get_bool("aupr", true);
    }

    ensure_out_dir(ex.out);
    std::string rep;
    rep += "normal_count=" + std::to_string(scored.normal.size()) + "\n";
    rep += "anomalous_count=" + std::to_string(scored.anomalous.size()) + "\n";
    if (want_auroc) rep += "auroc=" + fmt17(auroc(scored)) + "\n";
    if (want_pauroc) {
        rep += "pauroc_p=" + fmt17(p) + "\n";
        rep += "pauroc=" + fmt17(pauroc(scored, p)) + "\n";
    }
    if (want_aupr) rep += "aupr=" + fmt17(aupr(scored)) + "\n";
    rep += "config_hash=" + std::to_string(ex.cfg.content_hash) + "\n";
    rep += "model_config_hash=" + std::to_string(c.config_hash) + "\n";
    write_text(ex.out + "/eval_report.txt", rep);
}

void cmd_density_grid(const CliOptions& opts) {
    Experiment ex = resolve_experiment(opts);
    const ConfigSection& d = ex.cfg.section("data");
    if (d.get_string("source") != "eight-gaussians") {
        throw ConfigError(
            "density-grid: the reference density needs [data] source = eight-gaussians");
    }
    const double radius = d.get_double("radius", 2.0);
    const double stddev = d.get_double("stddev", 0.25);

    double lo = -4.0, hi = 4.0;
    std::size_t resolution = 100;
    std::string model_path = ex.out + "/energy.ckpt";
    std::string output = ex.out + "/density_grid.csv";
    if (ex.cfg.has_section("density")) {
        const ConfigSection& s = ex.cfg.section("density");
        s.allow_keys({"model", "lo", "hi", "resolution", "output"});
        model_path = s.get_string("model", model_path);
        lo = s.get_double("lo", lo);
        hi = s.get_double("hi", hi);
        resolution = s.get_size("resolution", resolution);
        output = s.get_string("output", output);
    }

    Checkpoint c = load_checkpoint(model_path);
    std::unique_ptr<EnergyModel> model = model_from_checkpoint(c);
    if (model->input_dim() != 2) {
        throw ConfigError("density-grid: model expects dimension " +
                          std::to_string(model->input_dim()) + ", grids are 2D");
    }
    for (PreprocessOp op : c.preprocess.ops) {
        if (op == PreprocessOp::SphereNormalize) {
            throw ConfigError(
                "density-grid: cannot replay sphere normalization on grid points");
        }
    }

    DensityGrid grid = make_density_grid(lo, hi, resolution, [&](const Tensor& pts) {
        return true_density_eight_gaussians(pts, radius, stddev);
    });
    // The model scores preprocessed coordinates. Standardization is affine,
    // so its constant Jacobian cancels in the grid normalization and the l1
    // comparison below stays valid in data space.
    Dataset model_points;
    model_points.rows = grid.points;
    apply_preprocess(model_points, c.preprocess);
    DensityGrid model_grid = grid;
    model_grid.points = model_points.rows;

    std::vector<double> energies = score_energies(*model, model_grid.points);
    const double e_min = *std::min_element(energies.begin(), energies.end());
    const double delta = grid.cell_area();
    std::vector<double> weight(energies.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < energies.size(); ++i) {
        weight[i] = std::exp(-(energies[i] - e_min));
        mass += weight[i] * delta;
    }
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw NumericError("density-grid: model weights do not normalize");
    }
    const double l1 = density_l1(*model, model_grid);

    ensure_out_dir(ex.out);
    std::string csv = "x,y,energy,density\n";
    for (std::size_t i = 0; i < energies.size(); ++i) {
        csv += fmt17(grid.points.at(i, 0)) + "," + fmt17(grid.points.at(i, 1)) + "," +
               fmt17(energies[i]) + "," + fmt17(weight[i] / mass) + "\n";
    }
    write_text(output, csv);

    std::string rep;
    rep += "lo=" + fmt17(lo) + "\n";
    rep += "hi=" + fmt17(hi) + "\n";
    rep += "resolution=" + std::to_string(resolution) + "\n";
    rep += "l1=" + fmt17(l1) + "\n";
    rep += "config_hash=" + std::to_string(ex.cfg.content_hash) + "\n";
    rep += "model_config_hash=" + std::to_string(c.config_hash) + "\n";
    write_text(ex.out + "/density_report.txt", rep);
}

void cmd_sample(const CliOptions& opts) {
    Experiment ex = resolve_experiment(opts);
    LoadedData data = resolve_dataset(ex, opts);
    std::vector<AeJob> jobs = resolve_autoencoders(ex, data.ds.dim());
    MpdrTrainConfig tcfg = resolve_train(ex, opts, jobs.size());
    ManifoldEnsemble ens = load_ensemble(ex, jobs.size(), data.ds.dim(), tcfg.sigma_range);

    std::string model_path = ex.out + "/energy.ckpt";
    std::string output = ex.out + "/negatives.csv";
    std::size_t count = std::min<std::size_t>(256, data.ds.size());
    if (ex.cfg.has_section("sample")) {
        const ConfigSection& s = ex.cfg.section("sample");
        s.allow_keys({"model", "count", "output"});
        model_path = s.get_string("model", model_path);
        count = s.get_size("count", count);
        output = s.get_string("output", output);
    }
    if (count == 0 || count > data.ds.size()) {
        throw ConfigError("sample: count must be in [1, " + std::to_string(data.ds.size()) +
                          "]");
    }

    Checkpoint c = load_checkpoint(model_path);
    std::unique_ptr<EnergyModel> model = model_from_checkpoint(c);
    check_dim(*model, data.ds, "the configured data source");

    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    Tensor batch = data.ds.rows.gather_rows(idx);

    Rng rng = Rng(ex.seed).split(6);
    std::vector<double> sigmas = sample_sigma(tcfg.sigma_range, rng, count);
    TwoStageResult res =
        two_stage_sample(*model, ens, batch, sigmas, tcfg.latent_chain, tcfg.visible_chain,
                         tcfg.recovery, rng, tcfg.latent_reproject);

    std::vector<std::size_t> member(count, 0);
    for (std::size_t g = 0; g < res.groups.size(); ++g) {
        for (std::size_t row : res.groups[g]) member[row] = g;
    }

    ensure_out_dir(ex.out);
    std::string csv;
    for (std::size_t j = 0; j < data.ds.dim(); ++j) {
        csv += (j == 0 ? "x" : ",x") + std::to_string(j);
    }
    csv += ",sigma,member\n";
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < data.ds.dim(); ++j) {
            if (j > 0) csv += ",";
            csv += fmt17(res.x_minus.at(i, j));
        }
        csv += "," + fmt17(sigmas[i]) + "," + std::to_string(member[i]) + "\n";
    }
    write_text(output, csv);
}

} // namespace mpdr::cli
