#include "mpdr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mpdr/config.hpp"
#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"

namespace mpdr {

namespace {

constexpr char kMagic[8] = {'M', 'P', 'D', 'R', 'C', 'K', 'P', 'T'};

void put_u32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& b, double d) { put_u64(b, std::bit_cast<std::uint64_t>(d)); }

void put_str(std::string& b, const std::string& s) {
    put_u32(b, static_cast<std::uint32_t>(s.size()));
    b.append(s);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw IntegrityError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    unsigned char byte() {
        need(1);
        return static_cast<unsigned char>(buf[pos++]);
    }
};

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

ConfigSection arch_section(const std::string& text) {
    return parse_config("[arch]\n" + text, "<architecture>").section("arch");
}

unsigned char op_code(PreprocessOp op) {
    switch (op) {
        case PreprocessOp::Standardize: return 0;
        case PreprocessOp::SphereNormalize: return 1;
        case PreprocessOp::AddGaussianNoise: return 2;
    }
    throw std::logic_error("op_code: unknown preprocess op");
}

PreprocessOp op_from_code(unsigned char c) {
    switch (c) {
        case 0: return PreprocessOp::Standardize;
        case 1: return PreprocessOp::SphereNormalize;
        case 2: return PreprocessOp::AddGaussianNoise;
    }
    throw IntegrityError("checkpoint: unknown preprocess op code " + std::to_string(c));
}

} // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::string b;
    b.append(kMagic, sizeof kMagic);
    put_u32(b, Checkpoint::kFormatVersion);
    put_str(b, c.kind);
    put_str(b, c.architecture);

    put_u32(b, static_cast<std::uint32_t>(c.preprocess.ops.size()));
    for (PreprocessOp op : c.preprocess.ops) b.push_back(static_cast<char>(op_code(op)));
    put_u32(b, static_cast<std::uint32_t>(c.preprocess.means.size()));
    for (double m : c.preprocess.means) put_f64(b, m);
    put_u32(b, static_cast<std::uint32_t>(c.preprocess.stds.size()));
    for (double s : c.preprocess.stds) put_f64(b, s);
    put_f64(b, c.preprocess.noise_sigma);

    put_u64(b, c.config_hash);
    put_u64(b, c.seed);

    put_u32(b, static_cast<std::uint32_t>(c.params.size()));
    for (const Tensor& t : c.params) {
        put_u32(b, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) put_u64(b, d);
        for (std::size_t i = 0; i < t.numel(); ++i) put_f64(b, t[i]);
    }

    put_u64(b, fnv1a64(b.data(), b.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
    out.flush();
    if (!out) throw IoError("checkpoint: failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("checkpoint: failed reading '" + path + "'");
    const std::string b = buf.str();

    if (b.size() < sizeof kMagic + 4 + 8) throw IntegrityError("checkpoint: truncated file");
    if (std::memcmp(b.data(), kMagic, sizeof kMagic) != 0) {
        throw IntegrityError("checkpoint: bad magic, not a checkpoint file");
    }

    Reader r{b, sizeof kMagic};
    std::uint32_t version = r.u32();
    if (version != Checkpoint::kFormatVersion) {
        throw IntegrityError("checkpoint: file has format version " + std::to_string(version) +
                             ", this build reads version " +
                             std::to_string(Checkpoint::kFormatVersion));
    }

    std::uint64_t stored_le = 0;
    for (int i = 0; i < 8; ++i) {
        stored_le |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[b.size() - 8 + i]))
                     << (8 * i);
    }
    if (fnv1a64(b.data(), b.size() - 8) != stored_le) {
        throw IntegrityError("checkpoint: checksum mismatch, file is corrupt");
    }

    Checkpoint c;
    c.kind = r.str();
    c.architecture = r.str();

    std::uint32_t n_ops = r.u32();
    for (std::uint32_t i = 0; i < n_ops; ++i) c.preprocess.ops.push_back(op_from_code(r.byte()));
    std::uint32_t n_means = r.u32();
    for (std::uint32_t i = 0; i < n_means; ++i) c.preprocess.means.push_back(r.f64());
    std::uint32_t n_stds = r.u32();
    for (std::uint32_t i = 0; i < n_stds; ++i) c.preprocess.stds.push_back(r.f64());
    c.preprocess.noise_sigma = r.f64();

    c.config_hash = r.u64();
    c.seed = r.u64();

    std::uint32_t n_tensors = r.u32();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        std::uint32_t rank = r.u32();
        if (rank > 2) throw IntegrityError("checkpoint: tensor rank " + std::to_string(rank));
        std::vector<std::size_t> shape;
        std::size_t numel = 1;
        const std::size_t cap = (b.size() - r.pos) / 8;
        for (std::uint32_t d = 0; d < rank; ++d) {
            std::uint64_t dim = r.u64();
            // Bound each factor so a corrupt dim cannot overflow numel.
            if (dim > cap || numel * dim > cap) {
                throw IntegrityError("checkpoint: truncated file");
            }
            shape.push_back(static_cast<std::size_t>(dim));
            numel *= static_cast<std::size_t>(dim);
        }
        r.need(numel * 8);
        std::vector<double> values(numel);
        for (std::size_t k = 0; k < numel; ++k) values[k] = r.f64();
        c.params.emplace_back(std::move(shape), std::move(values));
    }
    if (r.pos != b.size() - 8) {
        throw IntegrityError("checkpoint: trailing bytes after parameter block");
    }
    return c;
}

std::string describe_autoencoder(const AutoencoderSpec& spec) {
    std::string s;
    s += "input_dim=" + std::to_string(spec.input_dim) + "\n";
    s += "latent_dim=" + std::to_string(spec.latent_dim) + "\n";
    s += "enc_hidden=" + join_sizes(spec.enc_hidden) + "\n";
    s += "dec_hidden=" + join_sizes(spec.dec_hidden) + "\n";
    s += "activation=" + std::string(activation_name(spec.act)) + "\n";
    s += std::string("spherical=") + (spec.spherical ? "true" : "false") + "\n";
    s += "dec_out=" + std::string(output_transform_name(spec.dec_out)) + "\n";
    return s;
}

AutoencoderSpec parse_autoencoder_description(const std::string& text) {
    ConfigSection arch = arch_section(text);
    arch.allow_keys({"input_dim", "latent_dim", "enc_hidden", "dec_hidden", "activation",
                     "spherical", "dec_out"});
    AutoencoderSpec spec;
    spec.input_dim = arch.get_size("input_dim");
    spec.latent_dim = arch.get_size("latent_dim");
    spec.enc_hidden = arch.get_size_list("enc_hidden", {});
    spec.dec_hidden = arch.get_size_list("dec_hidden", {});
    spec.act = parse_activation(arch.get_string("activation"));
    spec.spherical = arch.get_bool("spherical");
    spec.dec_out = parse_output_transform(arch.get_string("dec_out"));
    return spec;
}

std::string describe_mlp(const MlpSpec& spec) {
    std::string s;
    s += "widths=" + join_sizes(spec.widths) + "\n";
    s += "activation=" + std::string(activation_name(spec.hidden_act)) + "\n";
    s += "out=" + std::string(output_transform_name(spec.out)) + "\n";
    return s;
}

MlpSpec parse_mlp_description(const std::string& text) {
    ConfigSection arch = arch_section(text);
    arch.allow_keys({"widths", "activation", "out"});
    MlpSpec spec;
    spec.widths = arch.get_size_list("widths");
    spec.hidden_act = parse_activation(arch.get_string("activation"));
    spec.out = parse_output_transform(arch.get_string("out"));
    return spec;
}

Checkpoint checkpoint_of_autoencoder(const Autoencoder& ae) {
    Checkpoint c;
    c.kind = "autoencoder";
    c.architecture = describe_autoencoder(ae.spec());
    c.params = ae.params();
    return c;
}

Checkpoint checkpoint_of_model(const EnergyModel& model) {
    Checkpoint c;
    c.kind = model.kind();
    c.params = model.params();
    if (const auto* scalar = dynamic_cast<const ScalarEnergy*>(&model)) {
        c.architecture = describe_mlp(scalar->mlp_spec());
    } else if (const auto* quad = dynamic_cast<const QuadraticMeanEnergy*>(&model)) {
        c.architecture = "dim=" + std::to_string(quad->input_dim()) + "\n";
    } else if (const auto* recon = dynamic_cast<const ReconstructionEnergy*>(&model)) {
        c.architecture = describe_autoencoder(recon->autoencoder().spec());
    } else {
        throw ConfigError("checkpoint: unsupported energy model kind '" +
                          std::string(model.kind()) + "'");
    }
    return c;
}

Autoencoder autoencoder_from_checkpoint(const Checkpoint& c) {
    if (c.kind != "autoencoder") {
        throw ConfigError("checkpoint: kind '" + c.kind + "' is not an autoencoder");
    }
    return Autoencoder(parse_autoencoder_description(c.architecture), c.params);
}

std::unique_ptr<EnergyModel> model_from_checkpoint(const Checkpoint& c) {
    if (c.kind == "scalar") {
        return std::make_unique<ScalarEnergy>(parse_mlp_description(c.architecture), c.params);
    }
    if (c.kind == "quadratic_mean") {
        ConfigSection arch = arch_section(c.architecture);
        arch.allow_keys({"dim"});
        std::size_t dim = arch.get_size("dim");
        if (c.params.size() != 1 || c.params[0].numel() != dim) {
            throw IntegrityError("checkpoint: quadratic mean parameter block does not match dim " +
                                 std::to_string(dim));
        }
        return std::make_unique<QuadraticMeanEnergy>(c.params[0]);
    }
    if (c.kind == "reconstruction") {
        return std::make_unique<ReconstructionEnergy>(
            Autoencoder(parse_autoencoder_description(c.architecture), c.params));
    }
    throw ConfigError("checkpoint: kind '" + c.kind + "' is not an energy model");
}

} // namespace mpdr
