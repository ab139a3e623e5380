#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mpdr/autoencoder.hpp"
#include "mpdr/checkpoint.hpp"
#include "mpdr/energy.hpp"
#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"
#include "mpdr/rng.hpp"

using mpdr::Autoencoder;
using mpdr::AutoencoderSpec;
using mpdr::Checkpoint;
using mpdr::MlpSpec;
using mpdr::Rng;
using mpdr::Tensor;

namespace {

std::string temp_path(const char* stem) { return std::string("ckpt_test_") + stem + ".ckpt"; }

Checkpoint sample_checkpoint() {
    Rng rng(19);
    AutoencoderSpec spec;
    spec.input_dim = 3;
    spec.latent_dim = 2;
    spec.enc_hidden = {5};
    spec.dec_hidden = {4, 4};
    Autoencoder ae(spec, rng);
    Checkpoint c = mpdr::checkpoint_of_autoencoder(ae);
    c.preprocess.ops = {mpdr::PreprocessOp::Standardize, mpdr::PreprocessOp::AddGaussianNoise};
    c.preprocess.means = {0.25, -1.5, 3.0};
    c.preprocess.stds = {1.0, 2.0, 0.5};
    c.preprocess.noise_sigma = 0.01;
    c.config_hash = 0xdeadbeefcafef00dULL;
    c.seed = 42;
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("checkpoints round-trip every field bit for bit") {
    const std::string path = temp_path("roundtrip");
    Checkpoint c = sample_checkpoint();
    mpdr::save_checkpoint(c, path);
    Checkpoint r = mpdr::load_checkpoint(path);
    std::remove(path.c_str());

    CHECK(r.kind == "autoencoder");
    CHECK(r.architecture == c.architecture);
    CHECK(r.config_hash == c.config_hash);
    CHECK(r.seed == c.seed);
    CHECK(r.preprocess.ops == c.preprocess.ops);
    CHECK(r.preprocess.means == c.preprocess.means);
    CHECK(r.preprocess.stds == c.preprocess.stds);
    CHECK(r.preprocess.noise_sigma == c.preprocess.noise_sigma);
    REQUIRE(r.params.size() == c.params.size());
    for (std::size_t i = 0; i < r.params.size(); ++i) {
        CHECK(r.params[i].shape() == c.params[i].shape());
    }
    CHECK(mpdr::tensor_checksum(r.params) == mpdr::tensor_checksum(c.params));

    // Non-finite payloads survive: the format stores raw bits, not text.
    Checkpoint odd;
    odd.kind = "quadratic_mean";
    odd.architecture = "dim=3\n";
    odd.params = {Tensor::vector({-0.0, std::numeric_limits<double>::infinity(), 1e-300})};
    mpdr::save_checkpoint(odd, path);
    Checkpoint odd_r = mpdr::load_checkpoint(path);
    std::remove(path.c_str());
    CHECK(mpdr::tensor_checksum(odd_r.params) == mpdr::tensor_checksum(odd.params));
}

TEST_CASE("saving twice produces identical bytes") {
    const std::string a = temp_path("bytes_a"), b = temp_path("bytes_b");
    Checkpoint c = sample_checkpoint();
    mpdr::save_checkpoint(c, a);
    mpdr::save_checkpoint(c, b);
    CHECK(slurp(a) == slurp(b));
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("corruption and truncation are integrity errors") {
    const std::string path = temp_path("corrupt");
    mpdr::save_checkpoint(sample_checkpoint(), path);
    const std::string good = slurp(path);
    REQUIRE(Checkpoint::kFormatVersion == 1);

    SUBCASE("flipped payload byte fails the checksum") {
        std::string bad = good;
        bad[bad.size() / 2] = static_cast<char>(bad[bad.size() / 2] ^ 0x40);
        spit(path, bad);
        try {
            (void)mpdr::load_checkpoint(path);
            FAIL("load accepted a corrupt file");
        } catch (const mpdr::IntegrityError& e) {
            CHECK(std::string(e.what()).find("checksum") != std::string::npos);
        }
    }
    SUBCASE("truncated file") {
        spit(path, good.substr(0, good.size() - 9));
        CHECK_THROWS_AS((void)mpdr::load_checkpoint(path), mpdr::IntegrityError);
        spit(path, good.substr(0, 10));
        CHECK_THROWS_AS((void)mpdr::load_checkpoint(path), mpdr::IntegrityError);
        spit(path, "");
        CHECK_THROWS_AS((void)mpdr::load_checkpoint(path), mpdr::IntegrityError);
    }
    SUBCASE("foreign file fails the magic check") {
        spit(path, "not a checkpoint at all, but long enough to read");
        try {
            (void)mpdr::load_checkpoint(path);
            FAIL("load accepted a foreign file");
        } catch (const mpdr::IntegrityError& e) {
            CHECK(std::string(e.what()).find("magic") != std::string::npos);
        }
    }
    SUBCASE("version mismatch names both versions") {
        std::string bad = good;
        bad[8] = 9; // little-endian version word follows the 8-byte magic
        spit(path, bad);
        try {
            (void)mpdr::load_checkpoint(path);
            FAIL("load accepted a future version");
        } catch (const mpdr::IntegrityError& e) {
            std::string msg = e.what();
            CHECK(msg.find("version 9") != std::string::npos);
            CHECK(msg.find("version 1") != std::string::npos);
        }
    }
    SUBCASE("missing file is an io error") {
        CHECK_THROWS_AS((void)mpdr::load_checkpoint("no_such_ckpt_anywhere.ckpt"),
                        mpdr::IoError);
    }
    std::remove(path.c_str());
}

TEST_CASE("architecture descriptions parse back to the same spec") {
    SUBCASE("autoencoder") {
        AutoencoderSpec spec;
        spec.input_dim = 16;
        spec.latent_dim = 4;
        spec.enc_hidden = {32, 32};
        spec.dec_hidden = {};
        spec.act = mpdr::Activation::Tanh;
        spec.spherical = false;
        spec.dec_out = mpdr::OutputTransform::Sigmoid;
        AutoencoderSpec r = mpdr::parse_autoencoder_description(mpdr::describe_autoencoder(spec));
        CHECK(r.input_dim == spec.input_dim);
        CHECK(r.latent_dim == spec.latent_dim);
        CHECK(r.enc_hidden == spec.enc_hidden);
        CHECK(r.dec_hidden == spec.dec_hidden);
        CHECK(r.act == spec.act);
        CHECK(r.spherical == spec.spherical);
        CHECK(r.dec_out == spec.dec_out);
    }
    SUBCASE("mlp") {
        MlpSpec spec;
        spec.widths = {2, 24, 24, 1};
        spec.hidden_act = mpdr::Activation::LeakyRelu;
        spec.out = mpdr::OutputTransform::None;
        MlpSpec r = mpdr::parse_mlp_description(mpdr::describe_mlp(spec));
        CHECK(r.widths == spec.widths);
        CHECK(r.hidden_act == spec.hidden_act);
        CHECK(r.out == spec.out);
    }
    SUBCASE("unknown names are config errors") {
        CHECK_THROWS_AS((void)mpdr::parse_mlp_description("widths=2,1\nactivation=exotic\n"
                                                          "out=none\n"),
                        mpdr::ConfigError);
        CHECK_THROWS_AS((void)mpdr::parse_mlp_description("widths=2,1\nactivation=tanh\n"
                                                          "out=none\nsurprise=1\n"),
                        mpdr::ConfigError);
    }
}

TEST_CASE("models rebuilt from checkpoints score inputs identically") {
    const std::string path = temp_path("models");
    Rng rng(31);
    Tensor x = Tensor::matrix(4, 3,
                              {0.1, -0.4, 2.0, 1.0, 0.0, -1.0, 0.5, 0.5, 0.5, -2.0, 0.3, 0.9});

    SUBCASE("scalar energy") {
        mpdr::ScalarEnergy model(MlpSpec{{3, 8, 1}, mpdr::Activation::Tanh,
                                         mpdr::OutputTransform::None},
                                 rng);
        mpdr::save_checkpoint(mpdr::checkpoint_of_model(model), path);
        auto back = mpdr::model_from_checkpoint(mpdr::load_checkpoint(path));
        REQUIRE(std::string(back->kind()) == "scalar");
        Tensor e0 = model.energy(x), e1 = back->energy(x);
        for (std::size_t i = 0; i < e0.numel(); ++i) CHECK(e1[i] == e0[i]);
    }
    SUBCASE("quadratic mean energy") {
        mpdr::QuadraticMeanEnergy model(Tensor::vector({0.5, -1.0, 2.0}));
        mpdr::save_checkpoint(mpdr::checkpoint_of_model(model), path);
        auto back = mpdr::model_from_checkpoint(mpdr::load_checkpoint(path));
        REQUIRE(std::string(back->kind()) == "quadratic_mean");
        Tensor e0 = model.energy(x), e1 = back->energy(x);
        for (std::size_t i = 0; i < e0.numel(); ++i) CHECK(e1[i] == e0[i]);
    }
    SUBCASE("reconstruction energy") {
        AutoencoderSpec spec;
        spec.input_dim = 3;
        spec.latent_dim = 2;
        spec.enc_hidden = {6};
        spec.dec_hidden = {6};
        mpdr::ReconstructionEnergy model(spec, rng);
        mpdr::save_checkpoint(mpdr::checkpoint_of_model(model), path);
        auto back = mpdr::model_from_checkpoint(mpdr::load_checkpoint(path));
        REQUIRE(std::string(back->kind()) == "reconstruction");
        Tensor e0 = model.energy(x), e1 = back->energy(x);
        for (std::size_t i = 0; i < e0.numel(); ++i) CHECK(e1[i] == e0[i]);
    }
    SUBCASE("autoencoder round-trip reconstructs identically") {
        AutoencoderSpec spec;
        spec.input_dim = 3;
        spec.latent_dim = 2;
        spec.enc_hidden = {5};
        spec.dec_hidden = {5};
        Autoencoder ae(spec, rng);
        mpdr::save_checkpoint(mpdr::checkpoint_of_autoencoder(ae), path);
        Autoencoder back = mpdr::autoencoder_from_checkpoint(mpdr::load_checkpoint(path));
        Tensor r0 = ae.reconstruct(x), r1 = back.reconstruct(x);
        for (std::size_t i = 0; i < r0.numel(); ++i) CHECK(r1[i] == r0[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("kind mismatches between reader and payload are rejected") {
    Checkpoint c = sample_checkpoint();
    CHECK_THROWS_AS((void)mpdr::model_from_checkpoint(c), mpdr::ConfigError);

    Rng rng(5);
    mpdr::ScalarEnergy model(MlpSpec{{2, 4, 1}}, rng);
    Checkpoint m = mpdr::checkpoint_of_model(model);
    CHECK_THROWS_AS((void)mpdr::autoencoder_from_checkpoint(m), mpdr::ConfigError);

    // A quadratic mean block whose tensor disagrees with its declared dim.
    Checkpoint q;
    q.kind = "quadratic_mean";
    q.architecture = "dim=4\n";
    q.params = {Tensor::vector({1.0, 2.0})};
    CHECK_THROWS_AS((void)mpdr::model_from_checkpoint(q), mpdr::IntegrityError);
}
