#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpdr/autoencoder.hpp"
#include "mpdr/energy.hpp"
#include "mpdr/error.hpp"
#include "mpdr/mlp.hpp"
#include "support.hpp"

using mpdr::Activation;
using mpdr::Autoencoder;
using mpdr::AutoencoderSpec;
using mpdr::Bindings;
using mpdr::Graph;
using mpdr::MlpSpec;
using mpdr::OutputTransform;
using mpdr::ReconstructionEnergy;
using mpdr::Rng;
using mpdr::ScalarEnergy;
using mpdr::Tensor;

TEST_CASE("mlp spec validation and tensor count") {
    MlpSpec ok{{3, 8, 1}, Activation::Tanh, OutputTransform::None};
    mpdr::validate(ok);
    CHECK(mpdr::mlp_tensor_count(ok) == 4);
    CHECK(mpdr::mlp_tensor_count(MlpSpec{{5, 2}, {}, {}}) == 2);

    CHECK_THROWS_AS(mpdr::validate(MlpSpec{{4}, {}, {}}), mpdr::ConfigError);
    CHECK_THROWS_AS(mpdr::validate(MlpSpec{{}, {}, {}}), mpdr::ConfigError);
    CHECK_THROWS_AS(mpdr::validate(MlpSpec{{3, 0, 1}, {}, {}}), mpdr::ConfigError);
}

TEST_CASE("mlp init ranges and determinism") {
    MlpSpec spec{{6, 4, 2}, Activation::LeakyRelu, OutputTransform::None};
    Rng rng(3);
    std::vector<Tensor> p = mpdr::init_mlp_params(spec, rng);
    REQUIRE(p.size() == 4);
    CHECK(p[0].rows() == 6);
    CHECK(p[0].cols() == 4);
    CHECK(p[1].numel() == 4);
    CHECK(p[2].rows() == 4);
    CHECK(p[2].cols() == 2);
    CHECK(p[3].numel() == 2);

    double bound0 = 1.0 / std::sqrt(6.0);
    for (std::size_t i = 0; i < p[0].numel(); ++i) {
        CHECK(std::fabs(p[0][i]) <= bound0);
    }
    for (std::size_t i = 0; i < p[1].numel(); ++i) CHECK(p[1][i] == 0.0);
    double bound1 = 1.0 / std::sqrt(4.0);
    for (std::size_t i = 0; i < p[2].numel(); ++i) {
        CHECK(std::fabs(p[2][i]) <= bound1);
    }

    Rng rng2(3);
    std::vector<Tensor> q = mpdr::init_mlp_params(spec, rng2);
    for (std::size_t t = 0; t < p.size(); ++t) {
        for (std::size_t i = 0; i < p[t].numel(); ++i) CHECK(p[t][i] == q[t][i]);
    }
}

TEST_CASE("mlp forward matches hand computation") {
    MlpSpec spec{{2, 2, 1}, Activation::LeakyRelu, OutputTransform::None};
    std::vector<Tensor> params = {
        Tensor::matrix(2, 2, {0.3, -1.0, 0.2, 0.4}),
        Tensor::vector({0.1, -0.1}),
        Tensor::matrix(2, 1, {2.0, -0.5}),
        Tensor::vector({0.25}),
    };
    Tensor x = Tensor::matrix(1, 2, {1.0, 2.0});
    Tensor y = mpdr::mlp_forward(spec, params, x);
    REQUIRE(y.rows() == 1);
    REQUIRE(y.cols() == 1);

    // Pre-activation (0.8, -0.3); leaky slope 0.01 gives (0.8, -0.003).
    double expected = 0.8 * 2.0 + (-0.003) * (-0.5) + 0.25;
    CHECK(y.at(0, 0) == doctest::Approx(expected).epsilon(1e-15));

    SUBCASE("sigmoid output transform") {
        MlpSpec s2 = spec;
        s2.out = OutputTransform::Sigmoid;
        Tensor y2 = mpdr::mlp_forward(s2, params, x);
        CHECK(y2.at(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-expected))).epsilon(1e-15));
    }
}

TEST_CASE("sphere output transform produces unit rows") {
    MlpSpec spec{{3, 5, 4}, Activation::Tanh, OutputTransform::Sphere};
    Rng rng(8);
    std::vector<Tensor> params = mpdr::init_mlp_params(spec, rng);
    Tensor x = Tensor::matrix(3, 3, {0.5, -1.0, 2.0, 0.1, 0.1, 0.1, -2.0, 1.5, 0.7});
    Tensor y = mpdr::mlp_forward(spec, params, x);
    REQUIRE(y.rows() == 3);
    REQUIRE(y.cols() == 4);
    for (std::size_t i = 0; i < 3; ++i) {
        double n = 0.0;
        for (std::size_t j = 0; j < 4; ++j) n += y.at(i, j) * y.at(i, j);
        CHECK(std::fabs(std::sqrt(n) - 1.0) <= 1e-12);
    }
}

TEST_CASE("eager sphere projection") {
    Tensor v = Tensor::vector({3.0, 4.0});
    Tensor u = mpdr::sphere_project(v);
    CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));

    Tensor batch = Tensor::matrix(2, 2, {3.0, 4.0, 0.0, -2.0});
    Tensor ub = mpdr::sphere_project(batch);
    CHECK(ub.at(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(ub.at(1, 1) == doctest::Approx(-1.0).epsilon(1e-15));

    CHECK_THROWS_AS(mpdr::sphere_project(Tensor::vector({0.0, 0.0})),
                    mpdr::DegenerateInputError);
}

TEST_CASE("build_mlp parameter modes agree") {
    MlpSpec spec{{3, 4, 2}, Activation::Tanh, OutputTransform::None};
    Rng rng(17);
    std::vector<Tensor> params = mpdr::init_mlp_params(spec, rng);
    Tensor x = Tensor::matrix(2, 3, {0.2, -0.4, 1.0, 0.9, 0.3, -1.2});

    // Baked constants.
    Graph g1;
    Graph::NodeId x1 = g1.constant(x);
    Graph::NodeId y1 = mpdr::build_mlp(g1, x1, spec, params, nullptr);
    Tensor out1 = mpdr::evaluate(g1, y1, Bindings{});

    // Fresh placeholders, bound at evaluation time.
    Graph g2;
    Graph::NodeId x2 = g2.constant(x);
    std::vector<Graph::NodeId> theta;
    Graph::NodeId y2 = mpdr::build_mlp(g2, x2, spec, params, &theta);
    REQUIRE(theta.size() == mpdr::mlp_tensor_count(spec));
    Bindings b;
    for (std::size_t t = 0; t < theta.size(); ++t) b.set(theta[t], params[t]);
    Tensor out2 = mpdr::evaluate(g2, y2, b);

    // Reused placeholders: a second head on the same parameters.
    Graph::NodeId x3 = g2.constant(x);
    std::vector<Graph::NodeId> theta_again = theta;
    Graph::NodeId y3 = mpdr::build_mlp(g2, x3, spec, params, &theta_again);
    CHECK(theta_again == theta);
    Tensor out3 = mpdr::evaluate(g2, y3, b);

    for (std::size_t i = 0; i < out1.numel(); ++i) {
        CHECK(out1[i] == out2[i]);
        CHECK(out2[i] == out3[i]);
    }
}

TEST_CASE("mlp gradients match finite differences for every output transform") {
    for (OutputTransform out :
         {OutputTransform::None, OutputTransform::Sphere, OutputTransform::Sigmoid}) {
        CAPTURE(mpdr::output_transform_name(out));
        MlpSpec spec{{3, 4, 2}, Activation::Tanh, out};
        Rng rng(23);
        std::vector<Tensor> params = mpdr::init_mlp_params(spec, rng);
        // Nonzero biases so their gradient paths are exercised.
        for (std::size_t t = 1; t < params.size(); t += 2) {
            for (std::size_t i = 0; i < params[t].numel(); ++i) {
                params[t][i] = rng.uniform(-0.3, 0.3);
            }
        }
        Tensor x = Tensor::matrix(2, 3, {0.4, -0.2, 0.8, -0.6, 0.9, 0.1});
        Tensor c = Tensor::matrix(2, 2, {0.7, -1.1, 0.4, 0.9});

        Graph g;
        Graph::NodeId xn = g.placeholder({2, 3}, "x");
        std::vector<Graph::NodeId> theta;
        Graph::NodeId y = mpdr::build_mlp(g, xn, spec, params, &theta);
        Graph::NodeId loss = g.sum(g.mul(y, g.constant(c)));

        Bindings b;
        b.set(xn, x);
        for (std::size_t t = 0; t < theta.size(); ++t) b.set(theta[t], params[t]);
        std::vector<Graph::NodeId> wrt = theta;
        wrt.push_back(xn);
        mpdr::GradientResult res = mpdr::gradient(g, loss, b, wrt);

        auto loss_with = [&](const std::vector<Tensor>& p, const Tensor& xv) {
            Tensor yv = mpdr::mlp_forward(spec, p, xv);
            double acc = 0.0;
            for (std::size_t i = 0; i < yv.numel(); ++i) acc += yv[i] * c[i];
            return acc;
        };
        for (std::size_t t = 0; t < theta.size(); ++t) {
            CAPTURE(t);
            Tensor fd = testsupport::fd_gradient(
                [&](const Tensor& pt) {
                    std::vector<Tensor> p = params;
                    p[t] = pt;
                    return loss_with(p, x);
                },
                params[t]);
            CHECK(testsupport::max_rel_diff(res.grads[t], fd) < 1e-6);
        }
        Tensor fdx = testsupport::fd_gradient([&](const Tensor& xv) { return loss_with(params, xv); }, x);
        CHECK(testsupport::max_rel_diff(res.grads.back(), fdx) < 1e-6);
    }
}

TEST_CASE("identity autoencoder is an exact identity map") {
    Autoencoder ae = Autoencoder::identity(3);
    CHECK(ae.input_dim() == 3);
    CHECK(ae.latent_dim() == 3);
    CHECK(!ae.spherical());

    Tensor x = Tensor::matrix(2, 3, {0.5, -1.25, 3.0, 1e-7, 42.0, -0.0});
    Tensor z = ae.encode(x);
    Tensor r = ae.reconstruct(x);
    for (std::size_t i = 0; i < x.numel(); ++i) {
        CHECK(z[i] == x[i]);
        CHECK(r[i] == x[i]);
    }
    CHECK(ae.reconstruction_loss(x) == 0.0);
}

TEST_CASE("autoencoder parameter layout and spherical latent") {
    AutoencoderSpec spec;
    spec.input_dim = 4;
    spec.latent_dim = 3;
    spec.enc_hidden = {8};
    spec.dec_hidden = {8};
    Rng rng(31);
    Autoencoder ae(spec, rng);

    CHECK(ae.encoder_spec().out == OutputTransform::Sphere);
    CHECK(ae.encoder_tensor_count() == 4);
    CHECK(ae.params().size() == 8);
    CHECK(ae.encoder_params().size() == 4);
    CHECK(ae.decoder_params().size() == 4);
    CHECK(ae.encoder_params().data() == ae.params().data());
    CHECK(ae.decoder_params().data() == ae.params().data() + 4);

    Tensor x = Tensor::matrix(3, 4, {0.1, 0.5, -0.2, 0.8, 1.0, -1.0, 0.3, 0.0, -0.7, 0.2, 0.9, -0.4});
    Tensor z = ae.encode(x);
    REQUIRE(z.rows() == 3);
    REQUIRE(z.cols() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        double n = 0.0;
        for (std::size_t j = 0; j < 3; ++j) n += z.at(i, j) * z.at(i, j);
        CHECK(std::fabs(std::sqrt(n) - 1.0) <= 1e-12);
    }

    SUBCASE("reconstruction loss is the mean squared error of reconstruct") {
        Tensor r = ae.reconstruct(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                double d = x.at(i, j) - r.at(i, j);
                acc += d * d;
            }
        }
        CHECK(ae.reconstruction_loss(x) == doctest::Approx(acc / 3.0).epsilon(1e-12));
    }

    SUBCASE("wrong parameter count is rejected") {
        std::vector<Tensor> p(ae.params().begin(), ae.params().end() - 1);
        CHECK_THROWS_AS(Autoencoder(spec, p), mpdr::ConfigError);
    }

    SUBCASE("wrong input dimension is rejected") {
        CHECK_THROWS_AS(ae.encode(Tensor::matrix(1, 3, {1, 2, 3})), mpdr::ConfigError);
        CHECK_THROWS_AS(ae.reconstruction_loss(Tensor::matrix(1, 3, {1, 2, 3})),
                        mpdr::ConfigError);
    }
}

TEST_CASE("scalar energy wraps an mlp with one output") {
    MlpSpec spec{{2, 6, 1}, Activation::LeakyRelu, OutputTransform::None};
    Rng rng(41);
    ScalarEnergy e(spec, rng);
    CHECK(e.input_dim() == 2);
    CHECK(std::string(e.kind()) == "scalar");

    Tensor x = Tensor::matrix(3, 2, {0.0, 0.0, 1.5, -0.5, -2.0, 2.0});
    Tensor en = e.energy(x);
    REQUIRE(en.rank() == 1);
    REQUIRE(en.numel() == 3);

    Tensor via_mlp = mpdr::mlp_forward(spec, e.params(), x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(en[i] == via_mlp.at(i, 0));

    CHECK_THROWS_AS(ScalarEnergy(MlpSpec{{2, 6, 2}, {}, {}}, rng), mpdr::ConfigError);
    CHECK_THROWS_AS(ScalarEnergy(MlpSpec{{2, 6, 1}, Activation::Relu, OutputTransform::Sigmoid}, rng),
                    mpdr::ConfigError);
    CHECK_THROWS_AS(e.energy(Tensor::matrix(1, 3, {0, 0, 0})), mpdr::ConfigError);
}

TEST_CASE("reconstruction energy equals the squared reconstruction error") {
    AutoencoderSpec spec;
    spec.input_dim = 3;
    spec.latent_dim = 2;
    spec.enc_hidden = {5};
    spec.dec_hidden = {5};
    Rng rng(53);
    ReconstructionEnergy e(spec, rng);
    CHECK(std::string(e.kind()) == "reconstruction");

    Tensor x = Tensor::matrix(2, 3, {0.4, -0.9, 1.1, 0.0, 0.2, -0.3});
    Tensor en = e.energy(x);
    Tensor r = e.autoencoder().reconstruct(x);
    for (std::size_t i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            double d = x.at(i, j) - r.at(i, j);
            acc += d * d;
        }
        CHECK(en[i] == doctest::Approx(acc).epsilon(1e-12));
        CHECK(en[i] >= 0.0);
    }

    Autoencoder id = Autoencoder::identity(3);
    ReconstructionEnergy perfect(id);
    Tensor zero = perfect.energy(x);
    for (std::size_t i = 0; i < 2; ++i) CHECK(zero[i] == 0.0);
}

TEST_CASE("energy build modes and parameter sharing") {
    MlpSpec spec{{2, 4, 1}, Activation::Tanh, OutputTransform::None};
    Rng rng(67);
    ScalarEnergy e(spec, rng);
    Tensor x = Tensor::matrix(2, 2, {0.3, 0.7, -1.0, 0.5});

    Tensor eager = e.energy(x);

    Graph g;
    Graph::NodeId xn = g.constant(x);
    std::vector<Graph::NodeId> theta;
    Graph::NodeId en1 = e.build(g, xn, &theta);
    Bindings b;
    e.bind_params(b, theta);
    Tensor got1 = mpdr::evaluate(g, en1, b);

    // Second head reusing the same placeholders.
    std::vector<Graph::NodeId> theta_copy = theta;
    Graph::NodeId en2 = e.build(g, g.constant(x), &theta_copy);
    CHECK(theta_copy == theta);
    Tensor got2 = mpdr::evaluate(g, en2, b);

    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(got1[i] == eager[i]);
        CHECK(got2[i] == eager[i]);
    }
}

TEST_CASE("energy gradients with respect to the input match finite differences") {
    AutoencoderSpec aspec;
    aspec.input_dim = 2;
    aspec.latent_dim = 2;
    aspec.enc_hidden = {6};
    aspec.dec_hidden = {6};
    Rng rng(71);
    ReconstructionEnergy recon(aspec, rng);
    ScalarEnergy scalar(MlpSpec{{2, 6, 1}, Activation::Tanh, OutputTransform::None}, rng);

    Tensor x = Tensor::matrix(1, 2, {0.35, -0.8});
    for (const mpdr::EnergyModel* model :
         {static_cast<const mpdr::EnergyModel*>(&recon),
          static_cast<const mpdr::EnergyModel*>(&scalar)}) {
        CAPTURE(model->kind());
        Graph g;
        Graph::NodeId xn = g.placeholder({1, 2}, "x");
        Graph::NodeId en = model->build(g, xn, nullptr);
        Graph::NodeId loss = g.sum(en);
        Bindings b;
        b.set(xn, x);
        std::vector<Graph::NodeId> wrt{xn};
        mpdr::GradientResult res = mpdr::gradient(g, loss, b, wrt);

        Tensor fd = testsupport::fd_gradient(
            [&](const Tensor& xv) { return model->energy(xv)[0]; }, x);
        CHECK(testsupport::max_rel_diff(res.grads[0], fd) < 1e-6);
    }
}

TEST_CASE("clone is a deep copy") {
    Rng rng(83);
    ScalarEnergy e(MlpSpec{{2, 3, 1}, Activation::LeakyRelu, OutputTransform::None}, rng);
    Tensor x = Tensor::matrix(1, 2, {0.5, 0.5});
    Tensor before = e.energy(x);
    std::uint64_t sum_before = e.param_checksum();

    std::unique_ptr<mpdr::EnergyModel> copy = e.clone();
    CHECK(copy->param_checksum() == sum_before);
    copy->params()[0][0] += 1.0;
    CHECK(copy->param_checksum() != sum_before);
    CHECK(e.param_checksum() == sum_before);
    Tensor after = e.energy(x);
    CHECK(after[0] == before[0]);
    CHECK(copy->energy(x)[0] != before[0]);
}
