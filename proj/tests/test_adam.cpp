#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpdr/adam.hpp"
#include "mpdr/error.hpp"
#include "mpdr/tensor.hpp"

using mpdr::Adam;
using mpdr::AdamConfig;
using mpdr::Tensor;

TEST_CASE("adam first step matches the closed form") {
    // With fresh moments the bias corrections cancel exactly:
    // step 1 moves each parameter by lr * g / (|g| + eps).
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam opt(cfg);
    std::vector<Tensor> params{Tensor::vector({1.0, -2.0})};
    std::vector<Tensor> grads{Tensor::vector({0.5, -3.0})};
    opt.step(params, grads);
    CHECK(params[0][0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(params[0][1] == doctest::Approx(-2.0 + 0.1 * 3.0 / (3.0 + 1e-8)).epsilon(1e-12));
    CHECK(opt.steps() == 1);
}

TEST_CASE("adam with zero gradients is a bitwise identity") {
    Adam opt;
    std::vector<Tensor> params{Tensor::vector({0.25, -1.75}), Tensor::matrix(2, 2, {1, 2, 3, 4})};
    std::vector<Tensor> before = params;
    std::vector<Tensor> grads{Tensor({2}), Tensor({2, 2})};
    for (int i = 0; i < 3; ++i) opt.step(params, grads);
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t j = 0; j < params[p].numel(); ++j) {
            CHECK(params[p][j] == before[p][j]);
        }
    }
}

TEST_CASE("adam minimizes a quadratic") {
    AdamConfig cfg;
    cfg.lr = 0.05;
    Adam opt(cfg);
    std::vector<Tensor> params{Tensor::vector({-4.0})};
    for (int i = 0; i < 2000; ++i) {
        double p = params[0][0];
        std::vector<Tensor> grads{Tensor::vector({2.0 * (p - 3.0)})};
        opt.step(params, grads);
    }
    CHECK(std::fabs(params[0][0] - 3.0) < 1e-3);
}

TEST_CASE("adam validates its inputs") {
    CHECK_THROWS_AS(Adam(AdamConfig{-1.0, 0.9, 0.999, 1e-8}), mpdr::ConfigError);
    CHECK_THROWS_AS(Adam(AdamConfig{1e-3, 1.0, 0.999, 1e-8}), mpdr::ConfigError);

    Adam opt;
    std::vector<Tensor> params{Tensor::vector({1.0})};
    std::vector<Tensor> wrong_count;
    CHECK_THROWS_AS(opt.step(params, wrong_count), mpdr::ConfigError);
    std::vector<Tensor> wrong_shape{Tensor::vector({1.0, 2.0})};
    CHECK_THROWS_AS(opt.step(params, wrong_shape), mpdr::ConfigError);
}

TEST_CASE("adam reset clears step count and moments") {
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam opt(cfg);
    std::vector<Tensor> params{Tensor::vector({1.0})};
    std::vector<Tensor> grads{Tensor::vector({0.5})};
    opt.step(params, grads);
    opt.reset();
    CHECK(opt.steps() == 0);

    // After reset the optimizer repeats the first step exactly.
    std::vector<Tensor> fresh{Tensor::vector({1.0})};
    Adam opt2(cfg);
    opt2.step(fresh, grads);
    std::vector<Tensor> again{Tensor::vector({1.0})};
    opt.step(again, grads);
    CHECK(again[0][0] == fresh[0][0]);
}
