#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mpdr/autodiff.hpp"
#include "mpdr/error.hpp"
#include "mpdr/rng.hpp"
#include "mpdr/tensor.hpp"
#include "support.hpp"

using mpdr::Activation;
using mpdr::Bindings;
using mpdr::Graph;
using mpdr::Tensor;
using testsupport::fd_gradient;
using testsupport::max_rel_diff;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, mpdr::Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Compares the reverse-mode gradient against central finite differences for
// every placeholder in `wrt`.
void check_against_fd(const Graph& g, Graph::NodeId out, const Bindings& base,
                      const std::vector<Graph::NodeId>& wrt, double tol = 1e-6) {
    auto res = mpdr::gradient(g, out, base, wrt);
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        Graph::NodeId target = wrt[k];
        const Tensor* bound = base.find(target);
        REQUIRE(bound != nullptr);
        auto f = [&](const Tensor& x) {
            Bindings b = base;
            b.set(target, x);
            return mpdr::evaluate(g, out, b).item();
        };
        Tensor fd = fd_gradient(f, *bound);
        CAPTURE(k);
        CHECK(max_rel_diff(res.grads[k], fd) < tol);
    }
}

} // namespace

TEST_CASE("forward values of small hand-checked graphs") {
    Graph g;
    auto a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    auto b = g.constant(Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12}));
    auto p = g.matmul(a, b);
    Tensor out = mpdr::evaluate(g, p, {});
    // [1 2 3; 4 5 6] * [7 8; 9 10; 11 12] = [58 64; 139 154]
    CHECK(out.at(0, 0) == 58.0);
    CHECK(out.at(0, 1) == 64.0);
    CHECK(out.at(1, 0) == 139.0);
    CHECK(out.at(1, 1) == 154.0);

    auto bias = g.constant(Tensor::vector({100, 200}));
    Tensor shifted = mpdr::evaluate(g, g.add(p, bias), {});
    CHECK(shifted.at(1, 0) == 239.0);
    CHECK(shifted.at(0, 1) == 264.0);

    Tensor sq = mpdr::evaluate(g, g.row_sqnorm(p), {});
    CHECK(sq[0] == 58.0 * 58 + 64.0 * 64);
    CHECK(sq[1] == 139.0 * 139 + 154.0 * 154);

    CHECK(mpdr::evaluate(g, g.mean(p), {}).item() == doctest::Approx((58 + 64 + 139 + 154) / 4.0));
    CHECK(mpdr::evaluate(g, g.sum(bias), {}).item() == 300.0);
}

TEST_CASE("activation forward values at known points") {
    Graph g;
    auto x = g.constant(Tensor::vector({-2.0, -0.5, 0.0, 0.5, 2.0}));
    Tensor relu = mpdr::evaluate(g, g.activation(x, Activation::Relu), {});
    CHECK(relu[0] == 0.0);
    CHECK(relu[2] == 0.0);
    CHECK(relu[4] == 2.0);
    Tensor leaky = mpdr::evaluate(g, g.activation(x, Activation::LeakyRelu), {});
    CHECK(leaky[0] == doctest::Approx(-0.02));
    CHECK(leaky[3] == 0.5);
    Tensor th = mpdr::evaluate(g, g.activation(x, Activation::Tanh), {});
    CHECK(th[4] == doctest::Approx(std::tanh(2.0)));
    Tensor sg = mpdr::evaluate(g, g.activation(x, Activation::Sigmoid), {});
    CHECK(sg[2] == doctest::Approx(0.5));
    CHECK(sg[4] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("gradient of a two layer network matches finite differences") {
    mpdr::Rng rng(1001);
    Graph g;
    auto x = g.placeholder({4, 3}, "x");
    auto w1 = g.placeholder({3, 5}, "w1");
    auto b1 = g.placeholder({5}, "b1");
    auto w2 = g.placeholder({5, 1}, "w2");
    auto b2 = g.placeholder({1}, "b2");
    auto h = g.activation(g.add(g.matmul(x, w1), b1), Activation::Tanh);
    auto e = g.add(g.matmul(h, w2), b2);
    auto out = g.mean(e);

    Bindings bind;
    bind.set(x, random_tensor({4, 3}, rng));
    bind.set(w1, random_tensor({3, 5}, rng));
    bind.set(b1, random_tensor({5}, rng));
    bind.set(w2, random_tensor({5, 1}, rng));
    bind.set(b2, random_tensor({1}, rng));
    check_against_fd(g, out, bind, {x, w1, b1, w2, b2});
}

TEST_CASE("gradient through every op kind matches finite differences") {
    mpdr::Rng rng(2002);

    SUBCASE("mul, sub, scale") {
        Graph g;
        auto a = g.placeholder({3, 4});
        auto b = g.placeholder({3, 4});
        auto out = g.sum(g.scale(g.mul(g.sub(a, b), a), 0.7));
        Bindings bind;
        bind.set(a, random_tensor({3, 4}, rng));
        bind.set(b, random_tensor({3, 4}, rng));
        check_against_fd(g, out, bind, {a, b});
    }

    SUBCASE("bias broadcast in add and sub") {
        Graph g;
        auto a = g.placeholder({4, 3});
        auto bias = g.placeholder({3});
        auto lifted = g.sum(g.row_sqnorm(g.add(a, bias)));
        auto dropped = g.sum(g.row_sqnorm(g.sub(g.scale(a, 0.5), bias)));
        auto out = g.add(lifted, dropped);
        Bindings bind;
        bind.set(a, random_tensor({4, 3}, rng));
        bind.set(bias, random_tensor({3}, rng));
        check_against_fd(g, out, bind, {a, bias});
    }

    SUBCASE("row_sqnorm") {
        Graph g;
        auto a = g.placeholder({5, 2});
        auto out = g.mean(g.row_sqnorm(a));
        Bindings bind;
        bind.set(a, random_tensor({5, 2}, rng));
        check_against_fd(g, out, bind, {a});
    }

    SUBCASE("sphere projection") {
        Graph g;
        auto a = g.placeholder({4, 3});
        auto b = g.placeholder({4, 3});
        auto out = g.sum(g.mul(g.sphere_project(a), b));
        Bindings bind;
        // Rows bounded away from the origin so the projection is smooth.
        bind.set(a, random_tensor({4, 3}, rng, 0.5, 1.5));
        bind.set(b, random_tensor({4, 3}, rng));
        check_against_fd(g, out, bind, {a, b});
    }

    SUBCASE("sphere projection with radius") {
        Graph g;
        auto a = g.placeholder({2, 4});
        auto w = g.placeholder({4, 1});
        auto out = g.mean(g.matmul(g.sphere_project(a, 2.5), w));
        Bindings bind;
        bind.set(a, random_tensor({2, 4}, rng, 0.5, 1.5));
        bind.set(w, random_tensor({4, 1}, rng));
        check_against_fd(g, out, bind, {a, w});
    }

    SUBCASE("reshape") {
        Graph g;
        auto a = g.placeholder({6});
        auto m = g.reshape(a, {2, 3});
        auto out = g.sum(g.row_sqnorm(m));
        Bindings bind;
        bind.set(a, random_tensor({6}, rng));
        check_against_fd(g, out, bind, {a});
    }

    SUBCASE("relu and leaky relu away from the kink") {
        Graph g;
        auto a = g.placeholder({3, 3});
        auto out = g.sum(g.activation(a, Activation::Relu));
        auto out2 = g.sum(g.activation(a, Activation::LeakyRelu));
        Bindings bind;
        // Magnitudes well above the finite difference step.
        Tensor v({3, 3});
        for (std::size_t i = 0; i < v.numel(); ++i) {
            double m = rng.uniform(0.2, 1.0);
            v[i] = rng.uniform() < 0.5 ? -m : m;
        }
        bind.set(a, v);
        check_against_fd(g, out, bind, {a});
        check_against_fd(g, out2, bind, {a});
    }

    SUBCASE("sigmoid") {
        Graph g;
        auto a = g.placeholder({2, 3});
        auto out = g.mean(g.activation(a, Activation::Sigmoid));
        Bindings bind;
        bind.set(a, random_tensor({2, 3}, rng));
        check_against_fd(g, out, bind, {a});
    }
}

TEST_CASE("gradient accumulation on a shared subexpression") {
    // x feeds the output through two separate paths; the gradients add.
    mpdr::Rng rng(3003);
    Graph g;
    auto x = g.placeholder({2, 2});
    auto path1 = g.row_sqnorm(x);
    auto path2 = g.row_sqnorm(g.activation(x, Activation::Tanh));
    auto out = g.sum(g.add(path1, path2));
    Bindings bind;
    bind.set(x, random_tensor({2, 2}, rng));
    check_against_fd(g, out, bind, {x});
}

TEST_CASE("gradient of an unconnected placeholder is zero") {
    Graph g;
    auto x = g.placeholder({2});
    auto y = g.placeholder({3});
    auto out = g.sum(x);
    Bindings bind;
    bind.set(x, Tensor::vector({1.0, 2.0}));
    auto res = mpdr::gradient(g, out, bind, std::vector<Graph::NodeId>{x, y});
    CHECK(res.grads[0][0] == 1.0);
    CHECK(res.grads[0][1] == 1.0);
    CHECK(res.grads[1].shape() == std::vector<std::size_t>{3});
    CHECK(res.grads[1][0] == 0.0);
    CHECK(res.grads[1][1] == 0.0);
    CHECK(res.grads[1][2] == 0.0);
}

TEST_CASE("watch returns forward values without a second pass") {
    Graph g;
    auto x = g.placeholder({2, 2});
    auto sq = g.row_sqnorm(x);
    auto out = g.mean(sq);
    // A node that does not feed the output is still computed when watched.
    auto side = g.scale(sq, 3.0);
    Bindings bind;
    bind.set(x, Tensor::matrix(2, 2, {1, 2, 3, 4}));
    auto res = mpdr::gradient(g, out, bind, std::vector<Graph::NodeId>{x},
                              std::vector<Graph::NodeId>{sq, side});
    CHECK(res.value == doctest::Approx((5.0 + 25.0) / 2.0));
    CHECK(res.watched[0][0] == 5.0);
    CHECK(res.watched[0][1] == 25.0);
    CHECK(res.watched[1][0] == 15.0);
    CHECK(res.watched[1][1] == 75.0);
}

TEST_CASE("evaluation is deterministic") {
    mpdr::Rng rng(4004);
    Graph g;
    auto x = g.placeholder({3, 3});
    auto w = g.constant(random_tensor({3, 2}, rng));
    auto out = g.sum(g.activation(g.matmul(x, w), Activation::Tanh));
    Bindings bind;
    bind.set(x, random_tensor({3, 3}, rng));
    Tensor a = mpdr::evaluate(g, out, bind);
    Tensor b = mpdr::evaluate(g, out, bind);
    CHECK(a.item() == b.item());
}

TEST_CASE("graph construction rejects shape mismatches") {
    Graph g;
    auto a = g.placeholder({2, 3});
    auto b = g.placeholder({2, 3});
    auto v = g.placeholder({2});
    CHECK_THROWS_AS(g.matmul(a, b), mpdr::ContractError);
    CHECK_THROWS_AS(g.add(a, v), mpdr::ContractError);
    CHECK_THROWS_AS(g.mul(a, v), mpdr::ContractError);
    CHECK_THROWS_AS(g.row_sqnorm(v), mpdr::ContractError);
    CHECK_THROWS_AS(g.reshape(a, {4, 2}), mpdr::ContractError);
    CHECK_THROWS_AS(g.sphere_project(a, 0.0), mpdr::ContractError);
    CHECK_THROWS_AS(g.sphere_project(v), mpdr::ContractError);
}

TEST_CASE("evaluation contract violations") {
    Graph g;
    auto x = g.placeholder({2});
    auto out = g.sum(x);

    SUBCASE("unbound placeholder") {
        CHECK_THROWS_AS(mpdr::evaluate(g, out, {}), mpdr::ContractError);
    }
    SUBCASE("binding with the wrong shape") {
        Bindings bind;
        bind.set(x, Tensor::vector({1.0, 2.0, 3.0}));
        CHECK_THROWS_AS(mpdr::evaluate(g, out, bind), mpdr::ContractError);
    }
    SUBCASE("gradient of a non scalar") {
        Bindings bind;
        bind.set(x, Tensor::vector({1.0, 2.0}));
        CHECK_THROWS_AS(mpdr::gradient(g, x, bind, std::vector<Graph::NodeId>{x}),
                        mpdr::ContractError);
    }
}

TEST_CASE("non finite values are reported with the failing node") {
    Graph g;
    auto x = g.placeholder({2});
    auto out = g.sum(x);
    Bindings bind;
    bind.set(x, Tensor::vector({1.0, std::numeric_limits<double>::infinity()}));
    CHECK_THROWS_AS(mpdr::evaluate(g, out, bind), mpdr::NumericError);
}

TEST_CASE("sphere projection rejects near zero rows") {
    Graph g;
    auto x = g.placeholder({2, 2});
    auto out = g.sum(g.sphere_project(x));
    Bindings bind;
    bind.set(x, Tensor::matrix(2, 2, {1.0, 1.0, 0.0, 0.0}));
    CHECK_THROWS_AS(mpdr::evaluate(g, out, bind), mpdr::DegenerateInputError);
}

TEST_CASE("sphere projection yields unit rows") {
    mpdr::Rng rng(5005);
    Graph g;
    auto x = g.placeholder({6, 4});
    auto y = g.sphere_project(x);
    Bindings bind;
    bind.set(x, random_tensor({6, 4}, rng, 0.2, 3.0));
    Tensor out = mpdr::evaluate(g, y, bind);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < out.cols(); ++j) s += out.at(i, j) * out.at(i, j);
        CHECK(std::fabs(std::sqrt(s) - 1.0) < 1e-12);
    }
}
