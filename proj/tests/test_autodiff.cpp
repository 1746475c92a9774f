#include <doctest.h>

#include <cmath>

#include "projeq/autodiff.hpp"
#include "projeq/data.hpp"
#include "projeq/spinor_net.hpp"
#include "projeq/vierer.hpp"
#include "support/gradcheck.hpp"

using namespace projeq;
using namespace projeq::testing;
using nn::Tape;
using nn::Var;

TEST_CASE("quadratic form gradient matches the closed form") {
    // f(x) = |W x|^2 / 2 has gradient W^T W x.
    const nn::Tensor w = random_tensor({3, 4}, 1, 0);
    const nn::Tensor x = random_tensor({4, 1}, 1, 1);
    nn::Tensor gx({4, 1});
    Tape tape;
    const Var xv = tape.param(x, &gx);
    const Var y = nn::matmul(tape.constant(w), xv);
    tape.backward(nn::scale(nn::sum(nn::mul(y, y)), 0.5));
    for (std::size_t j = 0; j < 4; ++j) {
        double expect = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 4; ++k) expect += w.data[i * 4 + j] * w.data[i * 4 + k] * x.data[k];
        CHECK(gx.data[j] == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("every primitive agrees with central differences") {
    for (const PrimitiveCase& c : primitive_cases(3)) {
        CAPTURE(c.name);
        const GradCheck r = check_graph_gradient(c.inputs, c.fn, 5, 1e-5, c.differentiable);
        CHECK(r.entries > 0);
        CHECK(r.rel_error < 1e-6);
    }
}

TEST_CASE("gradients accumulate across uses of one parameter") {
    const nn::Tensor x = random_tensor({5}, 2, 0);
    nn::Tensor g({5});
    Tape tape;
    const Var v = tape.param(x, &g);
    tape.backward(nn::sum(nn::add(v, nn::scale(v, 2.0))));
    for (double d : g.data) CHECK(d == 3.0);
}

TEST_CASE("full networks pass gradient checks") {
    const ImageSet glyphs = synthetic_glyphs(6, 11, 0, GlyphOptions{9, 0.05, 1});
    const auto samples = gen_flip_dataset(glyphs, 11);
    nn::Tensor images({samples.size(), 9, 9});
    std::vector<int> labels;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].image.begin(), samples[i].image.end(), images.data.begin() + i * 81);
        labels.push_back(samples[i].label);
    }
    const std::vector<double> w(kFlipClassWeights.begin(), kFlipClassWeights.end());

    for (VisionModel m : {VisionModel::Vierer, VisionModel::Baseline}) {
        CAPTURE(to_string(m));
        FlipNet net(FlipNetConfig{m, {2, 2, 2, 11}, 1.0}, 4);
        const GradCheck r = check_param_gradient(net.params(), [&](Tape& tape) {
            return nn::weighted_softmax_xent(net.forward(tape, images, true), labels, w);
        });
        CHECK(r.entries == net.params().count());
        CHECK(r.rel_error < 1e-4);
    }

    const auto clouds = gen_spinor_dataset(0.1, 3, 4, true);
    const CloudBatch batch = make_cloud_batch(clouds);
    const nn::Tensor target = spinor_targets(clouds);
    for (SpinorVariant v : {SpinorVariant::SquaredFeatures, SpinorVariant::AsFilters}) {
        CAPTURE(to_string(v));
        SpinorNet net(v, 6);
        const GradCheck r = check_param_gradient(
            net.params(), [&](Tape& tape) { return nn::spinor_sign_loss(net.forward(tape, batch), target); });
        CHECK(r.rel_error < 1e-4);
    }
}

TEST_CASE("fast tanh is odd and accurate") {
    for (double x = -25.0; x <= 25.0; x += 0.01537) {
        CHECK(nn::fast_tanh(-x) == -nn::fast_tanh(x));
        CHECK(std::abs(nn::fast_tanh(x) - std::tanh(x)) < 1e-14);
    }
    std::vector<double> xs{-3.0, -1e-9, 0.0, 1e-9, 0.4, 3.0}, ys(xs.size());
    nn::fast_tanh(xs.data(), ys.data(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(ys[i] == nn::fast_tanh(xs[i]));
}

TEST_CASE("tape misuse is rejected") {
    Tape tape;
    const Var v = tape.constant(nn::Tensor({2}, 1.0));
    CHECK_THROWS_AS(tape.backward(v), DimensionError);
    const Var s = nn::sum(v);
    tape.clear();
    CHECK_THROWS_AS(tape.backward(s), Error);
    CHECK_THROWS_AS((void)s.value(), Error);

    Tape other;
    const Var w = other.constant(nn::Tensor({1}, 2.0));
    CHECK_THROWS_AS(tape.backward(w), Error);
    nn::Tensor bad({3});
    CHECK_THROWS_AS(tape.param(nn::Tensor({2}), &bad), DimensionError);
}

TEST_CASE("shape errors are reported") {
    Tape tape;
    const Var a = tape.constant(nn::Tensor({2, 3}));
    const Var b = tape.constant(nn::Tensor({3, 2}));
    CHECK_THROWS_AS(nn::add(a, b), DimensionError);
    CHECK_THROWS_AS(nn::matmul(a, a), DimensionError);
    CHECK_THROWS_AS(nn::reshape(a, {4}), DimensionError);
}

TEST_CASE("parameter store") {
    nn::ParamStore ps;
    ps.add("a", nn::Tensor({2, 2}, 1.0));
    ps.add("b", nn::Tensor({3}));
    CHECK(ps.count() == 7);
    CHECK_THROWS_AS(ps.add("a", nn::Tensor({1})), InvariantError);
    CHECK_THROWS_AS(ps.value("missing"), Error);
    CHECK(ps.all_finite());
    ps.value("b").data[1] = std::nan("");
    CHECK_FALSE(ps.all_finite());
    CHECK(ps.entries().front().name == "a");
}

TEST_CASE("batch norm uses running statistics at evaluation") {
    nn::BatchNormState st;
    Tape tape;
    const nn::Tensor x({4, 1}, std::vector<double>{1, 2, 3, 4});
    const Var g = tape.constant(nn::Tensor({1}, 1.0));
    const Var b = tape.constant(nn::Tensor({1}, 0.0));
    const nn::Tensor& y = nn::batch_norm(tape.constant(x), g, b, st, true).value();
    double m = 0.0;
    for (double v : y.data) m += v;
    CHECK(std::abs(m) < 1e-12);
    CHECK(st.running_mean.at(0) == doctest::Approx(0.25));
    // Unbiased variance 5/3 blended into the initial 1.
    CHECK(st.running_var.at(0) == doctest::Approx(0.9 + 0.1 * 5.0 / 3.0));
    const nn::Tensor& e = nn::batch_norm(tape.constant(x), g, b, st, false).value();
    CHECK(e.data[0] == doctest::Approx((1.0 - 0.25) / std::sqrt(st.running_var[0] + st.eps)));
}
