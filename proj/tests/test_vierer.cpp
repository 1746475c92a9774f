#include <doctest.h>

#include <cmath>

#include "projeq/data.hpp"
#include "projeq/experiments.hpp"
#include "projeq/vierer.hpp"
#include "support/gradcheck.hpp"

using namespace projeq;

namespace {

nn::Tensor random_images(std::size_t b, std::size_t h, std::size_t w, std::uint64_t seed) {
    return testing::random_tensor({b, h, w}, seed, 0);
}

nn::Tensor flip_batch(const nn::Tensor& x, std::size_t g) {
    const std::size_t b = x.dim(0), h = x.dim(1), w = x.dim(2);
    nn::Tensor out(x.shape);
    for (std::size_t i = 0; i < b; ++i) {
        const std::vector<double> img(x.data.begin() + i * h * w, x.data.begin() + (i + 1) * h * w);
        const auto f = flip_image(img, h, w, g);
        std::copy(f.begin(), f.end(), out.data.begin() + i * h * w);
    }
    return out;
}

/// Largest |feat(gx)[e] - e(g) g feat(x)[e]| over slots, for features [G,C,B,H,W].
double slot_defect(const nn::Tensor& fx, const nn::Tensor& fgx, std::size_t g) {
    const ViererFilterBank& bank = vierer_filter_bank();
    const std::size_t slots = fx.dim(0), inner = fx.dim(1) * fx.dim(2), h = fx.dim(3), w = fx.dim(4);
    double worst = 0.0;
    for (std::size_t e = 0; e < slots; ++e)
        for (std::size_t c = 0; c < inner; ++c) {
            const std::size_t off = (e * inner + c) * h * w;
            const std::vector<double> img(fx.data.begin() + off, fx.data.begin() + off + h * w);
            const auto moved = flip_image(img, h, w, g);
            const double s = slots == 1 ? 1.0 : bank.table.data[e * 4 + g];
            for (std::size_t p = 0; p < h * w; ++p) worst = std::max(worst, std::abs(fgx.data[off + p] - s * moved[p]));
        }
    return worst;
}

}  // namespace

TEST_CASE("filter bank") {
    const ViererFilterBank& bank = vierer_filter_bank();
    REQUIRE(bank.bases.size() == 4);
    const std::array<std::size_t, 4> dims{4, 2, 2, 1};
    for (std::size_t e = 0; e < 4; ++e) CHECK(bank.bases[e].dim() == dims[e]);
    CHECK(bank.offsets == std::array<std::size_t, 5>{0, 4, 6, 8, 9});
    const std::array<double, 16> table{1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1};
    for (std::size_t i = 0; i < 16; ++i) CHECK(bank.table.data[i] == table[i]);
    CHECK(bank.transform.shape == std::vector<std::size_t>{4, 9, 9});
}

TEST_CASE("typed kernels transform by their character under flips") {
    const auto theta = testing::random_tensor({9}, 2, 0);
    const ViererFilterBank& bank = vierer_filter_bank();
    for (std::size_t e = 0; e < 4; ++e) {
        const auto k = vierer_kernel(theta.data.data(), e);
        const std::vector<double> kv(k.begin(), k.end());
        for (std::size_t g = 0; g < 4; ++g) {
            const auto f = flip_image(kv, 3, 3, g);
            for (std::size_t i = 0; i < 9; ++i) CHECK(f[i] == doctest::Approx(bank.table.data[e * 4 + g] * kv[i]));
        }
    }
}

TEST_CASE("both models spend nine parameters per kernel") {
    FlipNet v(FlipNetConfig{VisionModel::Vierer, {4, 4, 4, 11}, 1.0}, 1);
    FlipNet b(FlipNetConfig{VisionModel::Baseline, {4, 4, 4, 11}, 1.0}, 1);
    for (std::size_t l = 0; l < 4; ++l)
        CHECK(v.params().value(FlipNet::kernel_name(l)).shape == b.params().value(FlipNet::kernel_name(l)).shape);
    CHECK(v.params().value("selector").shape == std::vector<std::size_t>{11, 4});
    CHECK_FALSE(b.params().contains("selector"));
    CHECK(parameter_count(v.params()) == 786);
    CHECK(parameter_count(b.params()) == 742);
    CHECK(v.slots() == 4);
    CHECK(b.slots() == 1);
}

TEST_CASE("model names") {
    CHECK(parse_vision_model("vierer") == VisionModel::Vierer);
    CHECK(parse_vision_model(to_string(VisionModel::Baseline)) == VisionModel::Baseline);
    CHECK_THROWS_AS(parse_vision_model("resnet"), DomainError);
    CHECK_THROWS_AS(FlipNet(FlipNetConfig{VisionModel::Vierer, {}, 1.0}, 0), DomainError);
}

TEST_CASE("constant images give zero pre-norm outputs") {
    nn::Tensor img({2, 6, 6}, 0.7);
    for (VisionModel m : {VisionModel::Vierer, VisionModel::Baseline}) {
        FlipNet net(FlipNetConfig{m, {3, 3, 3, 11}, 1.0}, 2);
        for (double v : net.pre_norm_outputs(img).data) CHECK(std::abs(v) < 1e-14);
    }
    const nn::Tensor c = center_images(testing::random_tensor({3, 4, 4}, 1, 1));
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < 16; ++p) s += c.data[i * 16 + p];
        CHECK(std::abs(s) < 1e-13);
    }
}

TEST_CASE("slot features are flip equivariant and match the direct oracle") {
    FlipNet net(FlipNetConfig{VisionModel::Vierer, {3, 3, 3, 11}, 1.0}, 3);
    const nn::Tensor x = random_images(3, 7, 6, 4);
    const auto fx = net.slot_features(x);
    const auto direct = net.slot_features_direct(x);
    REQUIRE(fx.size() == 4);
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(fx[l].shape == direct[l].shape);
        double d = 0.0;
        for (std::size_t i = 0; i < fx[l].size(); ++i) d = std::max(d, std::abs(fx[l].data[i] - direct[l].data[i]));
        CHECK(d < 1e-12);
    }
    for (std::size_t g = 1; g < 4; ++g) {
        const auto fg = net.slot_features(flip_batch(x, g));
        for (std::size_t l = 0; l < 4; ++l) CHECK(slot_defect(fx[l], fg[l], g) < 1e-12);
    }
}

TEST_CASE("the baseline is not flip equivariant") {
    FlipNet net(FlipNetConfig{VisionModel::Baseline, {3, 3, 3, 11}, 1.0}, 3);
    const nn::Tensor x = random_images(2, 6, 6, 5);
    const auto fx = net.slot_features(x);
    const auto fg = net.slot_features(flip_batch(x, 2));
    CHECK(slot_defect(fx.back(), fg.back(), 2) > 1e-3);
}

TEST_CASE("a selector on the doubly odd slot flips sign under single flips") {
    FlipNet net(FlipNetConfig{VisionModel::Vierer, {3, 3, 3, 11}, 1.0}, 6);
    nn::Tensor& sel = net.params().value("selector");
    for (std::size_t k = 0; k < 11; ++k)
        for (std::size_t g = 0; g < 4; ++g) sel.data[k * 4 + g] = g == 3 ? 1.0 : 0.0;
    const nn::Tensor x = random_images(2, 8, 8, 7);
    const nn::Tensor y = net.pre_norm_outputs(x);
    double scale = 0.0;
    for (double v : y.data) scale = std::max(scale, std::abs(v));
    REQUIRE(scale > 1e-6);
    for (std::size_t g = 1; g < 4; ++g) {
        const nn::Tensor yg = net.pre_norm_outputs(flip_batch(x, g));
        const double s = g == 3 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(yg.data[i] == doctest::Approx(s * y.data[i]).epsilon(1e-10));
    }
}

TEST_CASE("forward shapes and input checks") {
    FlipNet net(FlipNetConfig{VisionModel::Vierer, {2, 2, 2, 11}, 1.0}, 8);
    nn::Tape tape;
    const nn::Var out = net.forward(tape, random_images(4, 5, 5, 9), true);
    CHECK(out.shape() == std::vector<std::size_t>{4, 11});
    CHECK_THROWS_AS(net.forward(tape, nn::Tensor({4, 25}), true), DimensionError);
}
