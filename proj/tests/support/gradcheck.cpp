#include "support/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "projeq/data.hpp"
#include "projeq/random.hpp"

namespace projeq::testing {

using nn::Tape;
using nn::Tensor;
using nn::Var;

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, std::uint64_t index, double scale) {
    Tensor t(std::move(shape));
    Rng rng(seed, Stream::Test, index);
    for (double& x : t.data) x = scale * rng.normal();
    return t;
}

namespace {

GradCheck compare(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    GradCheck r;
    double diff = 0.0, na = 0.0, nn_ = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff += d * d;
        na += analytic[i] * analytic[i];
        nn_ += numeric[i] * numeric[i];
        r.max_abs_error = std::max(r.max_abs_error, std::abs(d));
    }
    const double denom = std::max(std::sqrt(std::max(na, nn_)), 1e-300);
    r.rel_error = diff == 0.0 ? 0.0 : std::sqrt(diff) / denom;
    r.entries = analytic.size();
    return r;
}

double objective(const std::vector<Tensor>& inputs, const GraphFn& f, const Tensor& weights) {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
    const Tensor& out = f(tape, vars).value();
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.data[i] * weights.data[i];
    return s;
}

}  // namespace

GradCheck check_graph_gradient(const std::vector<Tensor>& inputs, const GraphFn& f, std::uint64_t seed, double h,
                               std::vector<bool> differentiable) {
    if (differentiable.empty()) differentiable.assign(inputs.size(), true);
    std::vector<Tensor> grads;
    for (const Tensor& t : inputs) grads.emplace_back(t.shape);
    Tape tape;
    std::vector<Var> vars;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        vars.push_back(differentiable[i] ? tape.param(inputs[i], &grads[i]) : tape.constant(inputs[i]));
    const Var out = f(tape, vars);
    const Tensor weights = random_tensor(out.shape(), seed, 999);
    tape.backward(nn::sum(nn::mul(out, tape.constant(weights))));

    std::vector<double> analytic, numeric;
    std::vector<Tensor> work = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!differentiable[i]) continue;
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            const double x0 = work[i].data[j];
            work[i].data[j] = x0 + h;
            const double up = objective(work, f, weights);
            work[i].data[j] = x0 - h;
            const double down = objective(work, f, weights);
            work[i].data[j] = x0;
            analytic.push_back(grads[i].data[j]);
            numeric.push_back((up - down) / (2.0 * h));
        }
    }
    return compare(analytic, numeric);
}

GradCheck check_param_gradient(nn::ParamStore& params, const std::function<Var(Tape&)>& loss, double h) {
    params.zero_grad();
    {
        Tape tape;
        tape.backward(loss(tape));
    }
    std::vector<double> analytic, numeric;
    auto value_of = [&] {
        Tape tape;
        return loss(tape).value().data.at(0);
    };
    for (auto& e : params.entries()) {
        for (std::size_t j = 0; j < e.value.size(); ++j) {
            const double x0 = e.value.data[j];
            e.value.data[j] = x0 + h;
            const double up = value_of();
            e.value.data[j] = x0 - h;
            const double down = value_of();
            e.value.data[j] = x0;
            analytic.push_back(e.grad.data[j]);
            numeric.push_back((up - down) / (2.0 * h));
        }
    }
    return compare(analytic, numeric);
}

std::vector<PrimitiveCase> primitive_cases(std::uint64_t seed) {
    std::uint64_t k = 0;
    auto rt = [&](std::vector<std::size_t> shape, double scale = 1.0) { return random_tensor(std::move(shape), seed, k++, scale); };
    std::vector<PrimitiveCase> cases;
    auto add_case = [&](std::string name, std::vector<Tensor> inputs, GraphFn fn, std::vector<bool> diff = {}) {
        cases.push_back({std::move(name), std::move(inputs), std::move(fn), std::move(diff)});
    };
    using V = std::vector<Var>;

    add_case("add", {rt({3, 4}), rt({3, 4})}, [](Tape&, const V& v) { return nn::add(v[0], v[1]); });
    add_case("sub", {rt({3, 4}), rt({3, 4})}, [](Tape&, const V& v) { return nn::sub(v[0], v[1]); });
    add_case("mul", {rt({3, 4}), rt({3, 4})}, [](Tape&, const V& v) { return nn::mul(v[0], v[1]); });
    add_case("scale", {rt({5})}, [](Tape&, const V& v) { return nn::scale(v[0], -1.7); });
    add_case("add_bias", {rt({2, 3, 4}), rt({4})}, [](Tape&, const V& v) { return nn::add_bias(v[0], v[1]); });
    add_case("tanh", {rt({4, 5}, 1.5)}, [](Tape&, const V& v) { return nn::tanh(v[0]); });
    add_case("gelu", {rt({4, 5}, 1.5)}, [](Tape&, const V& v) { return nn::gelu(v[0]); });
    add_case("sigmoid", {rt({4, 5}, 1.5)}, [](Tape&, const V& v) { return nn::sigmoid(v[0]); });
    add_case("sum", {rt({3, 3})}, [](Tape&, const V& v) { return nn::sum(v[0]); });
    add_case("mean", {rt({3, 3})}, [](Tape&, const V& v) { return nn::mean(v[0]); });
    add_case("reshape", {rt({2, 6})}, [](Tape&, const V& v) { return nn::reshape(v[0], {3, 4}); });
    add_case("slice", {rt({3, 5, 2})}, [](Tape&, const V& v) { return nn::slice(v[0], 1, 1, 4); });
    add_case("concat", {rt({2, 3}), rt({2, 2})}, [](Tape&, const V& v) { return nn::concat({v[0], v[1]}, 1); });
    add_case("matmul", {rt({3, 4}), rt({4, 2})}, [](Tape&, const V& v) { return nn::matmul(v[0], v[1]); });
    {
        const Tensor m = rt({3, 2});
        add_case("mix_leading", {rt({2, 3, 4})}, [m](Tape&, const V& v) { return nn::mix_leading(m, v[0]); });
    }
    {
        const Tensor basis = rt({2, 3, 5});
        add_case("basis_expand", {rt({4, 3})}, [basis](Tape&, const V& v) { return nn::basis_expand(v[0], basis); });
    }
    add_case("slot_conv3x3", {rt({2, 2, 2, 4, 5}), rt({2, 3, 2, 3, 3})},
             [](Tape&, const V& v) { return nn::slot_conv3x3(v[0], v[1]); });
    add_case("spatial_mean", {rt({2, 3, 4, 5})}, [](Tape&, const V& v) { return nn::spatial_mean(v[0]); });
    add_case("selector", {rt({4, 3, 5}), rt({3, 4})}, [](Tape&, const V& v) { return nn::selector(v[0], v[1]); });
    add_case("contract_mix", {rt({3, 4}), rt({5, 4, 2})}, [](Tape&, const V& v) { return nn::contract_mix(v[0], v[1]); });
    {
        Rng rng(seed, Stream::Test, 77);
        std::vector<nn::BilinearTerm> terms;
        for (int t = 0; t < 12; ++t)
            terms.push_back({static_cast<std::size_t>(rng.below(3)), static_cast<std::size_t>(rng.below(4)),
                             static_cast<std::size_t>(rng.below(3)), rng.normal()});
        const std::vector<nn::PairIndex> pairs{{0, 1, 0}, {0, 2, 1}, {1, 0, 2}, {2, 2, 3}, {2, 0, 4}};
        add_case("pair_bilinear", {rt({3, 2, 4}), rt({5, 2, 3})},
                 [terms, pairs](Tape&, const V& v) { return nn::pair_bilinear(v[0], v[1], pairs, terms, 3); });
    }
    add_case("gate_mul", {rt({3, 2, 4}), rt({3, 2})}, [](Tape&, const V& v) { return nn::gate_mul(v[0], v[1]); });
    add_case("group_mean", {rt({6, 2, 3})}, [](Tape&, const V& v) { return nn::group_mean(v[0], 3); });
    add_case("batch_norm", {rt({5, 3}), rt({3}), rt({3})}, [](Tape&, const V& v) {
        nn::BatchNormState st;
        return nn::batch_norm(v[0], v[1], v[2], st, true);
    });
    {
        const std::vector<int> labels{0, 3, 8, 10};
        const std::vector<double> w(kFlipClassWeights.begin(), kFlipClassWeights.end());
        add_case("weighted_softmax_xent", {rt({4, 11})},
                 [labels, w](Tape&, const V& v) { return nn::weighted_softmax_xent(v[0], labels, w); });
    }
    {
        const Tensor target = rt({3, 4});
        add_case("spinor_sign_loss", {rt({3, 4})},
                 [target](Tape&, const V& v) { return nn::spinor_sign_loss(v[0], target); });
    }
    return cases;
}

}  // namespace projeq::testing
