#include "projeq/vierer.hpp"

#include <cmath>

#include "projeq/random.hpp"

namespace projeq {

namespace {

ViererFilterBank build_bank() {
    ViererFilterBank bank;
    const LinearRep flips = rep_flip_image(3, 3);
    bank.chars = character_group(flips.group(), Field::Real);
    if (bank.chars.size() != 4) throw InvariantError("vierer_filter_bank: expected four characters");
    std::size_t off = 0;
    for (std::size_t e = 0; e < 4; ++e) {
        bank.bases.push_back(invariant_basis(flips, bank.chars[e]));
        bank.offsets[e] = off;
        off += bank.bases.back().dim();
    }
    bank.offsets[4] = off;
    if (off != 9) throw InvariantError("vierer_filter_bank: filter bases do not span 3x3 kernels");
    bank.table = nn::Tensor({4, 4});
    for (std::size_t e = 0; e < 4; ++e)
        for (std::size_t g = 0; g < 4; ++g) bank.table.data[e * 4 + g] = bank.chars[e](g).real();
    bank.transform = nn::Tensor({4, 9, 9});
    for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t e = 0; e < 4; ++e)
            for (std::size_t k = 0; k < bank.bases[e].dim(); ++k)
                for (std::size_t p = 0; p < 9; ++p)
                    bank.transform.data[(g * 9 + bank.offsets[e] + k) * 9 + p] =
                        bank.table.data[e * 4 + g] * bank.bases[e].basis[k][p].real();
    return bank;
}

/// Zero-padded 3x3 cross-correlation accumulated into out.
void conv_add(const double* x, const std::array<double, 9>& k, std::size_t h, std::size_t w, double* out) {
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
            double s = 0.0;
            for (std::size_t t = 0; t < 9; ++t) {
                const long sy = static_cast<long>(y) + static_cast<long>(t / 3) - 1;
                const long sx = static_cast<long>(xx) + static_cast<long>(t % 3) - 1;
                if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) continue;
                s += k[t] * x[sy * static_cast<long>(w) + sx];
            }
            out[y * w + xx] += s;
        }
}

}  // namespace

const ViererFilterBank& vierer_filter_bank() {
    static const ViererFilterBank bank = build_bank();
    return bank;
}

std::array<double, 9> vierer_kernel(const double* theta, std::size_t e) {
    const ViererFilterBank& bank = vierer_filter_bank();
    std::array<double, 9> k{};
    for (std::size_t j = 0; j < bank.bases.at(e).dim(); ++j)
        for (std::size_t p = 0; p < 9; ++p) k[p] += theta[bank.offsets[e] + j] * bank.bases[e].basis[j][p].real();
    return k;
}

std::string to_string(VisionModel m) { return m == VisionModel::Vierer ? "vierer" : "baseline"; }

VisionModel parse_vision_model(const std::string& s) {
    if (s == "vierer") return VisionModel::Vierer;
    if (s == "baseline") return VisionModel::Baseline;
    throw DomainError("unknown model '" + s + "' (expected vierer or baseline)");
}

nn::Tensor center_images(const nn::Tensor& images) {
    if (images.rank() != 3) throw DimensionError("center_images: expected [B,H,W]");
    nn::Tensor out = images;
    const std::size_t hw = images.shape[1] * images.shape[2];
    for (std::size_t b = 0; b < images.shape[0]; ++b) {
        double s = 0.0;
        for (std::size_t p = 0; p < hw; ++p) s += images.data[b * hw + p];
        s /= static_cast<double>(hw);
        for (std::size_t p = 0; p < hw; ++p) out.data[b * hw + p] -= s;
    }
    return out;
}

std::string FlipNet::kernel_name(std::size_t layer) { return "conv" + std::to_string(layer) + ".theta"; }

FlipNet::FlipNet(FlipNetConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    if (cfg_.widths.empty()) throw DomainError("FlipNet: at least one layer required");
    for (std::size_t w : cfg_.widths)
        if (w == 0) throw DomainError("FlipNet: zero layer width");
    Rng rng(seed, Stream::Init);
    std::size_t in = 1;
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
        const std::size_t out = cfg_.widths[l];
        nn::Tensor theta({out * in, 9});
        const double sd = cfg_.init_gain / std::sqrt(9.0 * static_cast<double>(in));
        for (double& v : theta.data) v = rng.normal(0.0, sd);
        params_.add(kernel_name(l), std::move(theta));
        in = out;
    }
    const std::size_t k = classes();
    if (cfg_.model == VisionModel::Vierer) {
        nn::Tensor p({k, 4});
        for (double& v : p.data) v = rng.normal(0.0, 0.5);
        params_.add("selector", std::move(p));
    }
    params_.add("bn.gamma", nn::Tensor({k}, 1.0));
    params_.add("bn.beta", nn::Tensor({k}, 0.0));
}

std::vector<nn::Var> FlipNet::layers(nn::Tape& tape, const nn::Tensor& images) {
    const nn::Tensor centered = center_images(images);
    const std::size_t b = images.shape[0], h = images.shape[1], w = images.shape[2];
    nn::Var v = tape.constant(nn::Tensor({1, 1, b, h, w}, centered.data));
    std::vector<nn::Var> out;
    std::size_t in = 1;
    const bool vierer = cfg_.model == VisionModel::Vierer;
    const ViererFilterBank& bank = vierer_filter_bank();
    nn::Tensor to_slots({4, 4});    // vhat[g] = sum_d table[d][g] v[d]
    nn::Tensor from_slots({4, 4});  // v[e] = sum_g table[e][g] yhat[g] / 4
    for (std::size_t e = 0; e < 4; ++e)
        for (std::size_t g = 0; g < 4; ++g) {
            to_slots.data[g * 4 + e] = bank.table.data[e * 4 + g];
            from_slots.data[e * 4 + g] = bank.table.data[e * 4 + g] / 4.0;
        }
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
        const std::size_t o = cfg_.widths[l];
        nn::Var theta = params_.bind(tape, kernel_name(l));
        if (vierer) {
            // The input image sits in the trivial slot only, so every transform slot sees it unchanged.
            nn::Var vhat = l == 0 ? nn::mix_leading(nn::Tensor({4, 1}, 1.0), v) : nn::mix_leading(to_slots, v);
            nn::Var khat = nn::reshape(nn::basis_expand(theta, bank.transform), {4, o, in, 3, 3});
            v = nn::tanh(nn::mix_leading(from_slots, nn::slot_conv3x3(vhat, khat)));
        } else {
            v = nn::tanh(nn::slot_conv3x3(v, nn::reshape(theta, {1, o, in, 3, 3})));
        }
        out.push_back(v);
        in = o;
    }
    return out;
}

nn::Var FlipNet::pooled_selected(nn::Tape& tape, const nn::Var& last) {
    nn::Var pooled = nn::spatial_mean(last);
    if (cfg_.model == VisionModel::Vierer) return nn::selector(pooled, params_.bind(tape, "selector"));
    return nn::selector(pooled, tape.constant(nn::Tensor({classes(), 1}, 1.0)));
}

nn::Var FlipNet::forward(nn::Tape& tape, const nn::Tensor& images, bool training) {
    if (images.rank() != 3) throw DimensionError("FlipNet::forward: expected images [B,H,W]");
    auto feats = layers(tape, images);
    nn::Var sel = pooled_selected(tape, feats.back());
    return nn::batch_norm(sel, params_.bind(tape, "bn.gamma"), params_.bind(tape, "bn.beta"), bn_, training);
}

nn::Tensor FlipNet::pre_norm_outputs(const nn::Tensor& images) {
    nn::Tape tape;
    auto feats = layers(tape, images);
    return pooled_selected(tape, feats.back()).value();
}

std::vector<nn::Tensor> FlipNet::slot_features(const nn::Tensor& images) {
    nn::Tape tape;
    std::vector<nn::Tensor> out;
    for (const nn::Var& v : layers(tape, images)) out.push_back(v.value());
    return out;
}

std::vector<nn::Tensor> FlipNet::slot_features_direct(const nn::Tensor& images) const {
    if (images.rank() != 3) throw DimensionError("slot_features_direct: expected images [B,H,W]");
    const nn::Tensor centered = center_images(images);
    const std::size_t b = images.shape[0], h = images.shape[1], w = images.shape[2], hw = h * w;
    const bool vierer = cfg_.model == VisionModel::Vierer;
    const std::size_t s = slots();
    std::vector<std::size_t> product(16);
    const ViererFilterBank& bank = vierer_filter_bank();
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c) product[a * 4 + c] = find_character(bank.chars, char_mul(bank.chars[a], bank.chars[c]));

    // Input: image in the trivial slot, zero elsewhere.
    nn::Tensor v({s, 1, b, h, w});
    std::copy(centered.data.begin(), centered.data.end(), v.data.begin());
    std::vector<nn::Tensor> out;
    std::size_t in = 1;
    for (std::size_t l = 0; l < cfg_.widths.size(); ++l) {
        const std::size_t o = cfg_.widths[l];
        const nn::Tensor& theta = params_.value(kernel_name(l));
        nn::Tensor y({s, o, b, h, w});
        for (std::size_t oc = 0; oc < o; ++oc)
            for (std::size_t ic = 0; ic < in; ++ic) {
                const double* th = &theta.data[(oc * in + ic) * 9];
                for (std::size_t gam = 0; gam < s; ++gam) {
                    std::array<double, 9> k{};
                    if (vierer) {
                        k = vierer_kernel(th, gam);
                    } else {
                        std::copy(th, th + 9, k.begin());
                    }
                    for (std::size_t del = 0; del < s; ++del) {
                        const std::size_t eps = vierer ? product[gam * 4 + del] : 0;
                        for (std::size_t bi = 0; bi < b; ++bi)
                            conv_add(&v.data[((del * in + ic) * b + bi) * hw], k, h, w,
                                     &y.data[((eps * o + oc) * b + bi) * hw]);
                    }
                }
            }
        for (double& x : y.data) x = nn::fast_tanh(x);
        out.push_back(y);
        v = std::move(y);
        in = o;
    }
    return out;
}

}  // namespace projeq
