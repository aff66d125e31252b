#include "dfmath/dfmath.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ap::df {

double activate(Activation act, double x) noexcept {
    switch (act) {
        case Activation::Identity: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

Tensor2D Affine::apply(const Tensor2D& x) const {
    require(x.cols() == weight.rows(), "affine: input width does not match weight rows");
    require(bias.rows() == 1 && bias.cols() == weight.cols(), "affine: bias must be 1 x out");
    return add_row_bias(matmul(x, weight), bias);
}

Tensor2D mlp_embed(const Tensor2D& f_d, const Mlp& mlp) {
    require(mlp.first.weight.cols() == mlp.second.weight.rows(), "mlp: hidden dimensions differ");
    Tensor2D h = mlp.first.apply(f_d);
    for (double& v : h.values()) v = activate(mlp.activation, v);
    return mlp.second.apply(h);
}

Tensor2D softmax_rows(const Tensor2D& logits) {
    Tensor2D out = logits;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double m = out(i, 0);
        for (std::size_t j = 1; j < out.cols(); ++j) m = std::max(m, out(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out(i, j) = std::exp(out(i, j) - m);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

namespace {

void check_attention(const Tensor2D& z, const AttentionWeights& w) {
    require(w.d > 0, "attention: key dimension d must be > 0");
    require(w.wq.rows() == z.cols(), "attention: Wq input dim does not match z");
    require(w.wq.cols() == w.d && w.wk.cols() == w.d, "attention: Wq/Wk output dim must equal d");
    require(w.wk.rows() == w.psi.output_dim() && w.wv.rows() == w.psi.output_dim(),
            "attention: Wk/Wv input dim must match psi output dim");
}

}  // namespace

Tensor2D attention_logits(const Tensor2D& z, const Tensor2D& f_d, const AttentionWeights& w) {
    check_attention(z, w);
    const Tensor2D q = matmul(z, w.wq);
    const Tensor2D k = matmul(mlp_embed(f_d, w.psi), w.wk);
    Tensor2D logits = matmul_transposed(q, k);
    const double inv = 1.0 / std::sqrt(static_cast<double>(w.d));
    for (double& v : logits.values()) v *= inv;
    return logits;
}

Tensor2D attention_values(const Tensor2D& f_d, const AttentionWeights& w) {
    return matmul(mlp_embed(f_d, w.psi), w.wv);
}

Tensor2D depth_cross_attention(const Tensor2D& z, const Tensor2D& f_d, const AttentionWeights& w) {
    require(f_d.rows() >= 1, "attention: need at least one depth token");
    return matmul(softmax_rows(attention_logits(z, f_d, w)), attention_values(f_d, w));
}

void validate_batch(const DenoiseBatch& b) {
    require(b.x_t.same_shape(b.eps) && b.x_t.same_shape(b.mask), "denoise batch: x_t, eps and D_t must share a shape");
    for (double m : b.mask.values()) require(m == 0.0 || m == 1.0, "denoise batch: D_t must be binary");
}

ToyDenoiser ToyDenoiser::zeros(std::size_t in, std::size_t hidden, std::size_t out) {
    return ToyDenoiser{Tensor2D(in, hidden), Tensor2D(1, hidden), Tensor2D(hidden, out), Tensor2D(1, out)};
}

ToyDenoiser ToyDenoiser::random(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed, double scale) {
    ToyDenoiser p = zeros(in, hidden, out);
    Rng rng(seed);
    for (Tensor2D* t : {&p.w1, &p.b1, &p.w2, &p.b2})
        for (double& v : t->values()) v = rng.uniform(-scale, scale);
    return p;
}

std::size_t ToyDenoiser::parameter_count() const noexcept { return w1.size() + b1.size() + w2.size() + b2.size(); }

std::vector<double> ToyDenoiser::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const Tensor2D* t : {&w1, &b1, &w2, &b2}) out.insert(out.end(), t->values().begin(), t->values().end());
    return out;
}

void ToyDenoiser::assign(std::span<const double> params) {
    require(params.size() == parameter_count(), "toy denoiser: parameter count mismatch");
    std::size_t at = 0;
    for (Tensor2D* t : {&w1, &b1, &w2, &b2}) {
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), t->size(), t->values().begin());
        at += t->size();
    }
}

std::size_t denoiser_input_size(const DenoiseBatch& batch) noexcept {
    return batch.x_t.size() + batch.condition.size() + 1;
}

Tensor2D denoiser_features(const DenoiseBatch& batch) {
    validate_batch(batch);
    Tensor2D f(1, denoiser_input_size(batch));
    std::size_t at = 0;
    for (std::size_t i = 0; i < batch.x_t.size(); ++i) f(0, at++) = batch.x_t.values()[i] * batch.mask.values()[i];
    for (double c : batch.condition) f(0, at++) = c;
    f(0, at) = batch.timestep / kTimestepScale;
    return f;
}

namespace {

struct Forward {
    Tensor2D features;
    Tensor2D hidden;  // after tanh
    Tensor2D out;     // 1 x N
};

Forward forward(const DenoiseBatch& batch, const ToyDenoiser& p) {
    Forward fw;
    fw.features = denoiser_features(batch);
    require(p.w1.rows() == fw.features.cols(), "toy_denoise: w1 input dim does not match features");
    require(p.w2.cols() == batch.eps.size(), "toy_denoise: output dim does not match eps");
    require(p.b1.cols() == p.w1.cols() && p.w2.rows() == p.w1.cols() && p.b2.cols() == p.w2.cols(),
            "toy_denoise: inconsistent parameter shapes");
    fw.hidden = add_row_bias(matmul(fw.features, p.w1), p.b1);
    for (double& v : fw.hidden.values()) v = std::tanh(v);
    fw.out = add_row_bias(matmul(fw.hidden, p.w2), p.b2);
    return fw;
}

}  // namespace

Tensor2D toy_denoise(const DenoiseBatch& batch, const ToyDenoiser& params) {
    Forward fw = forward(batch, params);
    return Tensor2D(batch.eps.rows(), batch.eps.cols(), std::move(fw.out.values()));
}

double layer_loss(const Tensor2D& eps, const Tensor2D& pred, const Tensor2D& mask) {
    require(eps.same_shape(pred) && eps.same_shape(mask), "layer_loss: shape mismatch");
    require(eps.size() > 0, "layer_loss: empty tensors");
    double sum = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double r = (eps.values()[i] - pred.values()[i]) * mask.values()[i];
        sum += r * r;
    }
    return sum / static_cast<double>(eps.size());
}

Tensor2D layer_loss_grad(const Tensor2D& eps, const Tensor2D& pred, const Tensor2D& mask) {
    require(eps.same_shape(pred) && eps.same_shape(mask), "layer_loss_grad: shape mismatch");
    Tensor2D g(eps.rows(), eps.cols());
    const double scale = -2.0 / static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double m = mask.values()[i];
        g.values()[i] = scale * m * m * (eps.values()[i] - pred.values()[i]);
    }
    return g;
}

double batch_layer_loss(std::span<const DenoiseBatch> batches, const ToyDenoiser& params, std::vector<double>* grad) {
    require(!batches.empty(), "batch_layer_loss: empty batch list");
    if (grad) grad->assign(params.parameter_count(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batches.size());
    double total = 0.0;
    for (const DenoiseBatch& b : batches) {
        const Forward fw = forward(b, params);
        const Tensor2D pred(b.eps.rows(), b.eps.cols(), fw.out.values());
        total += layer_loss(b.eps, pred, b.mask);
        if (!grad) continue;

        const Tensor2D g_pred = layer_loss_grad(b.eps, pred, b.mask);
        const Tensor2D g_out(1, g_pred.size(), g_pred.values());
        const std::size_t in = params.w1.rows();
        const std::size_t hid = params.w1.cols();
        const std::size_t out = params.w2.cols();
        std::vector<double>& gv = *grad;
        const std::size_t off_b1 = in * hid;
        const std::size_t off_w2 = off_b1 + hid;
        const std::size_t off_b2 = off_w2 + hid * out;

        std::vector<double> d_hidden(hid, 0.0);
        for (std::size_t h = 0; h < hid; ++h) {
            for (std::size_t o = 0; o < out; ++o) {
                gv[off_w2 + h * out + o] += inv_b * fw.hidden(0, h) * g_out(0, o);
                d_hidden[h] += params.w2(h, o) * g_out(0, o);
            }
        }
        for (std::size_t o = 0; o < out; ++o) gv[off_b2 + o] += inv_b * g_out(0, o);
        for (std::size_t h = 0; h < hid; ++h) {
            const double th = fw.hidden(0, h);
            const double d_pre = d_hidden[h] * (1.0 - th * th);
            gv[off_b1 + h] += inv_b * d_pre;
            for (std::size_t i = 0; i < in; ++i) gv[i * hid + h] += inv_b * fw.features(0, i) * d_pre;
        }
    }
    return total * inv_b;
}

double gradient_check(const LossFn& loss, std::span<const double> params, double step) {
    require(step > 0.0, "gradient_check: step must be > 0");
    std::vector<double> analytic;
    const double base = loss(params, &analytic);
    if (!std::isfinite(base)) fail(ErrorCode::Numerical, "gradient_check: loss is not finite");
    require(analytic.size() == params.size(), "gradient_check: gradient length does not match parameters");

    std::vector<double> p(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        const double up = loss(p, nullptr);
        p[i] = saved - step;
        const double down = loss(p, nullptr);
        p[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) fail(ErrorCode::Numerical, "gradient_check: loss is not finite");
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
    }
    return worst;
}

namespace {

Tensor2D random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Tensor2D t(r, c);
    for (double& v : t.values()) v = rng.uniform(-scale, scale);
    return t;
}

Tensor2D random_mask(Rng& rng, std::size_t r, std::size_t c) {
    Tensor2D t(r, c);
    for (double& v : t.values()) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return t;
}

}  // namespace

DfCheckReport run_dfcheck(std::uint64_t seed) {
    Rng rng(seed);
    DfCheckReport report;

    const std::size_t dz = 5, df = 3, dpsi = 4, hidden = 6, d = 4, dv = 3;
    AttentionWeights w;
    w.psi = Mlp{Affine{random_tensor(rng, df, hidden), random_tensor(rng, 1, hidden)}, Activation::Relu,
                Affine{random_tensor(rng, hidden, dpsi), random_tensor(rng, 1, dpsi)}};
    w.wq = random_tensor(rng, dz, d);
    w.wk = random_tensor(rng, dpsi, d);
    w.wv = random_tensor(rng, dpsi, dv);
    w.d = d;

    for (int trial = 0; trial < 20; ++trial) {
        const Tensor2D z = random_tensor(rng, 7, dz, 3.0);
        const Tensor2D f = random_tensor(rng, 9, df, 3.0);
        const Tensor2D attn = softmax_rows(attention_logits(z, f, w));
        for (std::size_t i = 0; i < attn.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < attn.cols(); ++j) s += attn(i, j);
            report.max_row_sum_error = std::max(report.max_row_sum_error, std::abs(s - 1.0));
        }
        const Tensor2D one = random_tensor(rng, 1, df, 3.0);
        const Tensor2D out = depth_cross_attention(z, one, w);
        const Tensor2D v = attention_values(one, w);
        for (std::size_t i = 0; i < out.rows(); ++i)
            for (std::size_t j = 0; j < out.cols(); ++j)
                report.single_key_error = std::max(report.single_key_error, std::abs(out(i, j) - v(0, j)));

        const Tensor2D eps = random_tensor(rng, 3, 4);
        const Tensor2D pred = random_tensor(rng, 3, 4);
        double plain = 0.0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double r = eps.values()[i] - pred.values()[i];
            plain += r * r;
        }
        plain /= static_cast<double>(eps.size());
        report.loss_reduction_error =
            std::max(report.loss_reduction_error, std::abs(layer_loss(eps, pred, Tensor2D(3, 4, 1.0)) - plain));
    }

    std::vector<DenoiseBatch> batches;
    for (int b = 0; b < 4; ++b) {
        DenoiseBatch batch{random_tensor(rng, 2, 3), random_tensor(rng, 2, 3), random_mask(rng, 2, 3),
                           {rng.uniform(-1, 1), rng.uniform(-1, 1)}, static_cast<int>(rng.below(1000))};
        batches.push_back(std::move(batch));
    }
    const ToyDenoiser model = ToyDenoiser::random(denoiser_input_size(batches[0]), 5, 6, rng.next());
    const LossFn fn = [&](std::span<const double> p, std::vector<double>* g) {
        ToyDenoiser m = model;
        m.assign(p);
        return batch_layer_loss(batches, m, g);
    };
    report.gradient_error = gradient_check(fn, model.flatten(), 1e-6);

    report.passed = report.max_row_sum_error <= 1e-12 && report.single_key_error == 0.0 &&
                    report.loss_reduction_error <= 1e-12 && report.gradient_error < 1e-4;
    return report;
}

}  // namespace ap::df
