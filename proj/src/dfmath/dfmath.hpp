#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dfmath/tensor.hpp"

namespace ap::df {

enum class Activation { Identity, Relu, Tanh };

double activate(Activation act, double x) noexcept;

/// Row-vector affine map: y = x * weight + bias, weight is in x out, bias is 1 x out.
struct Affine {
    Tensor2D weight;
    Tensor2D bias;

    Tensor2D apply(const Tensor2D& x) const;
};

/// Depth embedding: second(act(first(x))).
struct Mlp {
    Affine first;
    Activation activation = Activation::Relu;
    Affine second;

    std::size_t input_dim() const noexcept { return first.weight.rows(); }
    std::size_t output_dim() const noexcept { return second.weight.cols(); }
};

Tensor2D mlp_embed(const Tensor2D& f_d, const Mlp& mlp);

/// Projections for depth-fused cross-attention. Tokens are rows, so
/// Q = z * wq (dz x d), K = psi(f_d) * wk (dpsi x d), V = psi(f_d) * wv (dpsi x dv).
/// A single psi is shared by K and V.
struct AttentionWeights {
    Tensor2D wq;
    Tensor2D wk;
    Tensor2D wv;
    std::size_t d = 0;
    Mlp psi;
};

/// Row-wise softmax with max subtraction.
Tensor2D softmax_rows(const Tensor2D& logits);

/// Q K^T / sqrt(d).
Tensor2D attention_logits(const Tensor2D& z, const Tensor2D& f_d, const AttentionWeights& w);
Tensor2D attention_values(const Tensor2D& f_d, const AttentionWeights& w);

/// softmax(Q K^T / sqrt(d)) V
Tensor2D depth_cross_attention(const Tensor2D& z, const Tensor2D& f_d, const AttentionWeights& w);

/// One training example for the masked noise-prediction loss.
struct DenoiseBatch {
    Tensor2D x_t;
    Tensor2D eps;
    Tensor2D mask;  // D_t, entries in {0, 1}
    std::vector<double> condition;
    int timestep = 0;
};

void validate_batch(const DenoiseBatch& batch);

inline constexpr double kTimestepScale = 1000.0;

/// Small stand-in for the U-Net: affine -> tanh -> affine over
/// [flatten(x_t * D_t), c, t / 1000].
struct ToyDenoiser {
    Tensor2D w1;  // in x hidden
    Tensor2D b1;  // 1 x hidden
    Tensor2D w2;  // hidden x out
    Tensor2D b2;  // 1 x out

    static ToyDenoiser zeros(std::size_t in, std::size_t hidden, std::size_t out);
    /// Entries uniform in [-scale, scale].
    static ToyDenoiser random(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed, double scale = 0.5);

    std::size_t parameter_count() const noexcept;
    /// w1, b1, w2, b2 concatenated row-major.
    std::vector<double> flatten() const;
    void assign(std::span<const double> params);
};

std::size_t denoiser_input_size(const DenoiseBatch& batch) noexcept;
Tensor2D denoiser_features(const DenoiseBatch& batch);
Tensor2D toy_denoise(const DenoiseBatch& batch, const ToyDenoiser& params);

/// mean(((eps - pred) * mask)^2)
double layer_loss(const Tensor2D& eps, const Tensor2D& pred, const Tensor2D& mask);
/// d layer_loss / d pred = -(2/N) mask * mask * (eps - pred)
Tensor2D layer_loss_grad(const Tensor2D& eps, const Tensor2D& pred, const Tensor2D& mask);

/// Empirical mean of layer_loss(toy_denoise(b)) over `batches`, summed in index order.
/// When `grad` is non-null it receives the analytic gradient w.r.t. the flattened parameters.
double batch_layer_loss(std::span<const DenoiseBatch> batches, const ToyDenoiser& params, std::vector<double>* grad);

/// Loss evaluated at a flat parameter vector; fills the analytic gradient when asked.
using LossFn = std::function<double(std::span<const double> params, std::vector<double>* grad)>;

/// max_i |analytic_i - numeric_i| / max(1, |numeric_i|) with central differences.
double gradient_check(const LossFn& loss, std::span<const double> params, double step);

struct DfCheckReport {
    double max_row_sum_error = 0.0;
    double single_key_error = 0.0;
    double loss_reduction_error = 0.0;
    double gradient_error = 0.0;
    bool passed = false;
};

/// Runs the attention/loss invariants and the gradient check on seeded random instances.
DfCheckReport run_dfcheck(std::uint64_t seed);

}  // namespace ap::df
