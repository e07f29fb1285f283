#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cts/matrix.hpp"

namespace cts::drift {

enum class AutoencoderVariant { kPlain, kAttention };

std::string_view to_string(AutoencoderVariant variant);

struct AutoencoderConfig {
  AutoencoderVariant variant = AutoencoderVariant::kPlain;
  std::size_t bottleneck_dim = 32;
  double noise_sigma = 0.05;  // Gaussian corruption of training inputs
  double dropout = 0.1;       // input masking rate during training
  std::size_t epochs = 200;
  double step_size = 1e-2;
  std::size_t batch_size = 32;
  /// Weight of the reconstruction-variance penalty. 0 gives plain squared error.
  double eta = 0.0;
  /// Token width when the attention variant splits the input into a sequence.
  std::size_t chunk = 16;
};

/// Trainable weights. Sample rows multiply from the left:
/// hidden = tanh(z W_enc^T + b_enc), output = hidden W_dec^T + b_dec, where z
/// is the input (plain) or the input plus self-attention over its chunks.
struct AutoencoderParams {
  Matrix wq, wk, wv;  // chunk x chunk; empty for the plain variant
  Matrix w_enc;       // bottleneck x encoder width
  Vector b_enc;
  Matrix w_dec;       // input dim x bottleneck
  Vector b_dec;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  std::size_t size() const;
};

struct AutoencoderModel {
  AutoencoderConfig config;
  std::size_t input_dim = 0;
  AutoencoderParams params;
  std::vector<double> epoch_loss;

  std::size_t tokens() const;
  std::size_t encoder_width() const;

  /// Noise-free reconstruction of each row.
  Matrix reconstruct(const Matrix& x) const;
  /// Per-row squared reconstruction error ||x - x_hat||^2.
  Vector sample_errors(const Matrix& x) const;
  double mean_error(const Matrix& x) const;
  /// Mean squared error plus eta * Var(x_hat), where Var is the mean over
  /// features of the across-row (population) variance of reconstructions.
  double objective(const Matrix& x) const;
};

/// Fresh model with Xavier-uniform weights and zero biases. Throws
/// std::invalid_argument when bottleneck_dim >= input_dim or a size is zero.
AutoencoderModel init_autoencoder(std::size_t input_dim, const AutoencoderConfig& config,
                                  std::uint64_t seed);

struct LossAndGradient {
  double loss = 0.0;
  AutoencoderParams gradient;
};

/// Objective of reconstructing `clean` from `corrupted` (same shape) and its
/// exact gradient with respect to every parameter.
LossAndGradient loss_and_gradient(const AutoencoderModel& model, const Matrix& corrupted,
                                  const Matrix& clean);

/// Minibatch gradient descent on the denoising objective. Inputs are
/// corrupted by Gaussian noise then inverted dropout; targets stay clean.
/// Throws NumericError when the loss becomes non-finite.
AutoencoderModel train_autoencoder(const Matrix& clean, const AutoencoderConfig& config,
                                   std::uint64_t seed);

/// Mean batch reconstruction error minus the reference error (may be negative).
double reconstruction_drift(const AutoencoderModel& model, const Matrix& batch,
                            double train_reference_error);

}  // namespace cts::drift
