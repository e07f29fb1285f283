#include "cts/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cts/error.hpp"
#include "cts/random.hpp"

namespace cts::drift {

std::string_view to_string(AutoencoderVariant variant) {
  return variant == AutoencoderVariant::kPlain ? "plain" : "attention";
}

namespace {

void append(std::vector<double>& out, const auto& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

std::size_t take(std::span<const double> flat, std::size_t at, auto& m) {
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), m.size(), m.data());
  return at + static_cast<std::size_t>(m.size());
}

Matrix xavier(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

// Four interleaved partial sums break the add dependency chain; the order
// is fixed, so results do not depend on the target's vector width.
double dot(const double* a, const double* b, Eigen::Index n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  Eigen::Index t = 0;
  for (; t + 4 <= n; t += 4) {
    s0 += a[t] * b[t];
    s1 += a[t + 1] * b[t + 1];
    s2 += a[t + 2] * b[t + 2];
    s3 += a[t + 3] * b[t + 3];
  }
  for (; t < n; ++t) s0 += a[t] * b[t];
  return (s0 + s1) + (s2 + s3);
}

// dq += ds k; dk += ds q; dv += w dm over one token row.
void accumulate_pair(double* __restrict dq, double* __restrict dk, double* __restrict dv,
                     const double* k, const double* q, const double* dm, double ds, double w,
                     Eigen::Index n) {
  for (Eigen::Index t = 0; t < n; ++t) {
    dq[t] += ds * k[t];
    dk[t] += ds * q[t];
    dv[t] += w * dm[t];
  }
}

// Forward intermediates kept for backpropagation.
struct Forward {
  Matrix tokens;      // (n*L) x chunk, padded input split into tokens
  Matrix q, k, v;     // (n*L) x chunk
  Matrix weights;     // (n*L) x L attention probabilities, one block per sample
  Matrix encoder_in;  // n x encoder width
  Matrix hidden;      // n x bottleneck
  Matrix output;      // n x input dim
};

Forward forward(const AutoencoderModel& model, const Matrix& x) {
  const auto& p = model.params;
  const auto n = x.rows();
  Forward f;
  if (model.config.variant == AutoencoderVariant::kAttention) {
    const auto L = static_cast<Eigen::Index>(model.tokens());
    const auto c = static_cast<Eigen::Index>(model.config.chunk);
    Matrix padded = Matrix::Zero(n, L * c);
    padded.leftCols(x.cols()) = x;
    f.tokens = Eigen::Map<const Matrix>(padded.data(), n * L, c);
    f.q = f.tokens * p.wq;
    f.k = f.tokens * p.wk;
    f.v = f.tokens * p.wv;
    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    f.weights.resize(n * L, L);
    Matrix mixed = Matrix::Zero(n * L, c);
    // Per-sample blocks are tiny (L x c), so plain loops beat dense kernels.
    const double* q = f.q.data();
    const double* k = f.k.data();
    const double* v = f.v.data();
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::Index base = s * L;
      for (Eigen::Index i = 0; i < L; ++i) {
        const double* qi = q + (base + i) * c;
        double* wi = f.weights.data() + (base + i) * L;
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < L; ++j) {
          const double* kj = k + (base + j) * c;
          wi[j] = dot(qi, kj, c) * scale;
          top = std::max(top, wi[j]);
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j < L; ++j) {
          wi[j] = std::exp(wi[j] - top);
          total += wi[j];
        }
        double* mi = mixed.data() + (base + i) * c;
        for (Eigen::Index j = 0; j < L; ++j) {
          wi[j] /= total;
          const double* vj = v + (base + j) * c;
          for (Eigen::Index t = 0; t < c; ++t) mi[t] += wi[j] * vj[t];
        }
      }
    }
    mixed += f.tokens;  // residual
    f.encoder_in = Eigen::Map<const Matrix>(mixed.data(), n, L * c);
  } else {
    f.encoder_in = x;
  }
  f.hidden = ((f.encoder_in * p.w_enc.transpose()).rowwise() + p.b_enc.transpose()).array().tanh().matrix();
  f.output = (f.hidden * p.w_dec.transpose()).rowwise() + p.b_dec.transpose();
  return f;
}

double variance_term(const Matrix& out) {
  const auto n = static_cast<double>(out.rows());
  const Eigen::RowVectorXd mean = out.colwise().mean();
  return (out.rowwise() - mean).squaredNorm() / (n * static_cast<double>(out.cols()));
}

}  // namespace

std::vector<double> AutoencoderParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  append(flat, wq);
  append(flat, wk);
  append(flat, wv);
  append(flat, w_enc);
  append(flat, b_enc);
  append(flat, w_dec);
  append(flat, b_dec);
  return flat;
}

void AutoencoderParams::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw std::invalid_argument("parameter vector has the wrong length");
  std::size_t at = 0;
  at = take(flat, at, wq);
  at = take(flat, at, wk);
  at = take(flat, at, wv);
  at = take(flat, at, w_enc);
  at = take(flat, at, b_enc);
  at = take(flat, at, w_dec);
  take(flat, at, b_dec);
}

std::size_t AutoencoderParams::size() const {
  return static_cast<std::size_t>(wq.size() + wk.size() + wv.size() + w_enc.size() + b_enc.size() +
                                  w_dec.size() + b_dec.size());
}

std::size_t AutoencoderModel::tokens() const {
  return (input_dim + config.chunk - 1) / config.chunk;
}

std::size_t AutoencoderModel::encoder_width() const {
  return config.variant == AutoencoderVariant::kAttention ? tokens() * config.chunk : input_dim;
}

Matrix AutoencoderModel::reconstruct(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim) {
    throw std::invalid_argument("autoencoder input has the wrong width");
  }
  return forward(*this, x).output;
}

Vector AutoencoderModel::sample_errors(const Matrix& x) const {
  return (x - reconstruct(x)).rowwise().squaredNorm();
}

double AutoencoderModel::mean_error(const Matrix& x) const {
  if (x.rows() == 0) throw std::invalid_argument("reconstruction error of an empty batch");
  return sample_errors(x).mean();
}

double AutoencoderModel::objective(const Matrix& x) const {
  if (x.rows() == 0) throw std::invalid_argument("objective of an empty batch");
  const Matrix out = reconstruct(x);
  const double mse = (x - out).rowwise().squaredNorm().mean();
  return config.eta == 0.0 ? mse : mse + config.eta * variance_term(out);
}

AutoencoderModel init_autoencoder(std::size_t input_dim, const AutoencoderConfig& config,
                                  std::uint64_t seed) {
  if (input_dim == 0 || config.bottleneck_dim == 0) {
    throw std::invalid_argument("autoencoder dimensions must be positive");
  }
  if (config.bottleneck_dim >= input_dim) {
    throw std::invalid_argument("bottleneck_dim must be smaller than the input dimension");
  }
  if (config.variant == AutoencoderVariant::kAttention && config.chunk == 0) {
    throw std::invalid_argument("attention chunk width must be positive");
  }
  AutoencoderModel m;
  m.config = config;
  m.input_dim = input_dim;
  Rng rng(seed);
  const auto b = static_cast<Eigen::Index>(config.bottleneck_dim);
  const auto d = static_cast<Eigen::Index>(input_dim);
  if (config.variant == AutoencoderVariant::kAttention) {
    const auto c = static_cast<Eigen::Index>(config.chunk);
    m.params.wq = xavier(c, c, rng);
    m.params.wk = xavier(c, c, rng);
    m.params.wv = xavier(c, c, rng);
  }
  m.params.w_enc = xavier(b, static_cast<Eigen::Index>(m.encoder_width()), rng);
  m.params.b_enc = Vector::Zero(b);
  m.params.w_dec = xavier(d, b, rng);
  m.params.b_dec = Vector::Zero(d);
  return m;
}

LossAndGradient loss_and_gradient(const AutoencoderModel& model, const Matrix& corrupted,
                                  const Matrix& clean) {
  const auto& p = model.params;
  const Forward f = forward(model, corrupted);
  const auto n = static_cast<double>(clean.rows());
  const auto d = static_cast<double>(clean.cols());

  const Matrix residual = f.output - clean;
  LossAndGradient out;
  out.loss = residual.rowwise().squaredNorm().mean();
  Matrix d_output = residual * (2.0 / n);
  if (model.config.eta != 0.0) {
    const Eigen::RowVectorXd mean = f.output.colwise().mean();
    const Matrix centred = f.output.rowwise() - mean;
    out.loss += model.config.eta * centred.squaredNorm() / (n * d);
    d_output += centred * (2.0 * model.config.eta / (n * d));
  }

  auto& g = out.gradient;
  g.w_dec.noalias() = d_output.transpose() * f.hidden;
  g.b_dec = d_output.colwise().sum().transpose();
  const Matrix d_pre =
      ((d_output * p.w_dec).array() * (1.0 - f.hidden.array().square())).matrix();
  g.w_enc.noalias() = d_pre.transpose() * f.encoder_in;
  g.b_enc = d_pre.colwise().sum().transpose();

  if (model.config.variant == AutoencoderVariant::kAttention) {
    const auto L = static_cast<Eigen::Index>(model.tokens());
    const auto c = static_cast<Eigen::Index>(model.config.chunk);
    const auto rows = clean.rows();
    const Matrix d_encoder_in = d_pre * p.w_enc;
    // The residual path feeds only the input, so the mixed tokens carry the
    // full upstream gradient into the attention block.
    const Eigen::Map<const Matrix> d_mixed(d_encoder_in.data(), rows * L, c);
    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    Matrix dq = Matrix::Zero(rows * L, c);
    Matrix dk = Matrix::Zero(rows * L, c);
    Matrix dv = Matrix::Zero(rows * L, c);
    std::vector<double> dw(static_cast<std::size_t>(L));
    for (Eigen::Index s = 0; s < rows; ++s) {
      const Eigen::Index base = s * L;
      for (Eigen::Index i = 0; i < L; ++i) {
        const double* dmi = d_mixed.data() + (base + i) * c;
        const double* wi = f.weights.data() + (base + i) * L;
        const double* qi = f.q.data() + (base + i) * c;
        double* dqi = dq.data() + (base + i) * c;
        // Softmax backward: ds_ij = w_ij (dw_ij - sum_k w_ik dw_ik).
        double weighted = 0.0;
        for (Eigen::Index j = 0; j < L; ++j) {
          const double* vj = f.v.data() + (base + j) * c;
          dw[j] = dot(dmi, vj, c);
          weighted += dw[j] * wi[j];
        }
        for (Eigen::Index j = 0; j < L; ++j) {
          const double ds = wi[j] * (dw[j] - weighted) * scale;
          const double wij = wi[j];
          accumulate_pair(dqi, dk.data() + (base + j) * c, dv.data() + (base + j) * c,
                          f.k.data() + (base + j) * c, qi, dmi, ds, wij, c);
        }
      }
    }
    g.wq.noalias() = f.tokens.transpose() * dq;
    g.wk.noalias() = f.tokens.transpose() * dk;
    g.wv.noalias() = f.tokens.transpose() * dv;
  }
  return out;
}

AutoencoderModel train_autoencoder(const Matrix& clean, const AutoencoderConfig& config,
                                   std::uint64_t seed) {
  if (clean.rows() == 0) throw std::invalid_argument("autoencoder training needs rows");
  if (config.batch_size == 0 || config.epochs == 0 || !(config.step_size > 0.0)) {
    throw std::invalid_argument("invalid autoencoder training schedule");
  }
  if (!(config.dropout >= 0.0 && config.dropout < 1.0) || !(config.noise_sigma >= 0.0)) {
    throw std::invalid_argument("invalid autoencoder noise configuration");
  }
  AutoencoderModel model =
      init_autoencoder(static_cast<std::size_t>(clean.cols()), config, derive_seed(seed, "init"));
  Rng rng(derive_seed(seed, "train"));
  std::vector<double> flat = model.params.flatten();

  const auto n = static_cast<std::size_t>(clean.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double keep_scale = 1.0 / (1.0 - config.dropout);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const Matrix target = select_rows(clean, std::span(order).subspan(start, end - start));
      Matrix input = target;
      for (Eigen::Index i = 0; i < input.size(); ++i) {
        // A dropped entry is zero whatever its noise, so it draws none.
        double& v = input.data()[i];
        if (config.dropout > 0.0 && rng.bernoulli(config.dropout)) {
          v = 0.0;
          continue;
        }
        if (config.noise_sigma > 0.0) v += config.noise_sigma * rng.normal();
        v *= keep_scale;
      }
      const auto step = loss_and_gradient(model, input, target);
      if (!std::isfinite(step.loss)) {
        std::ostringstream msg;
        msg << to_string(config.variant) << " autoencoder diverged at epoch " << epoch + 1
            << ", step " << steps + 1 << " (last epoch loss "
            << (model.epoch_loss.empty() ? NAN : model.epoch_loss.back())
            << "); lower the step size";
        throw NumericError(msg.str());
      }
      const auto grad = step.gradient.flatten();
      for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= config.step_size * grad[i];
      model.params.assign(flat);
      epoch_total += step.loss;
      ++steps;
    }
    model.epoch_loss.push_back(epoch_total / static_cast<double>(steps));
  }
  return model;
}

double reconstruction_drift(const AutoencoderModel& model, const Matrix& batch,
                            double train_reference_error) {
  if (batch.rows() == 0) throw std::invalid_argument("reconstruction drift of an empty batch");
  return model.mean_error(batch) - train_reference_error;
}

}  // namespace cts::drift
