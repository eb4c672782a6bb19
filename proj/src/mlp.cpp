#include "lossbar/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lossbar/error.hpp"

namespace lossbar {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ValidationError("unknown activation '" + name + "'");
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
    n += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
  return n;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ValidationError("MLP needs at least input and output widths");
  for (std::size_t w : layer_widths)
    if (w == 0) throw ValidationError("MLP layer widths must be positive");
}

std::string MlpSpec::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < layer_widths.size(); ++i)
    s += (i ? "-" : "") + std::to_string(layer_widths[i]);
  return s + (activation == Activation::Relu ? "/relu" : "/tanh");
}

MlpField::MlpField(MlpSpec spec, std::shared_ptr<const Dataset> data,
                   std::vector<std::size_t> default_batch, Exec exec)
    : spec_(std::move(spec)), data_(std::move(data)), default_batch_(std::move(default_batch)),
      exec_(exec) {
  spec_.validate();
  if (!data_) throw ValidationError("MLP field needs a dataset");
  data_->validate();
  if (spec_.layer_widths.front() != data_->n_features)
    throw ValidationError("MLP input width " + std::to_string(spec_.layer_widths.front()) +
                          " does not match " + std::to_string(data_->n_features) + " features");
  if (spec_.layer_widths.back() != data_->n_classes)
    throw ValidationError("MLP output width " + std::to_string(spec_.layer_widths.back()) +
                          " does not match " + std::to_string(data_->n_classes) + " classes");
  for (std::size_t i : default_batch_)
    if (i >= data_->n_samples) throw ValidationError("batch index out of range");
  dim_ = 0;
  for (std::size_t l = 0; l + 1 < spec_.layer_widths.size(); ++l) {
    offsets_.push_back(dim_);
    dim_ += spec_.layer_widths[l] * spec_.layer_widths[l + 1] + spec_.layer_widths[l + 1];
  }
}

double MlpField::value(std::span<const double> x, Batch batch) const {
  return run(x, {}, batch);
}

void MlpField::gradient(std::span<const double> x, std::span<double> out, Batch batch) const {
  run(x, out, batch);
}

double MlpField::value_and_gradient(std::span<const double> x, std::span<double> out,
                                    Batch batch) const {
  return run(x, out, batch);
}

double MlpField::sample_loss(std::span<const double> x, std::size_t sample) const {
  const std::size_t idx[1] = {sample};
  return accumulate(x, {}, idx);
}

double MlpField::run(std::span<const double> x, std::span<double> grad, Batch batch) const {
  std::vector<std::size_t> all;
  std::span<const std::size_t> samples = batch;
  if (samples.empty()) samples = default_batch_;
  if (samples.empty()) {
    all.resize(data_->n_samples);
    std::iota(all.begin(), all.end(), std::size_t{0});
    samples = all;
  }
  const std::size_t n = samples.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const bool want_grad = !grad.empty();

  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<std::vector<double>> chunk_grad(want_grad ? chunks : 0);
  for_each_index(exec_, chunks, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    std::span<double> g;
    if (want_grad) {
      chunk_grad[c].assign(dim_, 0.0);
      g = chunk_grad[c];
    }
    chunk_loss[c] = accumulate(x, g, samples.subspan(lo, hi - lo));
  });

  double total = 0.0;
  for (double l : chunk_loss) total += l;
  const double inv = 1.0 / static_cast<double>(n);
  if (want_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& g : chunk_grad)
      for (std::size_t i = 0; i < dim_; ++i) grad[i] += g[i];
    for (double& g : grad) g *= inv;
  }
  return total * inv;
}

// Sum (not mean) of per-sample losses over `samples`; adds per-sample
// gradients into `grad` when it is non-empty.
double MlpField::accumulate(std::span<const double> x, std::span<double> grad,
                            std::span<const std::size_t> samples) const {
  const auto& widths = spec_.layer_widths;
  const std::size_t layers = widths.size() - 1;
  const bool relu = spec_.activation == Activation::Relu;

  // acts[l] is the input to layer l; pre[l] the pre-activation of layer l.
  std::vector<std::vector<double>> acts(layers + 1), pre(layers);
  for (std::size_t l = 0; l <= layers; ++l) acts[l].resize(widths[l]);
  for (std::size_t l = 0; l < layers; ++l) pre[l].resize(widths[l + 1]);
  std::vector<double> delta, prev_delta;

  double loss_sum = 0.0;
  for (std::size_t s : samples) {
    const auto in = data_->row(s);
    std::copy(in.begin(), in.end(), acts[0].begin());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t nin = widths[l], nout = widths[l + 1];
      const double* W = x.data() + offsets_[l];
      const double* b = W + nin * nout;
      for (std::size_t o = 0; o < nout; ++o) {
        double z = b[o];
        const double* row = W + o * nin;
        for (std::size_t i = 0; i < nin; ++i) z += row[i] * acts[l][i];
        pre[l][o] = z;
        if (l + 1 < layers)
          acts[l + 1][o] = relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
        else
          acts[l + 1][o] = z;
      }
    }
    const auto& logits = acts[layers];
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    const double lse = zmax + std::log(denom);
    const std::size_t y = data_->labels[s];
    loss_sum += lse - logits[y];

    if (grad.empty()) continue;
    delta.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k)
      delta[k] = std::exp(logits[k] - lse) - (k == y ? 1.0 : 0.0);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t nin = widths[l], nout = widths[l + 1];
      const double* W = x.data() + offsets_[l];
      double* gW = grad.data() + offsets_[l];
      double* gb = gW + nin * nout;
      for (std::size_t o = 0; o < nout; ++o) {
        const double d = delta[o];
        double* grow = gW + o * nin;
        for (std::size_t i = 0; i < nin; ++i) grow[i] += d * acts[l][i];
        gb[o] += d;
      }
      if (l == 0) break;
      prev_delta.assign(nin, 0.0);
      for (std::size_t o = 0; o < nout; ++o) {
        const double* row = W + o * nin;
        for (std::size_t i = 0; i < nin; ++i) prev_delta[i] += row[i] * delta[o];
      }
      for (std::size_t i = 0; i < nin; ++i) {
        const double z = pre[l - 1][i];
        if (relu) {
          prev_delta[i] = z > 0.0 ? prev_delta[i] : 0.0;
        } else {
          const double t = acts[l][i];
          prev_delta[i] *= 1.0 - t * t;
        }
      }
      delta.swap(prev_delta);
    }
  }
  return loss_sum;
}

FieldPtr make_mlp_field(const MlpSpec& spec, std::shared_ptr<const Dataset> data,
                        std::optional<std::vector<std::size_t>> batch, Exec exec) {
  return std::make_shared<MlpField>(spec, std::move(data), batch.value_or(std::vector<std::size_t>{}),
                                    exec);
}

}  // namespace lossbar
