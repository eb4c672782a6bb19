#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lossbar/dataset.hpp"
#include "lossbar/exec.hpp"
#include "lossbar/landscape.hpp"

namespace lossbar {

enum class Activation { Relu, Tanh };

Activation parse_activation(const std::string& name);

struct MlpSpec {
  std::vector<std::size_t> layer_widths;  // input, hidden..., output
  Activation activation = Activation::Relu;

  std::size_t parameter_count() const;
  void validate() const;
  std::string to_string() const;  // "2-8-8-2/relu"
};

// Mean softmax cross-entropy of a fully connected network over a dataset.
//
// Parameters are flattened layer by layer: the weight matrix of layer l
// (shape out x in, row-major) followed by its bias vector. Hidden layers use
// the MlpSpec activation, the output layer is linear into the softmax. ReLU
// uses 0 as its derivative at 0.
//
// Samples are processed in fixed chunks whose partial sums are added in chunk
// order, so the result is bit-identical for every worker count.
class MlpField final : public ScalarField {
 public:
  static constexpr std::size_t kChunk = 32;

  MlpField(MlpSpec spec, std::shared_ptr<const Dataset> data,
           std::vector<std::size_t> default_batch = {}, Exec exec = Exec::serial());

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "mlp:" + spec_.to_string(); }
  std::size_t sample_count() const override { return data_->n_samples; }

  double value(std::span<const double> x, Batch batch = {}) const override;
  void gradient(std::span<const double> x, std::span<double> out, Batch batch = {}) const override;
  double value_and_gradient(std::span<const double> x, std::span<double> out,
                            Batch batch = {}) const override;

  // Cross-entropy of a single sample (used to check the mean property).
  double sample_loss(std::span<const double> x, std::size_t sample) const;

  const MlpSpec& spec() const { return spec_; }
  const Dataset& data() const { return *data_; }

 private:
  double run(std::span<const double> x, std::span<double> grad, Batch batch) const;
  double accumulate(std::span<const double> x, std::span<double> grad,
                    std::span<const std::size_t> samples) const;

  MlpSpec spec_;
  std::shared_ptr<const Dataset> data_;
  std::vector<std::size_t> default_batch_;
  Exec exec_;
  std::size_t dim_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
};

FieldPtr make_mlp_field(const MlpSpec& spec, std::shared_ptr<const Dataset> data,
                        std::optional<std::vector<std::size_t>> batch = std::nullopt,
                        Exec exec = Exec::serial());

}  // namespace lossbar
