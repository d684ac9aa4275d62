#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbx/image.hpp"

namespace vbx {

// One conv block: 3x3 kernels, stride 1, zero padding 1, followed by ReLU
// and a 2x2 stride-2 max pool.
struct ConvBlock {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights; // [out][in][3][3], row-major
    std::vector<double> bias;    // [out]
};

// Fixed three-block CNN over single-channel input. The penultimate
// representation is the global average pool of the last block's output
// (dimension = widths.back()); a dense head maps it to class logits.
struct MicroCnn {
    int in_channels = 1;
    int n_classes = 4;
    std::vector<int> widths = {8, 16, 32};
    std::vector<ConvBlock> blocks;
    std::vector<double> head_weights; // [n_classes][embedding_dim]
    std::vector<double> head_bias;    // [n_classes]

    int embedding_dim() const { return widths.back(); }
    std::size_t parameter_count() const;

    // Tensors in persistence order: block0 weights, block0 bias, block1
    // weights, ..., head weights, head bias.
    std::vector<std::vector<double>*> parameter_tensors();
    std::vector<const std::vector<double>*> parameter_tensors() const;
};

// Gradient / optimizer-moment container shaped like the model parameters.
struct ParamTensors {
    std::vector<std::vector<double>> tensors;

    static ParamTensors zeros_like(const MicroCnn& model);
};

// Kaiming-uniform init (bound sqrt(6 / fan_in)), biases zero. Weights are
// drawn from Rng(derive_seed(seed, "init")) in persistence order.
MicroCnn make_microcnn(const std::vector<int>& widths, int in_channels, int n_classes,
                       std::uint64_t seed);

// Everything cached by a forward pass: per-block conv pre-activations, pooled
// outputs with argmax routing, the embedding and the logits. The last
// pooled output holds the feature maps used by grad_cam.
struct ForwardTrace {
    int input_height = 0;
    int input_width = 0;
    // Per block: spatial size of the conv input and output buffers.
    std::vector<int> conv_h, conv_w;
    std::vector<std::vector<double>> conv_pre;   // [block], out_ch * conv_h * conv_w
    std::vector<std::vector<double>> pool_out;   // [block], out_ch * conv_h/2 * conv_w/2
    std::vector<std::vector<int>> pool_argmax;   // flat index into the block's conv plane
    std::vector<double> embedding;               // [embedding_dim]
    std::vector<double> logits;                  // [n_classes]
};

// Input height and width must be divisible by 8 (three 2x2 pools).
ForwardTrace forward(const MicroCnn& model, const NormalizedImage& image);

// Mean cross-entropy over the batch plus gradients for every parameter
// tensor. Max-pool routing sends each cell's gradient to the first maximum in
// raster order; ReLU passes gradient only where the pre-activation is
// strictly positive.
double loss_and_backward(const MicroCnn& model,
                         const std::vector<const NormalizedImage*>& images,
                         const std::vector<int>& labels, ParamTensors& grads);

struct TrainConfig {
    double learning_rate = 1e-4;
    int epochs = 3;
    int batch_size = 16;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct AdamState {
    ParamTensors m;
    ParamTensors v;
    std::int64_t step = 0;

    static AdamState init(const MicroCnn& model);
};

// Standard bias-corrected Adam update, applied in place.
void adam_step(MicroCnn& model, const ParamTensors& grads, AdamState& state,
               const TrainConfig& config);

struct TrainLog {
    std::vector<double> epoch_loss;
    std::vector<std::optional<double>> val_accuracy; // absent when no validation set
};

// Seeded-shuffled batches of config.batch_size per epoch (shuffle stream:
// derive_seed(config.seed, "cnn-shuffle", epoch)); the trailing partial batch
// is kept. Deterministic given the seed.
TrainLog train(MicroCnn& model, const std::vector<std::pair<NormalizedImage, int>>& train_set,
               const std::vector<std::pair<NormalizedImage, int>>& val_set,
               const TrainConfig& config);

// Global average pool of the last block's feature maps.
std::vector<double> extract_embedding(const MicroCnn& model, const NormalizedImage& image);

struct GradCamMap {
    int raw_height = 0;
    int raw_width = 0;
    std::vector<double> raw; // ReLU-rectified weighted sum, nonnegative
    int height = 0;
    int width = 0;
    std::vector<double> upsampled; // bilinear to input size, min-max to [0,1]
};

// Channel weights are the spatially pooled gradients of the pre-softmax logit
// for target_class with respect to the last feature maps.
GradCamMap grad_cam(const MicroCnn& model, const NormalizedImage& image, int target_class);

// Little-endian binary format: magic, version, architecture descriptor, then
// all parameters as 64-bit floats in persistence order. Round-trips bitwise.
void save_model(const MicroCnn& model, const std::string& path);
MicroCnn load_model(const std::string& path);

} // namespace vbx
