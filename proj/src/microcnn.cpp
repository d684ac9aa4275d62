#include "vbx/microcnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "vbx/error.hpp"
#include "vbx/io_util.hpp"
#include "vbx/metrics.hpp"
#include "vbx/rng.hpp"

namespace vbx {

std::size_t MicroCnn::parameter_count() const {
    std::size_t count = 0;
    for (const auto* t : parameter_tensors()) count += t->size();
    return count;
}

std::vector<std::vector<double>*> MicroCnn::parameter_tensors() {
    std::vector<std::vector<double>*> out;
    for (ConvBlock& block : blocks) {
        out.push_back(&block.weights);
        out.push_back(&block.bias);
    }
    out.push_back(&head_weights);
    out.push_back(&head_bias);
    return out;
}

std::vector<const std::vector<double>*> MicroCnn::parameter_tensors() const {
    std::vector<const std::vector<double>*> out;
    for (const ConvBlock& block : blocks) {
        out.push_back(&block.weights);
        out.push_back(&block.bias);
    }
    out.push_back(&head_weights);
    out.push_back(&head_bias);
    return out;
}

ParamTensors ParamTensors::zeros_like(const MicroCnn& model) {
    ParamTensors grads;
    for (const auto* t : model.parameter_tensors()) {
        grads.tensors.emplace_back(t->size(), 0.0);
    }
    return grads;
}

MicroCnn make_microcnn(const std::vector<int>& widths, int in_channels, int n_classes,
                       std::uint64_t seed) {
    if (widths.empty()) throw ConfigError("make_microcnn: need at least one block width");
    MicroCnn model;
    model.in_channels = in_channels;
    model.n_classes = n_classes;
    model.widths = widths;

    Rng rng(derive_seed(seed, "init"));
    auto uniform = [&rng](double bound) { return (2.0 * rng.next_double() - 1.0) * bound; };

    int prev = in_channels;
    for (const int width : widths) {
        ConvBlock block;
        block.in_channels = prev;
        block.out_channels = width;
        const int fan_in = prev * 9;
        const double bound = std::sqrt(6.0 / fan_in);
        block.weights.resize(static_cast<std::size_t>(width) * prev * 9);
        for (double& w : block.weights) w = uniform(bound);
        block.bias.assign(static_cast<std::size_t>(width), 0.0);
        model.blocks.push_back(std::move(block));
        prev = width;
    }

    const double head_bound = std::sqrt(6.0 / prev);
    model.head_weights.resize(static_cast<std::size_t>(n_classes) * prev);
    for (double& w : model.head_weights) w = uniform(head_bound);
    model.head_bias.assign(static_cast<std::size_t>(n_classes), 0.0);
    return model;
}

namespace {

void conv3x3_forward(const std::vector<double>& input, int in_ch, int h, int w,
                     const ConvBlock& block, std::vector<double>& output) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    output.assign(static_cast<std::size_t>(block.out_channels) * plane, 0.0);
    for (int oc = 0; oc < block.out_channels; ++oc) {
        double* out_plane = output.data() + static_cast<std::size_t>(oc) * plane;
        const double bias = block.bias[static_cast<std::size_t>(oc)];
        for (std::size_t i = 0; i < plane; ++i) out_plane[i] = bias;
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* in_plane = input.data() + static_cast<std::size_t>(ic) * plane;
            const double* kernel =
                block.weights.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            for (int y = 0; y < h; ++y) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    const double* in_row = in_plane + static_cast<std::size_t>(sy) * w;
                    double* out_row = out_plane + static_cast<std::size_t>(y) * w;
                    for (int kx = 0; kx < 3; ++kx) {
                        const double kv = kernel[ky * 3 + kx];
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(w, w + 1 - kx);
                        for (int x = x_lo; x < x_hi; ++x) {
                            out_row[x] += kv * in_row[x + kx - 1];
                        }
                    }
                }
            }
        }
    }
}

// Pool over ReLU(conv_pre); records the flat index of the chosen input cell.
void relu_maxpool_forward(const std::vector<double>& conv_pre, int channels, int h, int w,
                          std::vector<double>& pooled, std::vector<int>& argmax) {
    const int ph = h / 2, pw = w / 2;
    const std::size_t in_plane = static_cast<std::size_t>(h) * w;
    const std::size_t out_plane = static_cast<std::size_t>(ph) * pw;
    pooled.assign(static_cast<std::size_t>(channels) * out_plane, 0.0);
    argmax.assign(static_cast<std::size_t>(channels) * out_plane, 0);
    for (int c = 0; c < channels; ++c) {
        for (int py = 0; py < ph; ++py) {
            for (int px = 0; px < pw; ++px) {
                double best = -1.0;
                int best_idx = -1;
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const int y = 2 * py + dy, x = 2 * px + dx;
                        const std::size_t idx = c * in_plane + static_cast<std::size_t>(y) * w + x;
                        const double v = std::max(0.0, conv_pre[idx]);
                        if (best_idx < 0 || v > best) {
                            best = v;
                            best_idx = static_cast<int>(idx);
                        }
                    }
                }
                const std::size_t out_idx = c * out_plane + static_cast<std::size_t>(py) * pw + px;
                pooled[out_idx] = best;
                argmax[out_idx] = best_idx;
            }
        }
    }
}

} // namespace

ForwardTrace forward(const MicroCnn& model, const NormalizedImage& image) {
    if (image.height % 8 != 0 || image.width % 8 != 0 || image.height < 8 || image.width < 8) {
        throw ShapeError("forward: input dimensions must be positive multiples of 8");
    }

    ForwardTrace trace;
    trace.input_height = image.height;
    trace.input_width = image.width;

    const std::vector<double>* input = &image.pixels;
    int h = image.height, w = image.width;
    int in_ch = model.in_channels;
    for (const ConvBlock& block : model.blocks) {
        trace.conv_h.push_back(h);
        trace.conv_w.push_back(w);
        std::vector<double> pre, pooled;
        std::vector<int> argmax;
        conv3x3_forward(*input, in_ch, h, w, block, pre);
        relu_maxpool_forward(pre, block.out_channels, h, w, pooled, argmax);
        trace.conv_pre.push_back(std::move(pre));
        trace.pool_out.push_back(std::move(pooled));
        trace.pool_argmax.push_back(std::move(argmax));
        input = &trace.pool_out.back();
        h /= 2;
        w /= 2;
        in_ch = block.out_channels;
    }

    const int emb_dim = model.embedding_dim();
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    trace.embedding.assign(static_cast<std::size_t>(emb_dim), 0.0);
    const std::vector<double>& last = trace.pool_out.back();
    for (int k = 0; k < emb_dim; ++k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += last[k * plane + i];
        trace.embedding[static_cast<std::size_t>(k)] = sum / static_cast<double>(plane);
    }

    trace.logits.assign(static_cast<std::size_t>(model.n_classes), 0.0);
    for (int c = 0; c < model.n_classes; ++c) {
        double z = model.head_bias[static_cast<std::size_t>(c)];
        for (int k = 0; k < emb_dim; ++k) {
            z += model.head_weights[static_cast<std::size_t>(c) * emb_dim + k] *
                 trace.embedding[static_cast<std::size_t>(k)];
        }
        trace.logits[static_cast<std::size_t>(c)] = z;
    }
    return trace;
}

namespace {

void conv3x3_backward(const std::vector<double>& input, int in_ch, int h, int w,
                      const ConvBlock& block, const std::vector<double>& d_out,
                      std::vector<double>& d_weights, std::vector<double>& d_bias,
                      std::vector<double>* d_input) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    if (d_input) d_input->assign(static_cast<std::size_t>(in_ch) * plane, 0.0);

    for (int oc = 0; oc < block.out_channels; ++oc) {
        const double* dout_plane = d_out.data() + static_cast<std::size_t>(oc) * plane;
        double db = 0.0;
        for (std::size_t i = 0; i < plane; ++i) db += dout_plane[i];
        d_bias[static_cast<std::size_t>(oc)] += db;

        for (int ic = 0; ic < in_ch; ++ic) {
            const double* in_plane = input.data() + static_cast<std::size_t>(ic) * plane;
            double* dw = d_weights.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            const double* kernel =
                block.weights.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            double* din_plane = d_input ? d_input->data() + static_cast<std::size_t>(ic) * plane
                                        : nullptr;
            for (int y = 0; y < h; ++y) {
                const double* dout_row = dout_plane + static_cast<std::size_t>(y) * w;
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    const double* in_row = in_plane + static_cast<std::size_t>(sy) * w;
                    double* din_row =
                        din_plane ? din_plane + static_cast<std::size_t>(sy) * w : nullptr;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(w, w + 1 - kx);
                        double acc = 0.0;
                        for (int x = x_lo; x < x_hi; ++x) {
                            acc += dout_row[x] * in_row[x + kx - 1];
                        }
                        dw[ky * 3 + kx] += acc;
                        if (din_row) {
                            const double kv = kernel[ky * 3 + kx];
                            for (int x = x_lo; x < x_hi; ++x) {
                                din_row[x + kx - 1] += kv * dout_row[x];
                            }
                        }
                    }
                }
            }
        }
    }
}

} // namespace

double loss_and_backward(const MicroCnn& model,
                         const std::vector<const NormalizedImage*>& images,
                         const std::vector<int>& labels, ParamTensors& grads) {
    if (images.empty() || images.size() != labels.size()) {
        throw ShapeError("loss_and_backward: empty or mismatched batch");
    }
    grads = ParamTensors::zeros_like(model);
    const int n_blocks = static_cast<int>(model.blocks.size());
    const int emb_dim = model.embedding_dim();
    const double batch = static_cast<double>(images.size());

    double loss_sum = 0.0;
    for (std::size_t s = 0; s < images.size(); ++s) {
        const ForwardTrace trace = forward(model, *images[s]);
        const std::vector<double> probs = softmax(trace.logits);
        const int label = labels[s];
        if (label < 0 || label >= model.n_classes) {
            throw RangeError("loss_and_backward: label out of range");
        }
        loss_sum += -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));

        // dL/dlogit for the batch mean.
        std::vector<double> d_logits(probs);
        d_logits[static_cast<std::size_t>(label)] -= 1.0;
        for (double& v : d_logits) v /= batch;

        // Head.
        std::vector<double>& d_head_w = grads.tensors[static_cast<std::size_t>(2 * n_blocks)];
        std::vector<double>& d_head_b = grads.tensors[static_cast<std::size_t>(2 * n_blocks + 1)];
        std::vector<double> d_emb(static_cast<std::size_t>(emb_dim), 0.0);
        for (int c = 0; c < model.n_classes; ++c) {
            const double dc = d_logits[static_cast<std::size_t>(c)];
            d_head_b[static_cast<std::size_t>(c)] += dc;
            for (int k = 0; k < emb_dim; ++k) {
                d_head_w[static_cast<std::size_t>(c) * emb_dim + k] +=
                    dc * trace.embedding[static_cast<std::size_t>(k)];
                d_emb[static_cast<std::size_t>(k)] +=
                    dc * model.head_weights[static_cast<std::size_t>(c) * emb_dim + k];
            }
        }

        // Global average pool.
        const int last_h = trace.conv_h.back() / 2;
        const int last_w = trace.conv_w.back() / 2;
        const std::size_t last_plane = static_cast<std::size_t>(last_h) * last_w;
        std::vector<double> d_pool(static_cast<std::size_t>(emb_dim) * last_plane);
        for (int k = 0; k < emb_dim; ++k) {
            const double g = d_emb[static_cast<std::size_t>(k)] / static_cast<double>(last_plane);
            for (std::size_t i = 0; i < last_plane; ++i) d_pool[k * last_plane + i] = g;
        }

        // Blocks, reversed.
        for (int b = n_blocks - 1; b >= 0; --b) {
            const ConvBlock& block = model.blocks[static_cast<std::size_t>(b)];
            const int h = trace.conv_h[static_cast<std::size_t>(b)];
            const int w = trace.conv_w[static_cast<std::size_t>(b)];
            const std::vector<double>& pre = trace.conv_pre[static_cast<std::size_t>(b)];
            const std::vector<int>& argmax = trace.pool_argmax[static_cast<std::size_t>(b)];

            // Un-pool (route to argmax) and apply the ReLU mask.
            std::vector<double> d_pre(pre.size(), 0.0);
            for (std::size_t i = 0; i < argmax.size(); ++i) {
                const int src = argmax[i];
                if (pre[static_cast<std::size_t>(src)] > 0.0) {
                    d_pre[static_cast<std::size_t>(src)] += d_pool[i];
                }
            }

            const std::vector<double>& block_input =
                b == 0 ? images[s]->pixels : trace.pool_out[static_cast<std::size_t>(b - 1)];
            std::vector<double> d_input;
            conv3x3_backward(block_input, block.in_channels, h, w, block, d_pre,
                             grads.tensors[static_cast<std::size_t>(2 * b)],
                             grads.tensors[static_cast<std::size_t>(2 * b + 1)],
                             b > 0 ? &d_input : nullptr);
            d_pool = std::move(d_input);
        }
    }
    return loss_sum / batch;
}

AdamState AdamState::init(const MicroCnn& model) {
    AdamState state;
    state.m = ParamTensors::zeros_like(model);
    state.v = ParamTensors::zeros_like(model);
    state.step = 0;
    return state;
}

void adam_step(MicroCnn& model, const ParamTensors& grads, AdamState& state,
               const TrainConfig& config) {
    state.step += 1;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    auto params = model.parameter_tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
        std::vector<double>& p = *params[t];
        const std::vector<double>& g = grads.tensors[t];
        std::vector<double>& m = state.m.tensors[t];
        std::vector<double>& v = state.v.tensors[t];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
        }
    }
}

TrainLog train(MicroCnn& model, const std::vector<std::pair<NormalizedImage, int>>& train_set,
               const std::vector<std::pair<NormalizedImage, int>>& val_set,
               const TrainConfig& config) {
    if (train_set.empty()) throw ConfigError("train: empty training set");
    if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    TrainLog log;
    AdamState state = AdamState::init(model);
    std::vector<std::size_t> order(train_set.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, "cnn-shuffle", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        double loss_sum = 0.0;
        ParamTensors grads;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const NormalizedImage*> images;
            std::vector<int> labels;
            for (std::size_t i = start; i < end; ++i) {
                images.push_back(&train_set[order[i]].first);
                labels.push_back(train_set[order[i]].second);
            }
            const double loss = loss_and_backward(model, images, labels, grads);
            adam_step(model, grads, state, config);
            loss_sum += loss * static_cast<double>(images.size());
        }
        log.epoch_loss.push_back(loss_sum / static_cast<double>(train_set.size()));

        if (val_set.empty()) {
            log.val_accuracy.emplace_back(std::nullopt);
        } else {
            std::int64_t correct = 0;
            for (const auto& [image, label] : val_set) {
                const ForwardTrace trace = forward(model, image);
                if (argmax(trace.logits) == label) ++correct;
            }
            log.val_accuracy.emplace_back(static_cast<double>(correct) /
                                          static_cast<double>(val_set.size()));
        }
    }
    return log;
}

std::vector<double> extract_embedding(const MicroCnn& model, const NormalizedImage& image) {
    return forward(model, image).embedding;
}

GradCamMap grad_cam(const MicroCnn& model, const NormalizedImage& image, int target_class) {
    if (target_class < 0 || target_class >= model.n_classes) {
        throw RangeError("grad_cam: target class out of range");
    }
    const ForwardTrace trace = forward(model, image);
    const int emb_dim = model.embedding_dim();
    const int h = trace.conv_h.back() / 2;
    const int w = trace.conv_w.back() / 2;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::vector<double>& feature_maps = trace.pool_out.back();

    // d logit / d A^k_ij via the dense head and the average pool, then the
    // spatial mean of that gradient per channel.
    std::vector<double> alpha(static_cast<std::size_t>(emb_dim));
    for (int k = 0; k < emb_dim; ++k) {
        const double d_emb =
            model.head_weights[static_cast<std::size_t>(target_class) * emb_dim + k];
        const double d_map = d_emb / static_cast<double>(plane); // uniform over positions
        alpha[static_cast<std::size_t>(k)] = d_map * static_cast<double>(plane) /
                                             static_cast<double>(plane);
    }

    GradCamMap map;
    map.raw_height = h;
    map.raw_width = w;
    map.raw.assign(plane, 0.0);
    for (std::size_t i = 0; i < plane; ++i) {
        double v = 0.0;
        for (int k = 0; k < emb_dim; ++k) {
            v += alpha[static_cast<std::size_t>(k)] * feature_maps[k * plane + i];
        }
        map.raw[i] = std::max(0.0, v);
    }

    map.height = trace.input_height;
    map.width = trace.input_width;
    map.upsampled = bilinear_resize(map.raw, h, w, map.height, map.width);
    const auto [mn_it, mx_it] = std::minmax_element(map.upsampled.begin(), map.upsampled.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx > mn) {
        for (double& v : map.upsampled) v = (v - mn) / (mx - mn);
    } else {
        std::fill(map.upsampled.begin(), map.upsampled.end(), mx > 0.0 ? 1.0 : 0.0);
    }
    return map;
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::string& data, std::size_t& pos) {
    if (pos + 4 > data.size()) throw LoadError("model file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
}

double read_f64(const std::string& data, std::size_t& pos) {
    if (pos + 8 > data.size()) throw LoadError("model file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return std::bit_cast<double>(bits);
}

constexpr char kModelMagic[8] = {'M', 'I', 'C', 'R', 'O', 'C', 'N', 'N'};
constexpr std::uint32_t kModelVersion = 1;

} // namespace

void save_model(const MicroCnn& model, const std::string& path) {
    std::string out;
    out.append(kModelMagic, sizeof(kModelMagic));
    append_u32(out, kModelVersion);
    append_u32(out, static_cast<std::uint32_t>(model.in_channels));
    append_u32(out, static_cast<std::uint32_t>(model.n_classes));
    append_u32(out, static_cast<std::uint32_t>(model.widths.size()));
    for (const int w : model.widths) append_u32(out, static_cast<std::uint32_t>(w));
    for (const auto* tensor : model.parameter_tensors()) {
        for (const double v : *tensor) append_f64(out, v);
    }
    atomic_write_file(path, out);
}

MicroCnn load_model(const std::string& path) {
    std::string data;
    try {
        data = read_file(path);
    } catch (const InputError& e) {
        throw LoadError(e.what());
    }
    if (data.size() < sizeof(kModelMagic) ||
        std::memcmp(data.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
        throw LoadError("model file has wrong magic: " + path);
    }
    std::size_t pos = sizeof(kModelMagic);
    if (read_u32(data, pos) != kModelVersion) throw LoadError("unsupported model version: " + path);

    const auto in_channels = static_cast<int>(read_u32(data, pos));
    const auto n_classes = static_cast<int>(read_u32(data, pos));
    const auto n_blocks = static_cast<int>(read_u32(data, pos));
    if (in_channels < 1 || n_classes < 1 || n_blocks < 1 || n_blocks > 64) {
        throw LoadError("model file has implausible architecture: " + path);
    }
    std::vector<int> widths;
    for (int i = 0; i < n_blocks; ++i) widths.push_back(static_cast<int>(read_u32(data, pos)));

    MicroCnn model;
    model.in_channels = in_channels;
    model.n_classes = n_classes;
    model.widths = widths;
    int prev = in_channels;
    for (const int width : widths) {
        if (width < 1) throw LoadError("model file has implausible width: " + path);
        ConvBlock block;
        block.in_channels = prev;
        block.out_channels = width;
        block.weights.resize(static_cast<std::size_t>(width) * prev * 9);
        block.bias.resize(static_cast<std::size_t>(width));
        model.blocks.push_back(std::move(block));
        prev = width;
    }
    model.head_weights.resize(static_cast<std::size_t>(n_classes) * prev);
    model.head_bias.resize(static_cast<std::size_t>(n_classes));

    const std::size_t expected = pos + model.parameter_count() * 8;
    if (data.size() != expected) {
        throw LoadError("model file size mismatch (truncated or trailing bytes): " + path);
    }
    for (auto* tensor : model.parameter_tensors()) {
        for (double& v : *tensor) v = read_f64(data, pos);
    }
    return model;
}

} // namespace vbx
