#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcq {

/// Fully connected network with tanh hidden layers and a scalar linear
/// output. Parameters are stored flat as [W0, b0, W1, b1, ...] with row-major
/// weight blocks, so optimizer state and soft updates are simple vector ops.
struct MlpParams {
    std::vector<int> layer_dims;  // [n+m, hidden..., 1]
    std::vector<double> theta;

    int layers() const { return static_cast<int>(layer_dims.size()) - 1; }
    std::size_t weight_offset(int layer) const;
    std::size_t bias_offset(int layer) const;
    static std::size_t param_count(const std::vector<int>& dims);
};

/// Glorot-uniform weights (|w| <= sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic for a given seed. The output dimension must be 1.
MlpParams mlp_init(const std::vector<int>& layer_dims, std::uint64_t seed);

double mlp_forward(const MlpParams& params, std::span<const double> input);
double mlp_forward(const MlpParams& params, std::span<const double> x, std::span<const double> a);
std::vector<double> mlp_forward_batch(const MlpParams& params,
                                      const std::vector<std::vector<double>>& inputs);

/// Gradient of the sum-of-squares loss sum_j (Q(in_j) - y_j)^2 over the batch,
/// accumulated in fixed index order. Returns (d loss / d theta, loss).
std::pair<std::vector<double>, double> mlp_backward(const MlpParams& params,
                                                    const std::vector<std::vector<double>>& inputs,
                                                    std::span<const double> targets);

/// Exact reverse-accumulation derivative of the output with respect to the
/// action block of the input (the last action_dim coordinates).
std::vector<double> action_gradient(const MlpParams& params, std::span<const double> x,
                                    std::span<const double> a);

struct AdamState {
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps);

/// target <- (1 - alpha) target + alpha online, per parameter.
void soft_update(MlpParams& target, const MlpParams& online, double alpha);

/// Checkpoint: '# mlp <k> dims...' style text header plus parameters printed
/// with 17 significant digits.
std::string checkpoint_to_string(const MlpParams& params,
                                 const std::vector<std::string>& header_comments = {});
MlpParams checkpoint_from_string(const std::string& text);
void write_checkpoint_file(const std::string& path, const MlpParams& params,
                           const std::vector<std::string>& header_comments = {});
MlpParams read_checkpoint_file(const std::string& path);

}  // namespace lcq
