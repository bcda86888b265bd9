#include "lcq/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lcq/rng.hpp"

namespace lcq {

namespace {

void check_dims(const std::vector<int>& dims) {
    if (dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
    for (int d : dims)
        if (d < 1) throw std::invalid_argument("mlp: layer dims must be positive");
    if (dims.back() != 1) throw std::invalid_argument("mlp: output dimension must be 1");
}

// Forward pass storing pre-activations per layer; returns the scalar output.
// acts[l] holds the activation vector entering layer l (acts[0] = input).
double forward_stash(const MlpParams& p, std::span<const double> input,
                     std::vector<std::vector<double>>& acts) {
    const int L = p.layers();
    acts.resize(L + 1);
    acts[0].assign(input.begin(), input.end());
    for (int l = 0; l < L; ++l) {
        const int in = p.layer_dims[l];
        const int out = p.layer_dims[l + 1];
        const double* W = p.theta.data() + p.weight_offset(l);
        const double* b = p.theta.data() + p.bias_offset(l);
        acts[l + 1].assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double z = b[o];
            const double* row = W + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) z += row[i] * acts[l][i];
            acts[l + 1][o] = (l + 1 == L) ? z : std::tanh(z);
        }
    }
    return acts[L][0];
}

}  // namespace

std::size_t MlpParams::param_count(const std::vector<int>& dims) {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        count += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
    return count;
}

std::size_t MlpParams::weight_offset(int layer) const {
    std::size_t off = 0;
    for (int l = 0; l < layer; ++l)
        off += static_cast<std::size_t>(layer_dims[l]) * layer_dims[l + 1] + layer_dims[l + 1];
    return off;
}

std::size_t MlpParams::bias_offset(int layer) const {
    return weight_offset(layer) + static_cast<std::size_t>(layer_dims[layer]) * layer_dims[layer + 1];
}

MlpParams mlp_init(const std::vector<int>& layer_dims, std::uint64_t seed) {
    check_dims(layer_dims);
    MlpParams p;
    p.layer_dims = layer_dims;
    p.theta.assign(MlpParams::param_count(layer_dims), 0.0);
    Rng rng(seed);
    for (int l = 0; l < p.layers(); ++l) {
        const int in = layer_dims[l];
        const int out = layer_dims[l + 1];
        const double s = std::sqrt(6.0 / (in + out));
        double* W = p.theta.data() + p.weight_offset(l);
        for (int i = 0; i < in * out; ++i) W[i] = rng.uniform(-s, s);
        // biases stay zero
    }
    return p;
}

double mlp_forward(const MlpParams& params, std::span<const double> input) {
    if (static_cast<int>(input.size()) != params.layer_dims.front())
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    std::vector<std::vector<double>> acts;
    return forward_stash(params, input, acts);
}

double mlp_forward(const MlpParams& params, std::span<const double> x, std::span<const double> a) {
    std::vector<double> input;
    input.reserve(x.size() + a.size());
    input.insert(input.end(), x.begin(), x.end());
    input.insert(input.end(), a.begin(), a.end());
    return mlp_forward(params, input);
}

std::vector<double> mlp_forward_batch(const MlpParams& params,
                                      const std::vector<std::vector<double>>& inputs) {
    std::vector<double> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(mlp_forward(params, in));
    return out;
}

std::pair<std::vector<double>, double> mlp_backward(const MlpParams& params,
                                                    const std::vector<std::vector<double>>& inputs,
                                                    std::span<const double> targets) {
    if (inputs.empty()) throw std::invalid_argument("mlp_backward: empty batch");
    if (inputs.size() != targets.size())
        throw std::invalid_argument("mlp_backward: batch/target size mismatch");
    const int L = params.layers();
    std::vector<double> grad(params.theta.size(), 0.0);
    double loss = 0.0;
    std::vector<std::vector<double>> acts;
    std::vector<double> delta, delta_prev;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        if (static_cast<int>(inputs[j].size()) != params.layer_dims.front())
            throw std::invalid_argument("mlp_backward: input dimension mismatch");
        const double q = forward_stash(params, inputs[j], acts);
        const double err = q - targets[j];
        loss += err * err;
        // dloss/dq = 2 err; output layer is linear.
        delta.assign(1, 2.0 * err);
        for (int l = L - 1; l >= 0; --l) {
            const int in = params.layer_dims[l];
            const int out = params.layer_dims[l + 1];
            double* gW = grad.data() + params.weight_offset(l);
            double* gb = grad.data() + params.bias_offset(l);
            const double* W = params.theta.data() + params.weight_offset(l);
            for (int o = 0; o < out; ++o) {
                const double d = delta[o];
                gb[o] += d;
                double* grow = gW + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) grow[i] += d * acts[l][i];
            }
            if (l == 0) break;
            delta_prev.assign(in, 0.0);
            for (int o = 0; o < out; ++o) {
                const double d = delta[o];
                const double* row = W + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) delta_prev[i] += d * row[i];
            }
            // tanh'(z) = 1 - h^2 where h = acts[l] is the layer activation.
            for (int i = 0; i < in; ++i) delta_prev[i] *= 1.0 - acts[l][i] * acts[l][i];
            delta.swap(delta_prev);
        }
    }
    return {std::move(grad), loss};
}

std::vector<double> action_gradient(const MlpParams& params, std::span<const double> x,
                                    std::span<const double> a) {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(a.size());
    if (n + m != params.layer_dims.front())
        throw std::invalid_argument("action_gradient: input dimension mismatch");
    std::vector<double> input;
    input.reserve(n + m);
    input.insert(input.end(), x.begin(), x.end());
    input.insert(input.end(), a.begin(), a.end());
    std::vector<std::vector<double>> acts;
    forward_stash(params, input, acts);

    const int L = params.layers();
    std::vector<double> delta{1.0}, delta_prev;
    for (int l = L - 1; l >= 0; --l) {
        const int in = params.layer_dims[l];
        const int out = params.layer_dims[l + 1];
        const double* W = params.theta.data() + params.weight_offset(l);
        delta_prev.assign(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* row = W + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) delta_prev[i] += d * row[i];
        }
        if (l > 0)
            for (int i = 0; i < in; ++i) delta_prev[i] *= 1.0 - acts[l][i] * acts[l][i];
        delta.swap(delta_prev);
    }
    return std::vector<double>(delta.begin() + n, delta.end());
}

void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
    if (grad.size() != theta.size()) throw std::invalid_argument("adam_step: size mismatch");
    if (state.m.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        theta[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
    }
}

void soft_update(MlpParams& target, const MlpParams& online, double alpha) {
    if (target.layer_dims != online.layer_dims || target.theta.size() != online.theta.size())
        throw std::invalid_argument("soft_update: shape mismatch");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("soft_update: alpha in (0,1]");
    for (std::size_t i = 0; i < target.theta.size(); ++i)
        target.theta[i] = (1.0 - alpha) * target.theta[i] + alpha * online.theta[i];
}

std::string checkpoint_to_string(const MlpParams& params,
                                 const std::vector<std::string>& header_comments) {
    std::ostringstream os;
    for (const auto& line : header_comments) os << "# " << line << "\n";
    os << "MLP v1\n" << params.layer_dims.size();
    for (int d : params.layer_dims) os << ' ' << d;
    os << "\n";
    char buf[40];
    for (std::size_t i = 0; i < params.theta.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", params.theta[i]);
        os << buf << ((i + 1) % 8 == 0 || i + 1 == params.theta.size() ? '\n' : ' ');
    }
    return os.str();
}

MlpParams checkpoint_from_string(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '#') continue;
        break;
    }
    if (line != "MLP v1") throw std::runtime_error("checkpoint: bad magic line");
    std::size_t ndims = 0;
    if (!(is >> ndims) || ndims < 2) throw std::runtime_error("checkpoint: bad dim count");
    std::vector<int> dims(ndims);
    for (auto& d : dims)
        if (!(is >> d)) throw std::runtime_error("checkpoint: bad dims");
    MlpParams p;
    p.layer_dims = dims;
    p.theta.assign(MlpParams::param_count(dims), 0.0);
    for (auto& t : p.theta)
        if (!(is >> t)) throw std::runtime_error("checkpoint: missing parameters");
    return p;
}

void write_checkpoint_file(const std::string& path, const MlpParams& params,
                           const std::vector<std::string>& header_comments) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << checkpoint_to_string(params, header_comments);
}

MlpParams read_checkpoint_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace lcq
