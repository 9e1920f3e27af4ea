#include "gradkit/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gradkit {

namespace {

void check_batch(const ModelSpec& spec, const Tensor& x) {
    if (x.shape.size() != 2) {
        throw std::invalid_argument("input batch must be 2-D, got shape " + shape_str(x.shape));
    }
    if (x.cols() != spec.input_width()) {
        throw std::invalid_argument("input width " + std::to_string(x.cols()) +
                                    " does not match model input width " +
                                    std::to_string(spec.input_width()));
    }
}

void check_param_layout(const ModelSpec& spec, const ModelParams& params) {
    const std::size_t want = 2 * (spec.layer_sizes.size() - 1);
    if (params.tensors.size() != want) {
        throw std::invalid_argument("model expects " + std::to_string(want) +
                                    " parameter tensors, got " +
                                    std::to_string(params.tensors.size()));
    }
}

Tensor colsum(const Tensor& d) {
    Tensor out = Tensor::zeros({d.cols()});
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            out.data[c] += d.at(r, c);
        }
    }
    return out;
}

}  // namespace

std::string_view activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

Activation activation_from_name(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation \"" + std::string(name) +
                                "\"; expected relu or tanh");
}

void ModelSpec::validate() const {
    if (layer_sizes.size() < 3) {
        throw std::invalid_argument("model needs at least one hidden layer, got " +
                                    std::to_string(layer_sizes.size()) + " layer sizes");
    }
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw std::invalid_argument("layer widths must be positive");
    }
}

ModelParams init_params(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    ModelParams params;
    for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i) {
        const std::size_t fan_in = spec.layer_sizes[i];
        const std::size_t fan_out = spec.layer_sizes[i + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Tensor w = Tensor::zeros({fan_in, fan_out});
        for (double& v : w.data) v = rng.uniform(-limit, limit);
        params.tensors.push_back(std::move(w));
        params.tensors.push_back(Tensor::zeros({fan_out}));
    }
    return params;
}

Forward forward(const ModelSpec& spec, const ModelParams& params, const Tensor& x) {
    check_batch(spec, x);
    check_param_layout(spec, params);
    const std::size_t nl = spec.layer_sizes.size() - 1;
    Forward f;
    f.acts.reserve(nl);
    f.acts.push_back(x);
    for (std::size_t i = 0; i < nl; ++i) {
        const Tensor& w = params.tensors[2 * i];
        const Tensor& b = params.tensors[2 * i + 1];
        Tensor z = matmul(f.acts.back(), w);
        for (std::size_t r = 0; r < z.rows(); ++r) {
            for (std::size_t c = 0; c < z.cols(); ++c) {
                z.at(r, c) += b.data[c];
            }
        }
        if (i + 1 == nl) {
            f.logits = std::move(z);
            f.probs = softmax_rows(f.logits);
        } else if (spec.activation == Activation::relu) {
            for (double& v : z.data) {
                if (v < 0.0) v = 0.0;
            }
            f.acts.push_back(std::move(z));
        } else {
            for (double& v : z.data) v = std::tanh(v);
            f.acts.push_back(std::move(z));
        }
    }
    return f;
}

Tensor softmax_rows(const Tensor& logits) {
    if (logits.shape.size() != 2) {
        throw std::invalid_argument("softmax expects a 2-D tensor, got shape " +
                                    shape_str(logits.shape));
    }
    Tensor probs = Tensor::zeros(logits.shape);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        double mx = logits.at(r, 0);
        for (std::size_t c = 1; c < logits.cols(); ++c) {
            if (logits.at(r, c) > mx) mx = logits.at(r, c);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols(); ++c) {
            sum += std::exp(logits.at(r, c) - mx);
        }
        const double lse = mx + std::log(sum);
        for (std::size_t c = 0; c < logits.cols(); ++c) {
            probs.at(r, c) = std::exp(logits.at(r, c) - lse);
        }
    }
    return probs;
}

EvalResult loss_and_grads(const ModelSpec& spec, const ModelParams& params, const Tensor& x,
                          const std::vector<int>& labels) {
    Forward f = forward(spec, params, x);
    const std::size_t batch = x.rows();
    const std::size_t classes = spec.class_count();
    if (labels.size() != batch) {
        throw std::invalid_argument("got " + std::to_string(labels.size()) + " labels for batch of " +
                                    std::to_string(batch));
    }
    for (std::size_t r = 0; r < batch; ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
            throw std::invalid_argument("label " + std::to_string(labels[r]) + " at row " +
                                        std::to_string(r) + " outside [0, " +
                                        std::to_string(classes) + ")");
        }
    }

    EvalResult res;
    res.probs = f.probs;
    // Loss comes straight from the logits so a vanishing true-class
    // probability cannot turn into log(0).
    for (std::size_t r = 0; r < batch; ++r) {
        double mx = f.logits.at(r, 0);
        for (std::size_t c = 1; c < classes; ++c) {
            if (f.logits.at(r, c) > mx) mx = f.logits.at(r, c);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            sum += std::exp(f.logits.at(r, c) - mx);
        }
        const double lse = mx + std::log(sum);
        res.loss += lse - f.logits.at(r, static_cast<std::size_t>(labels[r]));
    }
    res.loss /= static_cast<double>(batch);

    Tensor d = res.probs;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        d.at(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    }
    for (double& v : d.data) v *= inv_batch;

    const std::size_t nl = spec.layer_sizes.size() - 1;
    res.grads.resize(params.tensors.size());
    for (std::size_t i = nl; i-- > 0;) {
        const Tensor& a = f.acts[i];
        res.grads[2 * i] = matmul_ta(a, d);
        res.grads[2 * i + 1] = colsum(d);
        if (i > 0) {
            // a is the post-activation output of layer i-1, so it carries the
            // mask (relu) or value (tanh) needed for that layer's derivative.
            Tensor dprev = matmul_tb(d, params.tensors[2 * i]);
            if (spec.activation == Activation::relu) {
                for (std::size_t k = 0; k < dprev.size(); ++k) {
                    if (a.data[k] <= 0.0) dprev.data[k] = 0.0;
                }
            } else {
                for (std::size_t k = 0; k < dprev.size(); ++k) {
                    dprev.data[k] *= 1.0 - a.data[k] * a.data[k];
                }
            }
            d = std::move(dprev);
        }
    }
    return res;
}

Tensor predict_probs(const ModelSpec& spec, const ModelParams& params, const Tensor& x) {
    return forward(spec, params, x).probs;
}

}  // namespace gradkit
