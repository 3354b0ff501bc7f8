#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "modesynth/errors.hpp"
#include "modesynth/matrix.hpp"
#include "modesynth/rng.hpp"

namespace modesynth {

enum class HiddenUnitKind { linear_gaussian, binary_sigmoid };

/// Test hook: mean_field replaces every stochastic sample with its mean so a
/// CD step can be traced by hand.
enum class SampleMode { stochastic, mean_field };

/// Bipartite energy model parameters. weights is nv x nh; the restriction
/// means no intra-layer terms exist.
struct RbmParams {
    Matrix weights;
    std::vector<double> visible_bias;
    std::vector<double> hidden_bias;

    std::size_t nv() const { return visible_bias.size(); }
    std::size_t nh() const { return hidden_bias.size(); }

    static RbmParams zeros(std::size_t nv, std::size_t nh) {
        RbmParams p;
        p.weights = Matrix(nv, nh);
        p.visible_bias.assign(nv, 0.0);
        p.hidden_bias.assign(nh, 0.0);
        return p;
    }

    void check_consistent() const {
        if (weights.rows() != nv() || weights.cols() != nh())
            throw ShapeMismatch("RbmParams: weight matrix does not match bias lengths");
    }
};

struct RbmTrainConfig {
    std::size_t num_hidden = 500;
    std::size_t cd_k = 1;
    std::size_t epochs = 1;
    double learning_rate = 0.001;
    double momentum = 0.5;
    double final_momentum = 0.9;
    std::size_t momentum_switch_epoch = 5;  // updates before switching to final_momentum
    double weight_decay = 0.0002;
    std::size_t num_chains = 1;  // > 1 switches to persistent chains
    HiddenUnitKind hidden_unit_kind = HiddenUnitKind::linear_gaussian;
    double init_weight_sigma = 0.1;
    std::uint64_t seed = 0;
};

/// Mutable companion of cd_update: momentum velocities plus the persistent
/// chain states used when num_chains > 1.
struct CdState {
    Matrix weight_velocity;
    std::vector<double> visible_bias_velocity;
    std::vector<double> hidden_bias_velocity;
    Matrix chain_visible;  // num_chains x nv
    bool chains_ready = false;
    std::size_t updates_done = 0;

    static CdState zeros(std::size_t nv, std::size_t nh) {
        CdState s;
        s.weight_velocity = Matrix(nv, nh);
        s.visible_bias_velocity.assign(nv, 0.0);
        s.hidden_bias_velocity.assign(nh, 0.0);
        return s;
    }
};

struct RbmGradient {
    Matrix dw;
    std::vector<double> dvb;
    std::vector<double> dhb;
};

struct UnitActivation {
    std::vector<double> mean;
    std::vector<double> sample;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Unpack the low n bits of a state index into a 0/1 vector.
inline void unpack_bits(std::uint32_t state, std::size_t n, std::vector<double>& out) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>((state >> i) & 1u);
}

}  // namespace detail

/// General energy E(x) = -(x^T U x + b^T x).
inline double energy_general(std::span<const double> x, const Matrix& u,
                             std::span<const double> b) {
    if (u.rows() != x.size() || u.cols() != x.size() || b.size() != x.size())
        throw ShapeMismatch("energy_general: dimension mismatch");
    double quad = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) quad += x[i] * u(i, j) * x[j];
    double lin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lin += b[i] * x[i];
    return -(quad + lin);
}

/// Restricted energy E(v, h) = -(v^T W h + b^T v + c^T h).
inline double energy(std::span<const double> v, std::span<const double> h,
                     const RbmParams& params) {
    if (v.size() != params.nv() || h.size() != params.nh())
        throw ShapeMismatch("energy: dimension mismatch");
    double cross = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) row += params.weights(i, j) * h[j];
        cross += v[i] * row;
    }
    double bias = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) bias += params.visible_bias[i] * v[i];
    for (std::size_t j = 0; j < h.size(); ++j) bias += params.hidden_bias[j] * h[j];
    return -(cross + bias);
}

/// Z = sum over all binary (v, h) of exp(-E(v, h)). Binary-binary enumeration,
/// so the instance must satisfy nv + nh <= 20.
inline double partition_function(const RbmParams& params) {
    params.check_consistent();
    const std::size_t nv = params.nv();
    const std::size_t nh = params.nh();
    if (nv + nh > 20) throw Intractable("partition_function: nv + nh must be <= 20");
    std::vector<double> v, h;
    double z = 0.0;
    for (std::uint32_t vs = 0; vs < (1u << nv); ++vs) {
        detail::unpack_bits(vs, nv, v);
        for (std::uint32_t hs = 0; hs < (1u << nh); ++hs) {
            detail::unpack_bits(hs, nh, h);
            z += std::exp(-energy(v, h, params));
        }
    }
    return z;
}

/// Sum over the data of log P(v_t) with the hidden units marginalized:
/// sum_t log( sum_h exp(-E(v_t, h)) / Z ).
inline double log_likelihood(const RbmParams& params,
                             const std::vector<std::vector<double>>& data) {
    params.check_consistent();
    if (data.empty()) throw EmptyData("log_likelihood: no data");
    const std::size_t nv = params.nv();
    const std::size_t nh = params.nh();
    if (nv + nh > 20) throw Intractable("log_likelihood: nv + nh must be <= 20");
    const double log_z = std::log(partition_function(params));
    std::vector<double> h;
    double ll = 0.0;
    for (const auto& v : data) {
        if (v.size() != nv) throw ShapeMismatch("log_likelihood: data width != nv");
        double unnormalized = 0.0;
        for (std::uint32_t hs = 0; hs < (1u << nh); ++hs) {
            detail::unpack_bits(hs, nh, h);
            unnormalized += std::exp(-energy(v, h, params));
        }
        ll += std::log(unnormalized) - log_z;
    }
    return ll;
}

/// Conditional hidden units given a visible vector. binary_sigmoid:
/// mean = sigma(W^T v + c), Bernoulli sample. linear_gaussian: mean =
/// W^T v + c, sample = mean + N(0, 1) per unit.
inline UnitActivation hidden_given_visible(const RbmParams& params,
                                           std::span<const double> v, HiddenUnitKind kind,
                                           RngStream& rng,
                                           SampleMode mode = SampleMode::stochastic) {
    if (v.size() != params.nv()) throw ShapeMismatch("hidden_given_visible: |v| != nv");
    UnitActivation act;
    act.mean.resize(params.nh());
    act.sample.resize(params.nh());
    for (std::size_t j = 0; j < params.nh(); ++j) {
        double drive = params.hidden_bias[j];
        for (std::size_t i = 0; i < params.nv(); ++i) drive += v[i] * params.weights(i, j);
        if (kind == HiddenUnitKind::binary_sigmoid) {
            act.mean[j] = detail::sigmoid(drive);
            act.sample[j] = mode == SampleMode::stochastic
                                ? static_cast<double>(draw_bernoulli(rng, act.mean[j]))
                                : act.mean[j];
        } else {
            act.mean[j] = drive;
            act.sample[j] = mode == SampleMode::stochastic
                                ? act.mean[j] + draw_gaussian(rng, 0.0, 1.0)
                                : act.mean[j];
        }
    }
    return act;
}

/// Conditional visible units given hidden: mean = sigma(W h + b), Bernoulli
/// sample.
inline UnitActivation visible_given_hidden(const RbmParams& params,
                                           std::span<const double> h, RngStream& rng,
                                           SampleMode mode = SampleMode::stochastic) {
    if (h.size() != params.nh()) throw ShapeMismatch("visible_given_hidden: |h| != nh");
    UnitActivation act;
    act.mean.resize(params.nv());
    act.sample.resize(params.nv());
    for (std::size_t i = 0; i < params.nv(); ++i) {
        double drive = params.visible_bias[i];
        for (std::size_t j = 0; j < params.nh(); ++j) drive += params.weights(i, j) * h[j];
        act.mean[i] = detail::sigmoid(drive);
        act.sample[i] = mode == SampleMode::stochastic
                            ? static_cast<double>(draw_bernoulli(rng, act.mean[i]))
                            : act.mean[i];
    }
    return act;
}

/// Exact data-minus-model gradient of the average log-likelihood, by full
/// enumeration over every binary (v, h) state. Binary-sigmoid hidden units.
/// dW = E_data[v h(v)^T] - E_model[v h^T]; biases analogous.
inline RbmGradient exact_gradient(const RbmParams& params,
                                  const std::vector<std::vector<double>>& data) {
    params.check_consistent();
    if (data.empty()) throw EmptyData("exact_gradient: no data");
    const std::size_t nv = params.nv();
    const std::size_t nh = params.nh();
    if (nv + nh > 16) throw Intractable("exact_gradient: nv + nh must be <= 16");

    RbmGradient grad;
    grad.dw = Matrix(nv, nh);
    grad.dvb.assign(nv, 0.0);
    grad.dhb.assign(nh, 0.0);

    // Data expectation with exact conditional hidden means.
    for (const auto& v : data) {
        if (v.size() != nv) throw ShapeMismatch("exact_gradient: data width != nv");
        for (std::size_t j = 0; j < nh; ++j) {
            double drive = params.hidden_bias[j];
            for (std::size_t i = 0; i < nv; ++i) drive += v[i] * params.weights(i, j);
            const double hmean = detail::sigmoid(drive);
            grad.dhb[j] += hmean;
            for (std::size_t i = 0; i < nv; ++i) grad.dw(i, j) += v[i] * hmean;
        }
        for (std::size_t i = 0; i < nv; ++i) grad.dvb[i] += v[i];
    }
    const double inv_t = 1.0 / static_cast<double>(data.size());
    for (auto& x : grad.dw.values()) x *= inv_t;
    for (auto& x : grad.dvb) x *= inv_t;
    for (auto& x : grad.dhb) x *= inv_t;

    // Model expectation over every joint state.
    const double z = partition_function(params);
    std::vector<double> v, h;
    for (std::uint32_t vs = 0; vs < (1u << nv); ++vs) {
        detail::unpack_bits(vs, nv, v);
        for (std::uint32_t hs = 0; hs < (1u << nh); ++hs) {
            detail::unpack_bits(hs, nh, h);
            const double p = std::exp(-energy(v, h, params)) / z;
            for (std::size_t i = 0; i < nv; ++i) {
                if (v[i] == 0.0) continue;
                grad.dvb[i] -= p;
                for (std::size_t j = 0; j < nh; ++j) grad.dw(i, j) -= p * h[j];
            }
            for (std::size_t j = 0; j < nh; ++j)
                if (h[j] != 0.0) grad.dhb[j] -= p;
        }
    }
    return grad;
}

/// One contrastive-divergence update. Positive statistics use the data with
/// conditional hidden means; negative statistics come from cd_k alternating
/// Gibbs steps (hidden sample, then visible sample) started at each batch row,
/// or from num_chains persistent chains when num_chains > 1. The update is
/// momentum-smoothed and weight-decay adjusted:
///
///   velocity = m * velocity + lr * ((pos - neg) - decay * W);  W += velocity
///
/// with biases updated the same way without decay.
inline void cd_update(RbmParams& params, const Matrix& batch, const RbmTrainConfig& cfg,
                      CdState& state, RngStream& rng,
                      SampleMode mode = SampleMode::stochastic) {
    params.check_consistent();
    if (batch.rows() == 0) throw EmptyBatch("cd_update: empty batch");
    if (batch.cols() != params.nv()) throw ShapeMismatch("cd_update: batch width != nv");
    if (cfg.cd_k < 1) throw InvalidRange("cd_update: cd_k must be >= 1");
    if (cfg.num_chains < 1) throw InvalidRange("cd_update: num_chains must be >= 1");

    const std::size_t nv = params.nv();
    const std::size_t nh = params.nh();
    const std::size_t batch_size = batch.rows();

    Matrix pos_w(nv, nh), neg_w(nv, nh);
    std::vector<double> pos_v(nv, 0.0), neg_v(nv, 0.0);
    std::vector<double> pos_h(nh, 0.0), neg_h(nh, 0.0);

    auto accumulate = [&](Matrix& w_acc, std::vector<double>& v_acc,
                          std::vector<double>& h_acc, std::span<const double> v,
                          std::span<const double> h) {
        for (std::size_t i = 0; i < nv; ++i) {
            v_acc[i] += v[i];
            if (v[i] == 0.0) continue;
            for (std::size_t j = 0; j < nh; ++j) w_acc(i, j) += v[i] * h[j];
        }
        for (std::size_t j = 0; j < nh; ++j) h_acc[j] += h[j];
    };

    auto gibbs_steps = [&](std::vector<double> v0, const UnitActivation& h0) {
        // k alternations starting from an already-sampled hidden state.
        std::vector<double> vcur = std::move(v0);
        std::vector<double> hsample = h0.sample;
        UnitActivation hcur = h0;
        for (std::size_t step = 0; step < cfg.cd_k; ++step) {
            const UnitActivation vis = visible_given_hidden(params, hsample, rng, mode);
            vcur = mode == SampleMode::stochastic ? vis.sample : vis.mean;
            hcur = hidden_given_visible(params, vcur, cfg.hidden_unit_kind, rng, mode);
            hsample = hcur.sample;
        }
        return std::pair<std::vector<double>, std::vector<double>>{vcur, hcur.mean};
    };

    // Positive phase, plus (standard CD) a chain from every data row.
    std::size_t negatives = 0;
    for (std::size_t t = 0; t < batch_size; ++t) {
        std::vector<double> v(nv);
        for (std::size_t i = 0; i < nv; ++i) v[i] = batch(t, i);
        const UnitActivation hidden =
            hidden_given_visible(params, v, cfg.hidden_unit_kind, rng, mode);
        accumulate(pos_w, pos_v, pos_h, v, hidden.mean);

        if (cfg.num_chains == 1) {
            auto [v_end, h_end] = gibbs_steps(v, hidden);
            accumulate(neg_w, neg_v, neg_h, v_end, h_end);
            ++negatives;
        }
    }

    // Persistent-chain variant (Eq.-15 style parallel chains).
    if (cfg.num_chains > 1) {
        if (!state.chains_ready) {
            state.chain_visible = Matrix(cfg.num_chains, nv);
            for (std::size_t m = 0; m < cfg.num_chains; ++m)
                for (std::size_t i = 0; i < nv; ++i)
                    state.chain_visible(m, i) = batch(m % batch_size, i);
            state.chains_ready = true;
        }
        for (std::size_t m = 0; m < cfg.num_chains; ++m) {
            std::vector<double> v(nv);
            for (std::size_t i = 0; i < nv; ++i) v[i] = state.chain_visible(m, i);
            const UnitActivation hidden =
                hidden_given_visible(params, v, cfg.hidden_unit_kind, rng, mode);
            auto [v_end, h_end] = gibbs_steps(v, hidden);
            accumulate(neg_w, neg_v, neg_h, v_end, h_end);
            for (std::size_t i = 0; i < nv; ++i) state.chain_visible(m, i) = v_end[i];
            ++negatives;
        }
    }

    const double momentum = state.updates_done >= cfg.momentum_switch_epoch
                                ? cfg.final_momentum
                                : cfg.momentum;
    const double inv_pos = 1.0 / static_cast<double>(batch_size);
    const double inv_neg = 1.0 / static_cast<double>(negatives);

    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = 0; j < nh; ++j) {
            const double delta = pos_w(i, j) * inv_pos - neg_w(i, j) * inv_neg -
                                 cfg.weight_decay * params.weights(i, j);
            state.weight_velocity(i, j) =
                momentum * state.weight_velocity(i, j) + cfg.learning_rate * delta;
            params.weights(i, j) += state.weight_velocity(i, j);
        }
        state.visible_bias_velocity[i] =
            momentum * state.visible_bias_velocity[i] +
            cfg.learning_rate * (pos_v[i] * inv_pos - neg_v[i] * inv_neg);
        params.visible_bias[i] += state.visible_bias_velocity[i];
    }
    for (std::size_t j = 0; j < nh; ++j) {
        state.hidden_bias_velocity[j] =
            momentum * state.hidden_bias_velocity[j] +
            cfg.learning_rate * (pos_h[j] * inv_pos - neg_h[j] * inv_neg);
        params.hidden_bias[j] += state.hidden_bias_velocity[j];
    }
    ++state.updates_done;
}

/// Summed squared error between the data rows and the visible means after one
/// hidden-sample -> visible-mean pass (the adapted-code convention).
inline double rbm_reconstruction_error(const RbmParams& params, const Matrix& data,
                                       RngStream& rng,
                                       HiddenUnitKind kind = HiddenUnitKind::linear_gaussian) {
    params.check_consistent();
    if (data.rows() == 0) throw EmptyData("rbm_reconstruction_error: empty data");
    if (data.cols() != params.nv())
        throw ShapeMismatch("rbm_reconstruction_error: data width != nv");
    double err = 0.0;
    std::vector<double> v(params.nv());
    for (std::size_t t = 0; t < data.rows(); ++t) {
        for (std::size_t i = 0; i < params.nv(); ++i) v[i] = data(t, i);
        const UnitActivation hidden = hidden_given_visible(params, v, kind, rng);
        const UnitActivation visible = visible_given_hidden(params, hidden.sample, rng);
        for (std::size_t i = 0; i < params.nv(); ++i) {
            const double d = v[i] - visible.mean[i];
            err += d * d;
        }
    }
    return err;
}

struct RbmTrainResult {
    RbmParams params;
    std::vector<double> error_history;  // one reconstruction error per epoch
};

/// Full training run: weights initialized N(0, init_weight_sigma^2), biases
/// zero, one full-batch cd_update per epoch, reconstruction error recorded
/// after each epoch. Streams: 0 init, 1 CD sampling, 2 error evaluation.
inline RbmTrainResult train_rbm(const Matrix& data, const RbmTrainConfig& cfg) {
    if (data.rows() == 0) throw EmptyData("train_rbm: empty data");
    if (cfg.epochs < 1) throw InvalidRange("train_rbm: epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw InvalidRange("train_rbm: learning_rate must be > 0");
    if (cfg.num_hidden < 1) throw InvalidRange("train_rbm: num_hidden must be >= 1");
    for (double x : data.values())
        if (x < 0.0 || x > 1.0) throw OutOfRange("train_rbm: data must lie in [0, 1]");

    const std::size_t nv = data.cols();
    const std::size_t nh = cfg.num_hidden;

    RbmTrainResult result;
    result.params = RbmParams::zeros(nv, nh);
    RngStream init_rng(cfg.seed, 0);
    const double var = cfg.init_weight_sigma * cfg.init_weight_sigma;
    for (auto& w : result.params.weights.values()) w = draw_gaussian(init_rng, 0.0, var);

    CdState state = CdState::zeros(nv, nh);
    RngStream cd_rng(cfg.seed, 1);
    RngStream err_rng(cfg.seed, 2);
    result.error_history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        cd_update(result.params, data, cfg, state, cd_rng);
        result.error_history.push_back(
            rbm_reconstruction_error(result.params, data, err_rng, cfg.hidden_unit_kind));
    }
    return result;
}

/// Flat JSON snapshot: dims header plus row-major values.
inline void save_params(const RbmParams& params, const std::filesystem::path& path) {
    params.check_consistent();
    nlohmann::json j;
    j["format"] = "rbm-params.v1";
    j["nv"] = params.nv();
    j["nh"] = params.nh();
    j["weights"] = params.weights.values();
    j["visible_bias"] = params.visible_bias;
    j["hidden_bias"] = params.hidden_bias;
    std::ofstream out(path);
    if (!out) throw IoError("save_params: cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("save_params: write failed for " + path.string());
}

inline RbmParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_params: cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_params: " + std::string(e.what()));
    }
    try {
        if (j.at("format").get<std::string>() != "rbm-params.v1")
            throw ParseError("load_params: unknown format tag");
        const auto nv = j.at("nv").get<std::size_t>();
        const auto nh = j.at("nh").get<std::size_t>();
        RbmParams p;
        p.weights = Matrix::from_values(nv, nh, j.at("weights").get<std::vector<double>>());
        p.visible_bias = j.at("visible_bias").get<std::vector<double>>();
        p.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
        if (p.visible_bias.size() != nv || p.hidden_bias.size() != nh)
            throw ParseError("load_params: bias lengths disagree with dims header");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_params: " + std::string(e.what()));
    }
}

}  // namespace modesynth
