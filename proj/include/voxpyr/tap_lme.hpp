#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "voxpyr/error.hpp"

namespace voxpyr {

/// S tokens of width G, row-major.
struct TokenMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    TokenMatrix() = default;
    TokenMatrix(int s, int g) : rows(s), cols(g), data(static_cast<std::size_t>(s) * g, 0.0) {}

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Learnable pooling parameters; lambda_raw is unconstrained and maps to the
/// fusion coefficient through the logistic function.
struct PoolingParams {
    int width = 0;                    // G
    std::vector<double> attention_w;  // G x G, row-major (the shared MLP weight)
    std::vector<double> attention_b;  // G
    std::vector<double> score_w;      // G
    double lambda_raw = 0.0;

    double lambda() const { return logistic(lambda_raw); }

    /// Uniform init in [-1/sqrt(G), 1/sqrt(G)] for weights, zero bias,
    /// lambda_raw = 0 (lambda = 0.5).
    static PoolingParams random_init(int g, std::uint64_t seed) {
        if (g < 1) throw usage_error("PoolingParams: width must be >= 1");
        PoolingParams p;
        p.width = g;
        std::mt19937_64 rng(seed);
        const double bound = 1.0 / std::sqrt(static_cast<double>(g));
        std::uniform_real_distribution<double> dist(-bound, bound);
        p.attention_w.resize(static_cast<std::size_t>(g) * g);
        for (double& v : p.attention_w) v = dist(rng);
        p.attention_b.assign(static_cast<std::size_t>(g), 0.0);
        p.score_w.resize(static_cast<std::size_t>(g));
        for (double& v : p.score_w) v = dist(rng);
        p.lambda_raw = 0.0;
        return p;
    }
};

enum class PoolingVariant {
    baseline_max,    // g = max(T)
    tap_only,        // g = g_tap
    tap_res_fixed,   // lambda = 0.5
    tap_res_learnt,  // lambda = logistic(lambda_raw)
    tap_weight_only, // alpha forced uniform, lambda learnt
};

inline const char* variant_name(PoolingVariant v) {
    switch (v) {
        case PoolingVariant::baseline_max: return "baseline_max";
        case PoolingVariant::tap_only: return "tap_only";
        case PoolingVariant::tap_res_fixed: return "tap_res_fixed";
        case PoolingVariant::tap_res_learnt: return "tap_res_learnt";
        case PoolingVariant::tap_weight_only: return "tap_weight_only";
    }
    return "?";
}

inline PoolingVariant variant_from_name(const std::string& name) {
    for (PoolingVariant v :
         {PoolingVariant::baseline_max, PoolingVariant::tap_only, PoolingVariant::tap_res_fixed,
          PoolingVariant::tap_res_learnt, PoolingVariant::tap_weight_only})
        if (name == variant_name(v)) return v;
    throw usage_error("unknown pooling variant '" + name + "'");
}

struct PoolingOutput {
    std::vector<double> alpha;  // S, non-negative, sums to 1
    std::vector<double> g_tap;  // G
    std::vector<double> g_max;  // G
    std::vector<double> g;      // G
    double lambda_used = 0.0;
};

namespace detail {

inline void check_dims(const TokenMatrix& tokens, const PoolingParams& params) {
    if (tokens.rows < 1 || tokens.cols < 1)
        throw usage_error("pooling: token matrix must be at least 1x1");
    if (params.width != tokens.cols)
        throw usage_error("pooling: parameter width " + std::to_string(params.width) +
                          " does not match token width " + std::to_string(tokens.cols));
}

/// score_i = w . relu(W t_i + b); pre-activations optionally captured for
/// the backward pass.
inline std::vector<double> attention_scores(const TokenMatrix& tokens,
                                            const PoolingParams& params,
                                            std::vector<double>* pre_activations = nullptr) {
    const int s = tokens.rows, g = tokens.cols;
    std::vector<double> scores(static_cast<std::size_t>(s), 0.0);
    if (pre_activations) pre_activations->assign(static_cast<std::size_t>(s) * g, 0.0);
    for (int i = 0; i < s; ++i) {
        double score = 0.0;
        for (int r = 0; r < g; ++r) {
            double z = params.attention_b[static_cast<std::size_t>(r)];
            for (int c = 0; c < g; ++c)
                z += params.attention_w[static_cast<std::size_t>(r) * g + c] * tokens.at(i, c);
            if (pre_activations)
                (*pre_activations)[static_cast<std::size_t>(i) * g + r] = z;
            if (z > 0.0) score += params.score_w[static_cast<std::size_t>(r)] * z;
        }
        scores[static_cast<std::size_t>(i)] = score;
    }
    return scores;
}

inline std::vector<double> softmax(const std::vector<double>& scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace detail

/// Softmax attention weights over tokens (overflow-safe via max
/// subtraction).
inline std::vector<double> attention_weights(const TokenMatrix& tokens,
                                             const PoolingParams& params) {
    detail::check_dims(tokens, params);
    return detail::softmax(detail::attention_scores(tokens, params));
}

/// Weighted token sum, g_tap = sum_i alpha_i t_i.
inline std::vector<double> tap_pool(const TokenMatrix& tokens,
                                    const std::vector<double>& alpha) {
    if (static_cast<int>(alpha.size()) != tokens.rows)
        throw usage_error("tap_pool: weight count does not match token count");
    std::vector<double> g(static_cast<std::size_t>(tokens.cols), 0.0);
    for (int i = 0; i < tokens.rows; ++i)
        for (int j = 0; j < tokens.cols; ++j)
            g[static_cast<std::size_t>(j)] += alpha[static_cast<std::size_t>(i)] * tokens.at(i, j);
    return g;
}

/// g = lambda g_tap + (1 - lambda) g_max, element-wise.
inline std::vector<double> fuse(const std::vector<double>& g_tap,
                                const std::vector<double>& g_max, double lambda) {
    if (g_tap.size() != g_max.size()) throw usage_error("fuse: vector length mismatch");
    std::vector<double> g(g_tap.size());
    for (std::size_t j = 0; j < g.size(); ++j)
        g[j] = lambda * g_tap[j] + (1.0 - lambda) * g_max[j];
    return g;
}

inline double variant_lambda(PoolingVariant variant, const PoolingParams& params) {
    switch (variant) {
        case PoolingVariant::baseline_max: return 0.0;
        case PoolingVariant::tap_only: return 1.0;
        case PoolingVariant::tap_res_fixed: return 0.5;
        case PoolingVariant::tap_res_learnt:
        case PoolingVariant::tap_weight_only: return params.lambda();
    }
    return 0.0;
}

inline PoolingOutput forward(const TokenMatrix& tokens, const PoolingParams& params,
                             PoolingVariant variant) {
    detail::check_dims(tokens, params);
    PoolingOutput out;
    if (variant == PoolingVariant::tap_weight_only) {
        out.alpha.assign(static_cast<std::size_t>(tokens.rows), 1.0 / tokens.rows);
    } else {
        out.alpha = attention_weights(tokens, params);
    }
    out.g_tap = tap_pool(tokens, out.alpha);
    out.g_max.assign(static_cast<std::size_t>(tokens.cols),
                     -std::numeric_limits<double>::infinity());
    for (int i = 0; i < tokens.rows; ++i)
        for (int j = 0; j < tokens.cols; ++j)
            out.g_max[static_cast<std::size_t>(j)] =
                std::max(out.g_max[static_cast<std::size_t>(j)], tokens.at(i, j));
    out.lambda_used = variant_lambda(variant, params);
    out.g = fuse(out.g_tap, out.g_max, out.lambda_used);
    return out;
}

struct PoolingGradients {
    std::vector<double> attention_w;  // G x G
    std::vector<double> attention_b;  // G
    std::vector<double> score_w;      // G
    double lambda_raw = 0.0;
    std::vector<double> tokens;  // S x G, row-major

    void add_scaled(const PoolingGradients& o, double s) {
        for (std::size_t i = 0; i < attention_w.size(); ++i) attention_w[i] += s * o.attention_w[i];
        for (std::size_t i = 0; i < attention_b.size(); ++i) attention_b[i] += s * o.attention_b[i];
        for (std::size_t i = 0; i < score_w.size(); ++i) score_w[i] += s * o.score_w[i];
        lambda_raw += s * o.lambda_raw;
    }
};

/// Exact gradients of upstream . g with respect to parameters and tokens:
/// full softmax Jacobian, ReLU mask, max-pool subgradient routed to the
/// first argmax per feature, and d lambda / d lambda_raw = lambda (1 -
/// lambda). Fixed-lambda variants get a zero lambda_raw gradient; the
/// uniform-alpha variant gets zero attention gradients.
inline PoolingGradients backward(const TokenMatrix& tokens, const PoolingParams& params,
                                 const std::vector<double>& upstream,
                                 PoolingVariant variant = PoolingVariant::tap_res_learnt) {
    detail::check_dims(tokens, params);
    const int s = tokens.rows, g = tokens.cols;
    if (static_cast<int>(upstream.size()) != g)
        throw usage_error("backward: upstream gradient length mismatch");

    const bool uniform_alpha = variant == PoolingVariant::tap_weight_only;
    const bool learnt_lambda = variant == PoolingVariant::tap_res_learnt ||
                               variant == PoolingVariant::tap_weight_only;

    std::vector<double> pre;  // S x G pre-activations
    std::vector<double> alpha;
    if (uniform_alpha) {
        alpha.assign(static_cast<std::size_t>(s), 1.0 / s);
    } else {
        alpha = detail::softmax(detail::attention_scores(tokens, params, &pre));
    }

    std::vector<double> g_tap(static_cast<std::size_t>(g), 0.0);
    std::vector<double> g_max(static_cast<std::size_t>(g),
                              -std::numeric_limits<double>::infinity());
    std::vector<int> argmax(static_cast<std::size_t>(g), 0);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < g; ++j) {
            g_tap[static_cast<std::size_t>(j)] += alpha[static_cast<std::size_t>(i)] * tokens.at(i, j);
            if (tokens.at(i, j) > g_max[static_cast<std::size_t>(j)]) {
                g_max[static_cast<std::size_t>(j)] = tokens.at(i, j);
                argmax[static_cast<std::size_t>(j)] = i;
            }
        }

    const double lambda = variant_lambda(variant, params);

    PoolingGradients grads;
    grads.attention_w.assign(static_cast<std::size_t>(g) * g, 0.0);
    grads.attention_b.assign(static_cast<std::size_t>(g), 0.0);
    grads.score_w.assign(static_cast<std::size_t>(g), 0.0);
    grads.tokens.assign(static_cast<std::size_t>(s) * g, 0.0);

    // lambda path
    if (learnt_lambda) {
        double d_lambda = 0.0;
        for (int j = 0; j < g; ++j)
            d_lambda += upstream[static_cast<std::size_t>(j)] *
                        (g_tap[static_cast<std::size_t>(j)] - g_max[static_cast<std::size_t>(j)]);
        grads.lambda_raw = d_lambda * lambda * (1.0 - lambda);
    }

    // max-pool path
    for (int j = 0; j < g; ++j)
        grads.tokens[static_cast<std::size_t>(argmax[static_cast<std::size_t>(j)]) * g + j] +=
            (1.0 - lambda) * upstream[static_cast<std::size_t>(j)];

    // g_tap path: d/d alpha_i = lambda u . t_i, d/d t_i += lambda u alpha_i
    std::vector<double> d_alpha(static_cast<std::size_t>(s), 0.0);
    for (int i = 0; i < s; ++i) {
        double dot = 0.0;
        for (int j = 0; j < g; ++j) {
            dot += upstream[static_cast<std::size_t>(j)] * tokens.at(i, j);
            grads.tokens[static_cast<std::size_t>(i) * g + j] +=
                lambda * upstream[static_cast<std::size_t>(j)] * alpha[static_cast<std::size_t>(i)];
        }
        d_alpha[static_cast<std::size_t>(i)] = lambda * dot;
    }

    if (!uniform_alpha) {
        // softmax Jacobian: d/d score_i = alpha_i (d_alpha_i - sum_j alpha_j d_alpha_j)
        double mix = 0.0;
        for (int i = 0; i < s; ++i)
            mix += alpha[static_cast<std::size_t>(i)] * d_alpha[static_cast<std::size_t>(i)];
        for (int i = 0; i < s; ++i) {
            const double d_score =
                alpha[static_cast<std::size_t>(i)] * (d_alpha[static_cast<std::size_t>(i)] - mix);
            if (d_score == 0.0) continue;
            for (int r = 0; r < g; ++r) {
                const double z = pre[static_cast<std::size_t>(i) * g + r];
                if (z > 0.0)
                    grads.score_w[static_cast<std::size_t>(r)] += d_score * z;
                const double d_z =
                    (z > 0.0) ? d_score * params.score_w[static_cast<std::size_t>(r)] : 0.0;
                if (d_z == 0.0) continue;
                grads.attention_b[static_cast<std::size_t>(r)] += d_z;
                for (int c = 0; c < g; ++c) {
                    grads.attention_w[static_cast<std::size_t>(r) * g + c] += d_z * tokens.at(i, c);
                    grads.tokens[static_cast<std::size_t>(i) * g + c] +=
                        d_z * params.attention_w[static_cast<std::size_t>(r) * g + c];
                }
            }
        }
    }
    return grads;
}

// ---------------------------------------------------------------------------
// finite-difference checker

struct GradCheckConfig {
    int configurations = 50;
    int max_tokens = 8;    // S upper bound
    int max_width = 6;     // G upper bound
    double step = 1e-5;    // central-difference h
    std::uint64_t seed = 0;
    PoolingVariant variant = PoolingVariant::tap_res_learnt;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    int configurations = 0;
};

namespace detail {

inline double pooling_loss(const TokenMatrix& tokens, const PoolingParams& params,
                           const std::vector<double>& upstream, PoolingVariant variant) {
    const PoolingOutput out = forward(tokens, params, variant);
    double loss = 0.0;
    for (std::size_t j = 0; j < upstream.size(); ++j) loss += upstream[j] * out.g[j];
    return loss;
}

inline double fd_rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
}

// ReLU kinks and max-pool ties make one-sided derivatives; keep sampled
// configurations at a safe margin from them so central differences are
// valid.
inline bool config_has_margin(const TokenMatrix& tokens, const PoolingParams& params,
                              double margin) {
    std::vector<double> pre;
    attention_scores(tokens, params, &pre);
    for (double z : pre)
        if (std::abs(z) < margin) return false;
    for (int j = 0; j < tokens.cols; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < tokens.rows; ++i) best = std::max(best, tokens.at(i, j));
        int near = 0;
        for (int i = 0; i < tokens.rows; ++i)
            if (best - tokens.at(i, j) < margin) ++near;
        if (near > 1) return false;
    }
    return true;
}

}  // namespace detail

/// Central-difference check of backward() on random configurations. Returns
/// the worst relative error over every parameter and token component.
inline GradCheckResult gradient_check(const GradCheckConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GradCheckResult result;

    for (int c = 0; c < cfg.configurations; ++c) {
        std::uniform_int_distribution<int> s_dist(1, cfg.max_tokens);
        std::uniform_int_distribution<int> g_dist(1, cfg.max_width);

        TokenMatrix tokens;
        PoolingParams params;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const int s = s_dist(rng), g = g_dist(rng);
            tokens = TokenMatrix(s, g);
            for (double& v : tokens.data) v = unit(rng);
            params = PoolingParams::random_init(g, rng());
            for (double& v : params.attention_b) v = 0.1 * unit(rng);
            params.lambda_raw = unit(rng);
            if (detail::config_has_margin(tokens, params, 100.0 * cfg.step)) break;
        }
        std::vector<double> upstream(static_cast<std::size_t>(tokens.cols));
        for (double& v : upstream) v = unit(rng);

        const PoolingGradients grads = backward(tokens, params, upstream, cfg.variant);

        auto check_component = [&](double* slot, double analytic) {
            const double saved = *slot;
            *slot = saved + cfg.step;
            const double up = detail::pooling_loss(tokens, params, upstream, cfg.variant);
            *slot = saved - cfg.step;
            const double down = detail::pooling_loss(tokens, params, upstream, cfg.variant);
            *slot = saved;
            const double numeric = (up - down) / (2.0 * cfg.step);
            result.max_rel_error =
                std::max(result.max_rel_error, detail::fd_rel_error(analytic, numeric));
        };

        for (std::size_t i = 0; i < params.attention_w.size(); ++i)
            check_component(&params.attention_w[i], grads.attention_w[i]);
        for (std::size_t i = 0; i < params.attention_b.size(); ++i)
            check_component(&params.attention_b[i], grads.attention_b[i]);
        for (std::size_t i = 0; i < params.score_w.size(); ++i)
            check_component(&params.score_w[i], grads.score_w[i]);
        check_component(&params.lambda_raw, grads.lambda_raw);
        for (std::size_t i = 0; i < tokens.data.size(); ++i)
            check_component(&tokens.data[i], grads.tokens[i]);

        ++result.configurations;
    }
    return result;
}

// ---------------------------------------------------------------------------
// toy trainer

struct ToySample {
    TokenMatrix tokens;
    std::vector<double> target;
};

struct TrainResult {
    PoolingParams params;
    std::vector<double> loss_curve;  // loss_curve[0] is the initial loss
};

/// Regression task that rewards real attention: the target is a softmax
/// blend of the tokens keyed on their first feature, which max pooling and
/// uniform weighting cannot express.
inline std::vector<ToySample> make_synthetic_pooling_task(int samples, int s, int g,
                                                          std::uint64_t seed,
                                                          double sharpness = 4.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<ToySample> data;
    data.reserve(static_cast<std::size_t>(samples));
    for (int n = 0; n < samples; ++n) {
        ToySample sample;
        sample.tokens = TokenMatrix(s, g);
        for (double& v : sample.tokens.data) v = unit(rng);
        std::vector<double> key(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) key[static_cast<std::size_t>(i)] =
            sharpness * sample.tokens.at(i, 0);
        const std::vector<double> beta = detail::softmax(key);
        sample.target = tap_pool(sample.tokens, beta);
        data.push_back(std::move(sample));
    }
    return data;
}

/// Plain full-batch gradient descent on mean squared error between g and the
/// target. Deterministic given the seed.
inline TrainResult train_toy(const std::vector<ToySample>& data, PoolingVariant variant,
                             int epochs, double step_size, std::uint64_t seed) {
    if (data.empty()) throw usage_error("train_toy: empty dataset");
    const int g = data.front().tokens.cols;
    for (const ToySample& sample : data)
        if (sample.tokens.cols != g || static_cast<int>(sample.target.size()) != g)
            throw usage_error("train_toy: inconsistent feature width across dataset");

    TrainResult result;
    result.params = PoolingParams::random_init(g, seed);
    result.loss_curve.reserve(static_cast<std::size_t>(epochs) + 1);

    const double inv_n = 1.0 / static_cast<double>(data.size());
    auto batch_loss = [&](const PoolingParams& params) {
        double loss = 0.0;
        for (const ToySample& sample : data) {
            const PoolingOutput out = forward(sample.tokens, params, variant);
            for (int j = 0; j < g; ++j) {
                const double e = out.g[static_cast<std::size_t>(j)] -
                                 sample.target[static_cast<std::size_t>(j)];
                loss += e * e / g;
            }
        }
        return loss * inv_n;
    };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        PoolingGradients total;
        total.attention_w.assign(static_cast<std::size_t>(g) * g, 0.0);
        total.attention_b.assign(static_cast<std::size_t>(g), 0.0);
        total.score_w.assign(static_cast<std::size_t>(g), 0.0);

        double loss = 0.0;
        for (const ToySample& sample : data) {
            const PoolingOutput out = forward(sample.tokens, result.params, variant);
            std::vector<double> upstream(static_cast<std::size_t>(g));
            for (int j = 0; j < g; ++j) {
                const double e = out.g[static_cast<std::size_t>(j)] -
                                 sample.target[static_cast<std::size_t>(j)];
                loss += e * e / g;
                upstream[static_cast<std::size_t>(j)] = 2.0 * e / g;
            }
            total.add_scaled(backward(sample.tokens, result.params, upstream, variant), 1.0);
        }
        loss *= inv_n;
        if (!std::isfinite(loss))
            throw error("train_toy: loss diverged at epoch " + std::to_string(epoch));
        result.loss_curve.push_back(loss);

        const double rate = step_size * inv_n;
        for (std::size_t i = 0; i < total.attention_w.size(); ++i)
            result.params.attention_w[i] -= rate * total.attention_w[i];
        for (std::size_t i = 0; i < total.attention_b.size(); ++i)
            result.params.attention_b[i] -= rate * total.attention_b[i];
        for (std::size_t i = 0; i < total.score_w.size(); ++i)
            result.params.score_w[i] -= rate * total.score_w[i];
        result.params.lambda_raw -= rate * total.lambda_raw;
    }
    result.loss_curve.push_back(batch_loss(result.params));
    return result;
}

// ---------------------------------------------------------------------------
// serialization

namespace detail {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// CSV with one token per row, G comma-separated columns.
inline TokenMatrix load_token_csv(std::istream& is) {
    TokenMatrix tokens;
    std::string line;
    long row = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
            } catch (const std::exception&) {
                throw parse_error("tokens: non-numeric value '" + field + "'", row);
            }
        }
        if (values.empty()) continue;
        if (!rows.empty() && values.size() != rows.front().size())
            throw parse_error("tokens: inconsistent column count", row);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw error("tokens: no rows");
    tokens = TokenMatrix(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < tokens.rows; ++i)
        for (int j = 0; j < tokens.cols; ++j)
            tokens.at(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return tokens;
}

inline void save_token_csv(const TokenMatrix& tokens, std::ostream& os) {
    for (int i = 0; i < tokens.rows; ++i) {
        for (int j = 0; j < tokens.cols; ++j)
            os << (j ? "," : "") << detail::format_full(tokens.at(i, j));
        os << '\n';
    }
}

/// Flat text: G rows of W, then b, then w, then lambda_raw on its own line.
inline void save_params(const PoolingParams& params, std::ostream& os) {
    const int g = params.width;
    for (int r = 0; r < g; ++r) {
        for (int c = 0; c < g; ++c)
            os << (c ? " " : "")
               << detail::format_full(params.attention_w[static_cast<std::size_t>(r) * g + c]);
        os << '\n';
    }
    for (int i = 0; i < g; ++i)
        os << (i ? " " : "") << detail::format_full(params.attention_b[static_cast<std::size_t>(i)]);
    os << '\n';
    for (int i = 0; i < g; ++i)
        os << (i ? " " : "") << detail::format_full(params.score_w[static_cast<std::size_t>(i)]);
    os << '\n';
    os << detail::format_full(params.lambda_raw) << '\n';
}

inline PoolingParams load_params(std::istream& is) {
    std::vector<std::vector<double>> lines;
    std::string line;
    long no = 0;
    while (std::getline(is, line)) {
        ++no;
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        double v;
        while (ss >> v) values.push_back(v);
        if (values.empty()) throw parse_error("params: non-numeric line", no);
        lines.push_back(std::move(values));
    }
    if (lines.size() < 4) throw error("params: too few lines");
    const std::size_t g = lines.front().size();
    if (lines.size() != g + 3) throw error("params: expected G rows of W plus b, w, lambda_raw");
    PoolingParams params;
    params.width = static_cast<int>(g);
    params.attention_w.reserve(g * g);
    for (std::size_t r = 0; r < g; ++r) {
        if (lines[r].size() != g) throw error("params: W row width mismatch");
        for (double v : lines[r]) params.attention_w.push_back(v);
    }
    if (lines[g].size() != g || lines[g + 1].size() != g || lines[g + 2].size() != 1)
        throw error("params: malformed b, w, or lambda_raw line");
    params.attention_b = lines[g];
    params.score_w = lines[g + 1];
    params.lambda_raw = lines[g + 2][0];
    return params;
}

inline void save_loss_curve(const std::vector<double>& curve, std::ostream& os) {
    os << "epoch,loss\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << i << ',' << detail::format_full(curve[i]) << '\n';
}

}  // namespace voxpyr
