#include "firecast/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace firecast {

namespace {

Mat activation_derivative(const Mat& pre, const Mat& out, Activation a) {
    switch (a) {
        case Activation::Sigmoid:
            return out.cwiseProduct((1.0 - out.array()).matrix());
        case Activation::Relu:
            return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::Tanh:
            return (1.0 - out.array().square()).matrix();
        case Activation::Identity:
            return Mat::Ones(pre.rows(), pre.cols());
    }
    throw ConfigError("unknown activation");
}

/// Mutable gradient views aligned with the canonical parameter layout.
struct GradViews {
    MatMap w_gcn;
    struct Layer {
        MatMap w_f, w_i, w_c, w_o;
        VecMap b_f, b_i, b_c, b_o;
    };
    std::vector<Layer> layers;
    MatMap w_out;
    VecMap b_out;

    GradViews(Vec& grad, const ModelConfig& cfg, const ParamLayout& lay)
        : w_gcn(grad.data() + lay.w_gcn, cfg.input_features, cfg.gcn_out),
          w_out(grad.data() + lay.w_out, cfg.t_out, cfg.lstm_hidden),
          b_out(grad.data() + lay.b_out, cfg.t_out) {
        const int h = cfg.lstm_hidden;
        for (int l = 0; l < cfg.lstm_layers; ++l) {
            const auto& g = lay.layers[static_cast<std::size_t>(l)];
            const int in = cfg.lstm_input_width(l) + h;
            double* p = grad.data();
            layers.push_back(Layer{MatMap(p + g.w_f, h, in), MatMap(p + g.w_i, h, in),
                                   MatMap(p + g.w_c, h, in), MatMap(p + g.w_o, h, in),
                                   VecMap(p + g.b_f, h), VecMap(p + g.b_i, h),
                                   VecMap(p + g.b_c, h), VecMap(p + g.b_o, h)});
        }
    }
};

/**
 * Shared reverse pass. `d_pred` seeds the head gradient: the loss residual
 * for training, an indicator for input attributions. Parameter gradients
 * accumulate into `param_grad` when given; input gradients into
 * `input_grad` (FeatureTensor-shaped flat buffer) when given.
 */
void reverse_pass(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                  const FeatureTensor& x, const ForwardTape& tape, const Mat& d_pred,
                  Vec* param_grad, std::vector<double>* input_grad) {
    const ModelConfig& cfg = model.config;
    const int n = x.nodes();
    const int h = cfg.lstm_hidden;
    const int layer_count = cfg.lstm_layers;
    const ParamLayout lay(cfg);

    std::optional<GradViews> gv;
    if (param_grad) {
        param_grad->setZero(static_cast<Eigen::Index>(lay.total));
        gv.emplace(*param_grad, cfg, lay);
    }

    std::vector<LstmLayerParams> layers;
    for (int l = 0; l < layer_count; ++l) layers.push_back(model.layer(l));

    const Mat& h_last = tape.lstm[static_cast<std::size_t>(layer_count - 1)].back().h;
    if (gv) {
        gv->w_out += d_pred.transpose() * h_last;
        gv->b_out += d_pred.colwise().sum().transpose();
    }
    const Mat d_h_head = d_pred * model.w_out();

    // Gradients flowing backward through the recurrence, one pair per layer.
    std::vector<Mat> dh_time(static_cast<std::size_t>(layer_count), Mat::Zero(n, h));
    std::vector<Mat> dc_time(static_cast<std::size_t>(layer_count), Mat::Zero(n, h));

    const ConstMatMap w_gcn = model.w_gcn();
    const Mat zero_state = Mat::Zero(n, h);

    for (int t = cfg.t_in - 1; t >= 0; --t) {
        Mat d_from_above;  // input gradient handed down from the layer above
        for (int l = layer_count - 1; l >= 0; --l) {
            const auto& step = tape.lstm[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
            const bool top = l == layer_count - 1;
            Mat dh = dh_time[static_cast<std::size_t>(l)];
            if (top) {
                if (t == cfg.t_in - 1) dh += d_h_head;
            } else {
                dh += d_from_above;
            }

            const Mat one_minus_tc2 = (1.0 - step.tanh_c.array().square()).matrix();
            Mat dc = dc_time[static_cast<std::size_t>(l)] +
                     dh.cwiseProduct(step.o).cwiseProduct(one_minus_tc2);
            const Mat d_o = dh.cwiseProduct(step.tanh_c);

            const bool first = t == 0;
            const Mat& c_prev =
                first ? zero_state
                      : tape.lstm[static_cast<std::size_t>(l)][static_cast<std::size_t>(t - 1)].c;
            const Mat& h_prev =
                first ? zero_state
                      : tape.lstm[static_cast<std::size_t>(l)][static_cast<std::size_t>(t - 1)].h;

            const Mat d_f = dc.cwiseProduct(c_prev);
            const Mat d_i = dc.cwiseProduct(step.g);
            const Mat d_g = dc.cwiseProduct(step.i);
            dc_time[static_cast<std::size_t>(l)] = dc.cwiseProduct(step.f);

            const Mat dpre_f =
                d_f.cwiseProduct(step.f).cwiseProduct((1.0 - step.f.array()).matrix());
            const Mat dpre_i =
                d_i.cwiseProduct(step.i).cwiseProduct((1.0 - step.i.array()).matrix());
            const Mat dpre_g = d_g.cwiseProduct((1.0 - step.g.array().square()).matrix());
            const Mat dpre_o =
                d_o.cwiseProduct(step.o).cwiseProduct((1.0 - step.o.array()).matrix());

            const Mat& input =
                l == 0 ? tape.gcn_out[static_cast<std::size_t>(t)]
                       : tape.lstm[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t)].h;
            Mat cat(n, input.cols() + h);
            cat << input, h_prev;

            if (gv) {
                auto& gl = gv->layers[static_cast<std::size_t>(l)];
                gl.w_f += dpre_f.transpose() * cat;
                gl.w_i += dpre_i.transpose() * cat;
                gl.w_c += dpre_g.transpose() * cat;
                gl.w_o += dpre_o.transpose() * cat;
                gl.b_f += dpre_f.colwise().sum().transpose();
                gl.b_i += dpre_i.colwise().sum().transpose();
                gl.b_c += dpre_g.colwise().sum().transpose();
                gl.b_o += dpre_o.colwise().sum().transpose();
            }

            const auto& p = layers[static_cast<std::size_t>(l)];
            const Mat dcat = dpre_f * p.w_f + dpre_i * p.w_i + dpre_g * p.w_c + dpre_o * p.w_o;
            dh_time[static_cast<std::size_t>(l)] = dcat.rightCols(h);
            d_from_above = dcat.leftCols(input.cols());  // dZ_t once l reaches 0
        }

        // Through the graph convolution: dZ -> dU -> (dW_gcn, dX).
        const Mat& d_z = d_from_above;
        const Mat d_u = d_z.cwiseProduct(activation_derivative(
            tape.gcn_pre[static_cast<std::size_t>(t)], tape.gcn_out[static_cast<std::size_t>(t)],
            cfg.gcn_activation));
        if (gv) {
            gv->w_gcn += tape.gcn_mixed[static_cast<std::size_t>(t)].transpose() * d_u;
        }
        if (input_grad) {
            const Mat d_mixed = d_u * w_gcn.transpose();
            const Mat d_x = a_hat.multiply(d_mixed);  // A_hat is symmetric
            for (int node = 0; node < n; ++node) {
                for (int f = 0; f < cfg.input_features; ++f) {
                    (*input_grad)[(static_cast<std::size_t>(node) * kFeatureCount +
                                   static_cast<std::size_t>(f)) *
                                      static_cast<std::size_t>(cfg.t_in) +
                                  static_cast<std::size_t>(t)] += d_x(node, f);
                }
            }
        }
    }

    if (param_grad) {
        for (Eigen::Index i = 0; i < param_grad->size(); ++i) {
            if (!std::isfinite((*param_grad)[i])) {
                throw NumericError("non-finite gradient at parameter index " + std::to_string(i));
            }
        }
    }
}

}  // namespace

double mse_loss(const Mat& pred, const Mat& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("mse_loss: shape mismatch");
    }
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double backward(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                const FeatureTensor& x, const Mat& target, Vec& grad) {
    ForwardTape tape;
    const Mat pred = forward_raw(model, a_hat, x, &tape);
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("backward: target shape mismatch");
    }
    const double loss = mse_loss(pred, target);
    const Mat d_pred = 2.0 * (pred - target) / static_cast<double>(pred.size());
    reverse_pass(model, a_hat, x, tape, d_pred, &grad, nullptr);
    return loss;
}

std::vector<double> input_gradient(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                   const FeatureTensor& x, int target_node, int horizon) {
    if (target_node < 0 || target_node >= x.nodes()) {
        throw RangeError("input_gradient: target node out of range");
    }
    if (horizon < 0 || horizon >= model.config.t_out) {
        throw RangeError("input_gradient: horizon out of range");
    }
    ForwardTape tape;
    forward_raw(model, a_hat, x, &tape);
    Mat d_pred = Mat::Zero(x.nodes(), model.config.t_out);
    d_pred(target_node, horizon) = 1.0;
    std::vector<double> grad(
        static_cast<std::size_t>(x.nodes()) * kFeatureCount * static_cast<std::size_t>(x.steps()),
        0.0);
    reverse_pass(model, a_hat, x, tape, d_pred, nullptr, &grad);
    return grad;
}

AdamState AdamState::create(Eigen::Index param_count, double lr) {
    AdamState s;
    s.m = Vec::Zero(param_count);
    s.v = Vec::Zero(param_count);
    s.lr = lr;
    return s;
}

void adam_step(Vec& params, const Vec& grad, AdamState& state) {
    if (params.size() != grad.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: length mismatch");
    }
    ++state.step;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double m_corr = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params.array() -= state.lr * (state.m.array() / m_corr) /
                      ((state.v.array() / v_corr).sqrt() + state.epsilon);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
}

TrainResult train(const GcnLstmModel& initial, const NormalizedAdjacency& a_hat,
                  const std::vector<TrainingWindow>& training,
                  const std::vector<TrainingWindow>& val, const TrainConfig& config) {
    config.validate();
    if (training.empty()) throw ConfigError("train: no training windows");

    GcnLstmModel model = initial;
    AdamState adam = AdamState::create(model.params.size(), config.lr);
    Rng rng(config.seed);

    std::ofstream log;
    if (!config.log_path.empty()) {
        log.open(config.log_path, std::ios::trunc);
        if (!log) throw IoError("cannot open training log " + config.log_path.string());
        log << "epoch,train_mse,val_mse,elapsed_ms\n";
    }

    auto validation_mse = [&](const GcnLstmModel& m) {
        double sum = 0.0;
        for (const auto& w : val) sum += mse_loss(forward_raw(m, a_hat, w.input), w.target);
        return sum / static_cast<double>(val.size());
    };

    TrainResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<std::size_t> order(training.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto start = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t batch_lo = 0; batch_lo < order.size();
             batch_lo += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t batch_hi =
                std::min(order.size(), batch_lo + static_cast<std::size_t>(config.batch_size));
            const std::size_t batch_n = batch_hi - batch_lo;

            // Windows run independently; the reduction happens in window
            // order afterwards, so the result is thread-count independent.
            std::vector<Vec> grads(batch_n);
            std::vector<double> losses(batch_n);
            parallel_for(batch_n, config.threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t b = lo; b < hi; ++b) {
                    const auto& w = training[order[batch_lo + b]];
                    losses[b] = backward(model, a_hat, w.input, w.target, grads[b]);
                }
            });
            Vec grad = Vec::Zero(model.params.size());
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < batch_n; ++b) {
                grad += grads[b];
                batch_loss += losses[b];
            }
            grad /= static_cast<double>(batch_n);
            epoch_loss_sum += batch_loss;

            if (config.clip_norm > 0.0) {
                const double norm = grad.norm();
                if (norm > config.clip_norm) grad *= config.clip_norm / norm;
            }
            adam_step(model.params, grad, adam);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = epoch_loss_sum / static_cast<double>(training.size());
        stats.val_mse = val.empty() ? stats.train_mse : validation_mse(model);
        stats.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
        result.history.push_back(stats);
        if (log) {
            log << epoch << ',' << stats.train_mse << ',' << stats.val_mse << ','
                << stats.elapsed_ms << '\n';
        }

        if (stats.val_mse < result.best_val_mse) {
            result.best_val_mse = stats.val_mse;
            result.best_epoch = epoch;
            result.best_model = model;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
        }

        if (config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 &&
            !config.checkpoint_dir.empty()) {
            write_checkpoint(config.checkpoint_dir, "checkpoint_" + std::to_string(epoch), model);
        }

        if (stale_epochs > config.patience) break;
    }
    return result;
}

GridSearchResult grid_search(const ModelConfig& base, const std::vector<int>& widths,
                             const std::vector<int>& layer_counts,
                             const NormalizedAdjacency& a_hat,
                             const std::vector<TrainingWindow>& training,
                             const std::vector<TrainingWindow>& val, const TrainConfig& config) {
    if (widths.empty() || layer_counts.empty()) throw ConfigError("grid_search: empty grid");
    GridSearchResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    for (int layers : layer_counts) {
        for (int width : widths) {
            ModelConfig candidate = base;
            candidate.lstm_layers = layers;
            candidate.gcn_out = width;
            candidate.lstm_hidden = width;
            const GcnLstmModel initial = init_parameters(candidate, config.seed);
            const TrainResult tr = train(initial, a_hat, training, val, config);
            result.candidates.push_back(GridCandidate{candidate, tr.best_val_mse, tr.best_epoch});
            if (tr.best_val_mse < result.best_val_mse) {
                result.best_val_mse = tr.best_val_mse;
                result.best_config = candidate;
                result.best_model = tr.best_model;
            }
        }
    }
    return result;
}

}  // namespace firecast
