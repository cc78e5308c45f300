#include "firecast/model.hpp"

#include "firecast/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace firecast {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Mat apply_activation(const Mat& pre, Activation a) {
    switch (a) {
        case Activation::Sigmoid:
            return pre.unaryExpr([](double v) { return sigmoid(v); });
        case Activation::Relu:
            return pre.cwiseMax(0.0);
        case Activation::Tanh:
            return pre.unaryExpr([](double v) { return std::tanh(v); });
        case Activation::Identity:
            return pre;
    }
    throw ConfigError("unknown activation");
}

}  // namespace

Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw ConfigError("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    throw ConfigError("unknown activation");
}

void ModelConfig::validate() const {
    if (input_features != kFeatureCount) {
        throw ConfigError("input_features is fixed at " + std::to_string(kFeatureCount));
    }
    if (gcn_out < 1 || lstm_hidden < 1) throw ConfigError("widths must be >= 1");
    if (lstm_layers < 1 || lstm_layers > 2) throw ConfigError("lstm_layers must be 1 or 2");
    if (t_in < 1 || t_out < 1) throw ConfigError("t_in and t_out must be >= 1");
}

ParamLayout::ParamLayout(const ModelConfig& config) {
    std::size_t off = 0;
    auto take = [&off](std::size_t count) {
        const std::size_t at = off;
        off += count;
        return at;
    };
    const auto d = static_cast<std::size_t>(config.input_features);
    const auto k = static_cast<std::size_t>(config.gcn_out);
    const auto h = static_cast<std::size_t>(config.lstm_hidden);
    w_gcn = take(d * k);
    layers.resize(static_cast<std::size_t>(config.lstm_layers));
    for (int l = 0; l < config.lstm_layers; ++l) {
        const std::size_t in = static_cast<std::size_t>(config.lstm_input_width(l)) + h;
        auto& g = layers[static_cast<std::size_t>(l)];
        g.w_f = take(h * in);
        g.b_f = take(h);
        g.w_i = take(h * in);
        g.b_i = take(h);
        g.w_c = take(h * in);
        g.b_c = take(h);
        g.w_o = take(h * in);
        g.b_o = take(h);
    }
    w_out = take(static_cast<std::size_t>(config.t_out) * h);
    b_out = take(static_cast<std::size_t>(config.t_out));
    total = off;
}

ConstMatMap GcnLstmModel::w_gcn() const {
    const ParamLayout lay(config);
    return ConstMatMap(params.data() + lay.w_gcn, config.input_features, config.gcn_out);
}

LstmLayerParams GcnLstmModel::layer(int l) const {
    const ParamLayout lay(config);
    const auto& g = lay.layers[static_cast<std::size_t>(l)];
    const int h = config.lstm_hidden;
    const int in = config.lstm_input_width(l) + h;
    const double* p = params.data();
    return LstmLayerParams{ConstMatMap(p + g.w_f, h, in), ConstMatMap(p + g.w_i, h, in),
                           ConstMatMap(p + g.w_c, h, in), ConstMatMap(p + g.w_o, h, in),
                           ConstVecMap(p + g.b_f, h),     ConstVecMap(p + g.b_i, h),
                           ConstVecMap(p + g.b_c, h),     ConstVecMap(p + g.b_o, h)};
}

ConstMatMap GcnLstmModel::w_out() const {
    const ParamLayout lay(config);
    return ConstMatMap(params.data() + lay.w_out, config.t_out, config.lstm_hidden);
}

ConstVecMap GcnLstmModel::b_out() const {
    const ParamLayout lay(config);
    return ConstVecMap(params.data() + lay.b_out, config.t_out);
}

GcnLstmModel init_parameters(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    const ParamLayout lay(config);
    GcnLstmModel model;
    model.config = config;
    model.params = Vec::Zero(static_cast<Eigen::Index>(lay.total));
    Rng rng(seed);

    auto glorot = [&rng](double* dst, std::size_t count, int fan_in, int fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < count; ++i) dst[i] = rng.uniform(-bound, bound);
    };

    double* p = model.params.data();
    const auto d = static_cast<std::size_t>(config.input_features);
    const auto k = static_cast<std::size_t>(config.gcn_out);
    const auto h = static_cast<std::size_t>(config.lstm_hidden);
    glorot(p + lay.w_gcn, d * k, config.input_features, config.gcn_out);
    for (int l = 0; l < config.lstm_layers; ++l) {
        const auto& g = lay.layers[static_cast<std::size_t>(l)];
        const std::size_t in = static_cast<std::size_t>(config.lstm_input_width(l)) + h;
        const int fan_in = static_cast<int>(in);
        glorot(p + g.w_f, h * in, fan_in, config.lstm_hidden);
        glorot(p + g.w_i, h * in, fan_in, config.lstm_hidden);
        glorot(p + g.w_c, h * in, fan_in, config.lstm_hidden);
        glorot(p + g.w_o, h * in, fan_in, config.lstm_hidden);
        // Forget-gate bias starts open so early training keeps cell memory.
        VecMap(p + g.b_f, static_cast<Eigen::Index>(h)).setOnes();
    }
    glorot(p + lay.w_out, static_cast<std::size_t>(config.t_out) * h, config.lstm_hidden,
           config.t_out);
    return model;
}

Mat gcn_forward(const NormalizedAdjacency& a_hat, const Mat& x, const Mat& w_gcn,
                Activation activation) {
    if (x.rows() != a_hat.node_count) throw ShapeError("gcn_forward: node count mismatch");
    if (x.cols() != w_gcn.rows()) throw ShapeError("gcn_forward: feature width mismatch");
    const Mat mixed = a_hat.multiply(x);
    const Mat pre = mixed * w_gcn;
    return apply_activation(pre, activation);
}

std::pair<Vec, Vec> lstm_step(const Vec& z, const Vec& h_prev, const Vec& c_prev,
                              const LstmLayerParams& p) {
    const Eigen::Index in = z.size() + h_prev.size();
    if (p.w_f.cols() != in || h_prev.size() != p.w_f.rows() || c_prev.size() != p.w_f.rows()) {
        throw ShapeError("lstm_step: state widths do not match gate parameters");
    }
    Vec cat(in);
    cat << z, h_prev;
    const Vec f = (p.w_f * cat + p.b_f).unaryExpr([](double v) { return sigmoid(v); });
    const Vec i = (p.w_i * cat + p.b_i).unaryExpr([](double v) { return sigmoid(v); });
    const Vec g = (p.w_c * cat + p.b_c).unaryExpr([](double v) { return std::tanh(v); });
    const Vec c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    const Vec o = (p.w_o * cat + p.b_o).unaryExpr([](double v) { return sigmoid(v); });
    const Vec h = o.cwiseProduct(c.unaryExpr([](double v) { return std::tanh(v); }));
    return {h, c};
}

Mat forward_raw(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                const FeatureTensor& x, ForwardTape* tape) {
    const ModelConfig& cfg = model.config;
    if (x.nodes() != a_hat.node_count) throw ShapeError("forward: node count mismatch");
    if (x.steps() != cfg.t_in) throw ShapeError("forward: tensor steps do not match t_in");
    const int n = x.nodes();
    const int h = cfg.lstm_hidden;

    if (tape) {
        tape->gcn_mixed.clear();
        tape->gcn_pre.clear();
        tape->gcn_out.clear();
        tape->lstm.assign(static_cast<std::size_t>(cfg.lstm_layers), {});
    }

    const ConstMatMap w_gcn = model.w_gcn();
    std::vector<LstmLayerParams> layers;
    layers.reserve(static_cast<std::size_t>(cfg.lstm_layers));
    for (int l = 0; l < cfg.lstm_layers; ++l) layers.push_back(model.layer(l));

    std::vector<Mat> h_state(static_cast<std::size_t>(cfg.lstm_layers), Mat::Zero(n, h));
    std::vector<Mat> c_state(static_cast<std::size_t>(cfg.lstm_layers), Mat::Zero(n, h));

    for (int t = 0; t < cfg.t_in; ++t) {
        const Mat mixed = a_hat.multiply(x.step_matrix(t));
        const Mat pre = mixed * w_gcn;
        Mat z = apply_activation(pre, cfg.gcn_activation);
        if (tape) {
            tape->gcn_mixed.push_back(mixed);
            tape->gcn_pre.push_back(pre);
            tape->gcn_out.push_back(z);
        }
        for (int l = 0; l < cfg.lstm_layers; ++l) {
            const auto& p = layers[static_cast<std::size_t>(l)];
            const Mat& input = l == 0 ? z : h_state[static_cast<std::size_t>(l - 1)];
            Mat cat(n, input.cols() + h);
            cat << input, h_state[static_cast<std::size_t>(l)];
            Mat f = ((cat * p.w_f.transpose()).rowwise() + p.b_f.transpose())
                        .unaryExpr([](double v) { return sigmoid(v); });
            Mat i = ((cat * p.w_i.transpose()).rowwise() + p.b_i.transpose())
                        .unaryExpr([](double v) { return sigmoid(v); });
            Mat g = ((cat * p.w_c.transpose()).rowwise() + p.b_c.transpose())
                        .unaryExpr([](double v) { return std::tanh(v); });
            Mat c = f.cwiseProduct(c_state[static_cast<std::size_t>(l)]) + i.cwiseProduct(g);
            Mat o = ((cat * p.w_o.transpose()).rowwise() + p.b_o.transpose())
                        .unaryExpr([](double v) { return sigmoid(v); });
            Mat tanh_c = c.unaryExpr([](double v) { return std::tanh(v); });
            Mat h_new = o.cwiseProduct(tanh_c);
            if (tape) {
                tape->lstm[static_cast<std::size_t>(l)].push_back(
                    ForwardTape::LstmStep{f, i, g, o, c, tanh_c, h_new});
            }
            c_state[static_cast<std::size_t>(l)] = std::move(c);
            h_state[static_cast<std::size_t>(l)] = std::move(h_new);
        }
    }

    const Mat& h_last = h_state[static_cast<std::size_t>(cfg.lstm_layers - 1)];
    Mat pred = (h_last * model.w_out().transpose()).rowwise() + model.b_out().transpose();
    if (tape) tape->raw_pred = pred;
    return pred;
}

Mat forward(const GcnLstmModel& model, const NormalizedAdjacency& a_hat, const FeatureTensor& x) {
    return clamp01(forward_raw(model, a_hat, x));
}

void write_checkpoint(const std::filesystem::path& dir, const std::string& stem,
                      const GcnLstmModel& model) {
    nlohmann::ordered_json j;
    j["gcn_out"] = model.config.gcn_out;
    j["lstm_layers"] = model.config.lstm_layers;
    j["lstm_hidden"] = model.config.lstm_hidden;
    j["t_in"] = model.config.t_in;
    j["t_out"] = model.config.t_out;
    j["activation"] = activation_name(model.config.gcn_activation);
    j["param_count"] = model.params.size();
    write_text_file(dir / (stem + ".json"), j.dump(2) + "\n");
    write_f64_payload(dir / (stem + ".f64"), model.params.data(),
                      static_cast<std::size_t>(model.params.size()));
}

GcnLstmModel read_checkpoint(const std::filesystem::path& dir, const std::string& stem) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(read_text_file(dir / (stem + ".json")));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad checkpoint descriptor: " + std::string(e.what()));
    }
    GcnLstmModel model;
    try {
        model.config.gcn_out = j.at("gcn_out").get<int>();
        model.config.lstm_layers = j.at("lstm_layers").get<int>();
        model.config.lstm_hidden = j.at("lstm_hidden").get<int>();
        model.config.t_in = j.at("t_in").get<int>();
        model.config.t_out = j.at("t_out").get<int>();
        model.config.gcn_activation = activation_from_name(j.at("activation").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad checkpoint descriptor: " + std::string(e.what()));
    }
    model.config.validate();
    const auto payload = read_f64_payload(dir / (stem + ".f64"));
    const ParamLayout lay(model.config);
    if (payload.size() != lay.total) {
        throw IoError("checkpoint payload has " + std::to_string(payload.size()) +
                      " parameters, layout expects " + std::to_string(lay.total));
    }
    model.params = ConstVecMap(payload.data(), static_cast<Eigen::Index>(payload.size()));
    return model;
}

}  // namespace firecast
