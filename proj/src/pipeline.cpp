#include "firecast/pipeline.hpp"

#include "firecast/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace firecast {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& obj, const std::vector<std::string>& allowed,
                         const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
        }
    }
}

std::string role_name(MemberRole role) {
    switch (role) {
        case MemberRole::Train: return "train";
        case MemberRole::Validation: return "validation";
        case MemberRole::Test: return "test";
    }
    throw ConfigError("unknown member role");
}

MemberRole role_from_name(const std::string& name) {
    if (name == "train") return MemberRole::Train;
    if (name == "validation") return MemberRole::Validation;
    if (name == "test") return MemberRole::Test;
    throw ConfigError("unknown member role '" + name + "'");
}

void require_file(const std::filesystem::path& path, const std::string& producer) {
    if (!std::filesystem::exists(path)) {
        throw IoError("missing input " + path.string() + " (run `" + producer + "` first)");
    }
}

SnapshotSeries node_series_to_images(const Mat& series, const LandMask& mask,
                                     const std::string& variable) {
    SnapshotSeries out;
    out.spec = mask.spec();
    out.variable = variable;
    out.time_len = static_cast<int>(series.cols());
    out.data.resize(static_cast<std::size_t>(out.time_len) * out.spec.cell_count());
    for (int t = 0; t < out.time_len; ++t) {
        const Mat img = inflate(series.col(t), mask);
        for (int r = 0; r < out.spec.lat_count; ++r) {
            for (int c = 0; c < out.spec.lon_count; ++c) out.at(t, r, c) = img(r, c);
        }
    }
    return out;
}

NormalizedAdjacency load_adjacency(const RunConfig& config, const PreparedData& data) {
    if (config.model.identity_adjacency) {
        return NormalizedAdjacency::identity(data.mask.node_count());
    }
    const auto graph_path = config.paths.output_dir / "graph.txt";
    require_file(graph_path, "build-graph");
    const WildfireGraph g = read_graph(graph_path);
    if (g.node_count != data.mask.node_count()) {
        throw ShapeError("graph has " + std::to_string(g.node_count) + " nodes, mask has " +
                         std::to_string(data.mask.node_count()));
    }
    return normalize_adjacency(g);
}

std::string metrics_csv_row(const std::string& scope, const MetricReport& r) {
    std::ostringstream out;
    out << scope << ',' << format_g17(r.mse) << ',' << format_g17(r.rrmse) << ','
        << format_g17(r.ssim) << ',' << (r.psnr_infinite ? "inf" : format_g17(r.psnr)) << '\n';
    return out.str();
}

}  // namespace

void RunConfig::validate() const {
    synth.validate();
    if (!(graph.quantile > 0.0 && graph.quantile < 1.0)) {
        throw ConfigError("graph.quantile must be in (0, 1)");
    }
    if (model.widths.empty() || model.layers.empty()) {
        throw ConfigError("model.widths and model.layers must be non-empty");
    }
    for (int w : model.widths) {
        if (w < 1) throw ConfigError("model widths must be >= 1");
    }
    for (int l : model.layers) {
        if (l < 1 || l > 2) throw ConfigError("model layers must be 1 or 2");
    }
    if (model.t_in < 1 || model.t_out < 1) throw ConfigError("t_in and t_out must be >= 1");
    activation_from_name(model.activation);
    if (train.lr <= 0.0) throw ConfigError("train.lr must be positive");
    if (train.epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (train.batch < 1) throw ConfigError("train.batch must be >= 1");
    if (train.patience < 0) throw ConfigError("train.patience must be >= 0");
    if (!(train.validation_split > 0.0 && train.validation_split < 1.0)) {
        throw ConfigError("train.validation_split must be in (0, 1)");
    }
    if (louvain.gamma <= 0.0) throw ConfigError("louvain.gamma must be positive");
    if (ig.steps < 1) throw ConfigError("ig.steps must be >= 1");
    if (ig.sample < 1) throw ConfigError("ig.sample must be >= 1");
    for (int h : ig.horizons) {
        if (h < 1 || h > model.t_out) {
            throw ConfigError("ig.horizons entries must be within 1..t_out");
        }
    }
}

RunConfig default_config() { return RunConfig{}; }

RunConfig load_config(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    }

    RunConfig c;
    reject_unknown_keys(j, {"paths", "synth", "graph", "model", "train", "louvain", "ig"}, "root");

    bool data_dir_from_file = false;
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        reject_unknown_keys(p, {"data_dir", "output_dir"}, "paths");
        if (p.contains("data_dir")) {
            c.paths.data_dir = p["data_dir"].get<std::string>();
            data_dir_from_file = true;
        }
        if (p.contains("output_dir")) c.paths.output_dir = p["output_dir"].get<std::string>();
    }
    if (!data_dir_from_file) {
        if (const char* env = std::getenv("FIRECAST_DATA_DIR")) c.paths.data_dir = env;
    }

    if (j.contains("synth")) {
        const auto& s = j["synth"];
        reject_unknown_keys(
            s, {"lat", "lon", "months", "ensemble_count", "seed", "phase_offset", "noise"},
            "synth");
        if (s.contains("lat")) c.synth.grid.lat_count = s["lat"].get<int>();
        if (s.contains("lon")) c.synth.grid.lon_count = s["lon"].get<int>();
        if (s.contains("months")) c.synth.months = s["months"].get<int>();
        if (s.contains("ensemble_count")) c.synth.ensemble_count = s["ensemble_count"].get<int>();
        if (s.contains("seed")) c.synth.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("phase_offset")) c.synth.phase_offset = s["phase_offset"].get<int>();
        if (s.contains("noise")) c.synth.noise = s["noise"].get<double>();
    }

    if (j.contains("graph")) {
        const auto& g = j["graph"];
        reject_unknown_keys(g, {"quantile"}, "graph");
        if (g.contains("quantile")) c.graph.quantile = g["quantile"].get<double>();
    }

    if (j.contains("model")) {
        const auto& m = j["model"];
        reject_unknown_keys(
            m, {"widths", "layers", "t_in", "t_out", "activation", "identity_adjacency"}, "model");
        if (m.contains("widths")) c.model.widths = m["widths"].get<std::vector<int>>();
        if (m.contains("layers")) c.model.layers = m["layers"].get<std::vector<int>>();
        if (m.contains("t_in")) c.model.t_in = m["t_in"].get<int>();
        if (m.contains("t_out")) c.model.t_out = m["t_out"].get<int>();
        if (m.contains("activation")) c.model.activation = m["activation"].get<std::string>();
        if (m.contains("identity_adjacency")) {
            c.model.identity_adjacency = m["identity_adjacency"].get<bool>();
        }
    }

    if (j.contains("train")) {
        const auto& t = j["train"];
        reject_unknown_keys(t,
                            {"lr", "epochs", "batch", "patience", "seed", "clip_norm",
                             "checkpoint_every", "validation_split"},
                            "train");
        if (t.contains("lr")) c.train.lr = t["lr"].get<double>();
        if (t.contains("epochs")) c.train.epochs = t["epochs"].get<int>();
        if (t.contains("batch")) c.train.batch = t["batch"].get<int>();
        if (t.contains("patience")) c.train.patience = t["patience"].get<int>();
        if (t.contains("seed")) c.train.seed = t["seed"].get<std::uint64_t>();
        if (t.contains("clip_norm")) c.train.clip_norm = t["clip_norm"].get<double>();
        if (t.contains("checkpoint_every")) {
            c.train.checkpoint_every = t["checkpoint_every"].get<int>();
        }
        if (t.contains("validation_split")) {
            c.train.validation_split = t["validation_split"].get<double>();
        }
    }

    if (j.contains("louvain")) {
        const auto& l = j["louvain"];
        reject_unknown_keys(l, {"gamma", "seed"}, "louvain");
        if (l.contains("gamma")) c.louvain.gamma = l["gamma"].get<double>();
        if (l.contains("seed")) c.louvain.seed = l["seed"].get<std::uint64_t>();
    }

    if (j.contains("ig")) {
        const auto& g = j["ig"];
        reject_unknown_keys(g, {"steps", "sample", "horizons", "seed"}, "ig");
        if (g.contains("steps")) c.ig.steps = g["steps"].get<int>();
        if (g.contains("sample")) c.ig.sample = g["sample"].get<int>();
        if (g.contains("horizons")) c.ig.horizons = g["horizons"].get<std::vector<int>>();
        if (g.contains("seed")) c.ig.seed = g["seed"].get<std::uint64_t>();
    }

    c.validate();
    return c;
}

void override_seeds(RunConfig& config, std::uint64_t seed) {
    config.synth.seed = seed;
    config.train.seed = seed;
    config.louvain.seed = seed;
    config.ig.seed = seed;
}

const EnsembleMember& PreparedData::member_with_role(MemberRole role) const {
    for (const auto& m : members) {
        if (m.role == role) return m;
    }
    throw ConfigError("no ensemble member with role '" + role_name(role) + "'");
}

PreparedData prepare_data(const std::filesystem::path& data_dir) {
    require_file(data_dir / "mask.json", "synth");
    require_file(data_dir / "members.json", "synth");

    PreparedData data;
    data.mask = read_mask(data_dir, "mask");

    ordered_json members_meta;
    try {
        members_meta = ordered_json::parse(read_text_file(data_dir / "members.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad members.json: " + std::string(e.what()));
    }
    const int count = members_meta.at("count").get<int>();
    const auto roles = members_meta.at("roles").get<std::vector<std::string>>();
    if (static_cast<int>(roles.size()) != count) {
        throw IoError("members.json role list does not match count");
    }

    static const std::array<std::string, kClimateFeatureCount> climate_stems = {"T", "Hum", "R",
                                                                                "L"};
    for (int f = 0; f < kClimateFeatureCount; ++f) {
        const auto& stem = climate_stems[static_cast<std::size_t>(f)];
        require_file(data_dir / (stem + ".json"), "synth");
        SnapshotSeries series = read_series(data_dir, stem);
        if (series.spec != data.mask.spec()) {
            throw ShapeError("climate series " + stem + " grid does not match mask");
        }
        data.climate[static_cast<std::size_t>(f)] = mask_series(series, data.mask);
        data.months = series.time_len;
    }

    for (int z = 0; z < count; ++z) {
        const std::string stem = "P" + std::to_string(z + 1);
        require_file(data_dir / (stem + ".json"), "synth");
        SnapshotSeries series = read_series(data_dir, stem);
        if (series.spec != data.mask.spec()) {
            throw ShapeError("fire series " + stem + " grid does not match mask");
        }
        EnsembleMember member;
        member.id = z + 1;
        member.role = role_from_name(roles[static_cast<std::size_t>(z)]);
        member.fire = mask_series(series, data.mask);
        data.members.push_back(std::move(member));
    }

    // Normalization: climate statistics come from the full shared series;
    // fire statistics pool every training-side member (train + validation
    // roles). The test member reuses those parameters.
    for (int f = 0; f < kClimateFeatureCount; ++f) {
        Mat& series = data.climate[static_cast<std::size_t>(f)];
        data.norm[static_cast<std::size_t>(f)] = compute_normalization({&series});
        apply_normalization(series, data.norm[static_cast<std::size_t>(f)]);
    }
    std::vector<const Mat*> fire_pool;
    for (const auto& m : data.members) {
        if (m.role != MemberRole::Test) fire_pool.push_back(&m.fire);
    }
    if (fire_pool.empty()) throw ConfigError("no training-side ensemble members");
    data.norm[kBurntArea] = compute_normalization(fire_pool);
    for (auto& m : data.members) apply_normalization(m.fire, data.norm[kBurntArea]);
    return data;
}

WindowSets build_windows(const PreparedData& data, int t_in, int t_out, double validation_split) {
    WindowSets out;
    const int months = data.months;
    auto add_windows = [&](std::vector<TrainingWindow>& dst, const Mat& fire, int lo_start,
                           int hi_start) {
        for (int t_start = lo_start; t_start <= hi_start; ++t_start) {
            TrainingWindow w;
            w.input = build_feature_tensor(data.climate, fire, t_start, t_in);
            w.target = fire.middleCols(t_start, t_out);
            dst.push_back(std::move(w));
        }
    };
    for (const auto& m : data.members) {
        if (m.role == MemberRole::Train) {
            add_windows(out.training, m.fire, t_in, months - t_out);
        } else if (m.role == MemberRole::Validation) {
            const int split = static_cast<int>(
                std::floor(static_cast<double>(months) * (1.0 - validation_split)));
            // Head windows train; windows fully inside the tail validate.
            add_windows(out.training, m.fire, t_in, split - t_out);
            add_windows(out.validation, m.fire, split + t_in, months - t_out);
        }
    }
    return out;
}

void cmd_synth(const RunConfig& config) {
    const SynthData data = generate(config.synth);
    const auto& dir = config.paths.data_dir;
    std::filesystem::create_directories(dir);

    write_mask(dir, "mask", data.mask);
    static const std::array<std::string, kClimateFeatureCount> climate_stems = {"T", "Hum", "R",
                                                                                "L"};
    for (int f = 0; f < kClimateFeatureCount; ++f) {
        const auto& stem = climate_stems[static_cast<std::size_t>(f)];
        write_series(dir, stem,
                     node_series_to_images(data.climate[static_cast<std::size_t>(f)], data.mask,
                                           stem));
    }
    ordered_json meta;
    meta["count"] = static_cast<int>(data.members.size());
    std::vector<std::string> roles;
    for (const auto& m : data.members) {
        const std::string stem = "P" + std::to_string(m.id);
        write_series(dir, stem, node_series_to_images(m.fire, data.mask, stem));
        roles.push_back(role_name(m.role));
    }
    meta["roles"] = roles;
    write_text_file(dir / "members.json", meta.dump(2) + "\n");
    std::cout << "synth: " << data.mask.node_count() << " land nodes on "
              << config.synth.grid.lat_count << "x" << config.synth.grid.lon_count << ", "
              << config.synth.months << " months, " << data.members.size() << " members -> "
              << dir.string() << "\n";
}

void cmd_build_graph(const RunConfig& config, int threads) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    Mat pool;
    {
        // Correlations come from the training-side members' full burnt-area
        // series, concatenated along time.
        std::vector<const Mat*> fire;
        for (const auto& m : data.members) {
            if (m.role != MemberRole::Test) fire.push_back(&m.fire);
        }
        pool.resize(data.mask.node_count(),
                    static_cast<Eigen::Index>(fire.size()) * data.months);
        Eigen::Index col = 0;
        for (const Mat* f : fire) {
            pool.middleCols(col, f->cols()) = *f;
            col += f->cols();
        }
    }
    const double tau = compute_threshold(pool, config.graph.quantile, threads);
    const WildfireGraph g = build_adjacency(pool, tau, threads);

    std::filesystem::create_directories(config.paths.output_dir);
    write_graph(config.paths.output_dir / "graph.txt", g);
    std::cout << "build-graph: N=" << g.node_count << " tau=" << tau
              << " edges=" << g.edge_count() << " -> "
              << (config.paths.output_dir / "graph.txt").string() << "\n";
}

void cmd_train(const RunConfig& config, int threads) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    const NormalizedAdjacency a_hat = load_adjacency(config, data);
    const WindowSets windows =
        build_windows(data, config.model.t_in, config.model.t_out, config.train.validation_split);
    if (windows.training.empty()) throw ConfigError("train: no training windows available");

    const auto& out_dir = config.paths.output_dir;
    std::filesystem::create_directories(out_dir);

    ModelConfig base;
    base.t_in = config.model.t_in;
    base.t_out = config.model.t_out;
    base.gcn_activation = activation_from_name(config.model.activation);

    TrainConfig tc;
    tc.epochs = config.train.epochs;
    tc.batch_size = config.train.batch;
    tc.patience = config.train.patience;
    tc.lr = config.train.lr;
    tc.clip_norm = config.train.clip_norm;
    tc.seed = config.train.seed;
    tc.threads = threads;
    tc.checkpoint_every = config.train.checkpoint_every;
    tc.checkpoint_dir = out_dir;

    GridSearchResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    for (int layers : config.model.layers) {
        for (int width : config.model.widths) {
            ModelConfig candidate = base;
            candidate.lstm_layers = layers;
            candidate.gcn_out = width;
            candidate.lstm_hidden = width;
            TrainConfig candidate_tc = tc;
            candidate_tc.log_path = out_dir / ("train_log_w" + std::to_string(width) + "_l" +
                                               std::to_string(layers) + ".csv");
            const GcnLstmModel initial = init_parameters(candidate, tc.seed);
            const TrainResult tr = train(initial, a_hat, windows.training, windows.validation,
                                         candidate_tc);
            std::cout << "train: width=" << width << " layers=" << layers
                      << " best_val_mse=" << tr.best_val_mse << " best_epoch=" << tr.best_epoch
                      << " (" << tr.history.size() << " epochs)\n";
            result.candidates.push_back(GridCandidate{candidate, tr.best_val_mse, tr.best_epoch});
            if (tr.best_val_mse < result.best_val_mse) {
                result.best_val_mse = tr.best_val_mse;
                result.best_config = candidate;
                result.best_model = tr.best_model;
            }
        }
    }

    write_checkpoint(out_dir, "model", result.best_model);
    {
        std::ostringstream csv;
        csv << "width,layers,val_mse,best_epoch,selected\n";
        for (const auto& cand : result.candidates) {
            const bool selected = cand.config.gcn_out == result.best_config.gcn_out &&
                                  cand.config.lstm_layers == result.best_config.lstm_layers;
            csv << cand.config.gcn_out << ',' << cand.config.lstm_layers << ','
                << format_g17(cand.val_mse) << ',' << cand.best_epoch << ','
                << (selected ? 1 : 0) << '\n';
        }
        write_text_file(out_dir / "grid_results.csv", csv.str());
    }
    {
        ordered_json norm;
        for (int f = 0; f < kFeatureCount; ++f) {
            norm[kFeatureNames[static_cast<std::size_t>(f)]] = {
                {"min", data.norm[static_cast<std::size_t>(f)].min},
                {"max", data.norm[static_cast<std::size_t>(f)].max}};
        }
        write_text_file(out_dir / "normalization.json", norm.dump(2) + "\n");
    }
    std::cout << "train: selected width=" << result.best_config.gcn_out
              << " layers=" << result.best_config.lstm_layers
              << " val_mse=" << result.best_val_mse << "\n";
}

void cmd_predict(const RunConfig& config) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    const NormalizedAdjacency a_hat = load_adjacency(config, data);
    const auto& out_dir = config.paths.output_dir;
    require_file(out_dir / "model.json", "train");
    const GcnLstmModel model = read_checkpoint(out_dir, "model");

    const EnsembleMember& test = data.member_with_role(MemberRole::Test);
    const int t_in = model.config.t_in;
    const int years = (data.months - t_in) / kMonthsPerYear;
    if (years < 1) throw RangeError("predict: test series too short for one rollout year");

    const FeatureTensor seed = build_feature_tensor(data.climate, test.fire, t_in, t_in);
    RolloutPlan plan;
    plan.start = t_in;
    plan.years = years;
    const Mat pred = rollout(model, a_hat, data.climate, seed, plan);

    write_series(out_dir, "pred", node_series_to_images(pred, data.mask, "P_pred"));
    std::cout << "predict: " << plan.years << " years (" << pred.cols() << " months) from month "
              << plan.start << " -> " << (out_dir / "pred.f32").string() << "\n";
}

void cmd_eval(const RunConfig& config, bool land_only) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    const auto& out_dir = config.paths.output_dir;
    require_file(out_dir / "pred.json", "predict");
    const SnapshotSeries pred_images = read_series(out_dir, "pred");
    if (pred_images.spec != data.mask.spec()) {
        throw ShapeError("eval: prediction grid does not match mask");
    }

    const EnsembleMember& test = data.member_with_role(MemberRole::Test);
    const int t_in = data.months - pred_images.time_len;
    if (t_in < 0) throw RangeError("eval: prediction longer than the test series");

    // Predictions cover months [t_in, months) of the test member. Truth is
    // inflated the same way the predictions were dumped, so both sequences
    // carry the same ocean zeros; --land-only masks both back to node values.
    // Both sides are scored at float32 storage precision, so byte-identical
    // pred/true files compare exactly equal.
    Mat truth_nodes = test.fire.middleCols(t_in, pred_images.time_len);
    truth_nodes = truth_nodes.unaryExpr(
        [](double v) { return static_cast<double>(static_cast<float>(v)); });
    std::vector<double> pred_values, truth_values;
    if (land_only) {
        const Mat pred_nodes = mask_series(pred_images, data.mask);
        pred_values.assign(pred_nodes.data(), pred_nodes.data() + pred_nodes.size());
        truth_values.assign(truth_nodes.data(), truth_nodes.data() + truth_nodes.size());
    } else {
        const SnapshotSeries truth_images =
            node_series_to_images(truth_nodes, data.mask, "P_true");
        pred_values = pred_images.data;
        truth_values = truth_images.data;
    }

    const MetricReport overall = compute_metrics(pred_values, truth_values);
    std::vector<MetricReport> yearly;
    if (pred_images.time_len % kMonthsPerYear == 0) {
        yearly = yearly_report(pred_values, truth_values, pred_images.time_len, kMonthsPerYear);
    }

    std::ostringstream csv;
    csv << "scope,mse,rrmse,ssim,psnr\n" << metrics_csv_row("overall", overall);
    for (std::size_t y = 0; y < yearly.size(); ++y) {
        csv << metrics_csv_row("year" + std::to_string(y + 1), yearly[y]);
    }
    write_text_file(out_dir / "metrics.csv", csv.str());

    std::ostringstream table;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %14s\n", "Metric", "GCN-LSTM");
    table << buf;
    std::snprintf(buf, sizeof buf, "%-8s %14.6f\n", "MSE", overall.mse);
    table << buf;
    std::snprintf(buf, sizeof buf, "%-8s %14.6f\n", "RRMSE", overall.rrmse);
    table << buf;
    std::snprintf(buf, sizeof buf, "%-8s %14.6f\n", "SSIM", overall.ssim);
    table << buf;
    if (overall.psnr_infinite) {
        std::snprintf(buf, sizeof buf, "%-8s %14s\n", "PSNR", "inf");
    } else {
        std::snprintf(buf, sizeof buf, "%-8s %14.6f\n", "PSNR", overall.psnr);
    }
    table << buf;
    write_text_file(out_dir / "metrics.txt", table.str());
    std::cout << table.str();
}

void cmd_communities(const RunConfig& config) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    const auto& out_dir = config.paths.output_dir;
    require_file(out_dir / "graph.txt", "build-graph");
    const WildfireGraph g = read_graph(out_dir / "graph.txt");

    LouvainConfig lc;
    lc.gamma = config.louvain.gamma;
    lc.seed = config.louvain.seed;
    const LouvainResult result = louvain(g, lc);

    write_partition(out_dir / "partition.csv", result.partition);
    write_community_summary(out_dir / "community_summary.csv", g, result.partition);

    const Mat map = community_map(result.partition, data.mask, -1.0);
    SnapshotSeries map_series;
    map_series.spec = data.mask.spec();
    map_series.variable = "communities";
    map_series.time_len = 1;
    map_series.data.assign(map.data(), map.data() + map.size());
    write_series(out_dir, "community_map", map_series);

    std::cout << "communities: " << result.partition.community_count << " communities, Q="
              << result.q << "\n";
}

void cmd_attribute(const RunConfig& config) {
    const PreparedData data = prepare_data(config.paths.data_dir);
    const NormalizedAdjacency a_hat = load_adjacency(config, data);
    const auto& out_dir = config.paths.output_dir;
    require_file(out_dir / "model.json", "train");
    const GcnLstmModel model = read_checkpoint(out_dir, "model");

    const EnsembleMember& test = data.member_with_role(MemberRole::Test);
    std::vector<FeatureTensor> dataset;
    for (int t_start = model.config.t_in; t_start + model.config.t_out <= data.months;
         t_start += kMonthsPerYear) {
        dataset.push_back(build_feature_tensor(data.climate, test.fire, t_start,
                                               model.config.t_in));
    }
    if (dataset.empty()) throw RangeError("attribute: test series too short for one window");

    const int sample = std::min(config.ig.sample, data.mask.node_count());

    // Spatial maps for the two strongest hub nodes.
    std::vector<int> map_nodes;
    {
        WildfireGraph g;
        if (config.model.identity_adjacency) {
            g.node_count = data.mask.node_count();
        } else {
            g = read_graph(out_dir / "graph.txt");
        }
        std::vector<double> deg = g.weighted_degrees();
        std::vector<int> order(static_cast<std::size_t>(g.node_count));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
        });
        map_nodes.push_back(order[0]);
        if (g.node_count > 1) map_nodes.push_back(order[1]);
    }

    for (int horizon_month : config.ig.horizons) {
        const int horizon = horizon_month - 1;
        const FeatureImportance fi = feature_importance(model, a_hat, dataset, sample, horizon,
                                                        config.ig.steps, config.ig.seed);
        std::ostringstream csv;
        csv << "feature,min,q1,median,q3,max\n";
        for (int f = 0; f < kFeatureCount; ++f) {
            const auto& s = fi.stats[static_cast<std::size_t>(f)];
            csv << kFeatureNames[static_cast<std::size_t>(f)] << ',' << format_g17(s.min) << ','
                << format_g17(s.q1) << ',' << format_g17(s.median) << ',' << format_g17(s.q3)
                << ',' << format_g17(s.max) << '\n';
        }
        const std::string suffix = "_h" + std::to_string(horizon_month);
        write_text_file(out_dir / ("feature_importance" + suffix + ".csv"), csv.str());

        for (int node : map_nodes) {
            IgConfig ig_cfg;
            ig_cfg.steps = config.ig.steps;
            ig_cfg.target_node = node;
            ig_cfg.horizon = horizon;
            const AttributionMap g_map = integrated_gradients(model, a_hat, dataset.front(),
                                                              ig_cfg);
            std::ostringstream dump;
            dump << "node,feature,timestep,value\n";
            for (int i = 0; i < g_map.nodes(); ++i) {
                for (int f = 0; f < kFeatureCount; ++f) {
                    for (int k = 0; k < g_map.steps(); ++k) {
                        dump << i << ',' << kFeatureNames[static_cast<std::size_t>(f)] << ',' << k
                             << ',' << format_g17(g_map.at(i, f, k)) << '\n';
                    }
                }
            }
            const std::string stem = "node_attribution_n" + std::to_string(node) + suffix;
            write_text_file(out_dir / (stem + ".csv"), dump.str());

            Vec per_node = Vec::Zero(g_map.nodes());
            for (int i = 0; i < g_map.nodes(); ++i) {
                double total = 0.0;
                for (int f = 0; f < kFeatureCount; ++f) {
                    for (int k = 0; k < g_map.steps(); ++k) total += g_map.at(i, f, k);
                }
                per_node[i] = total;
            }
            SnapshotSeries map_series;
            map_series.spec = data.mask.spec();
            map_series.variable = stem;
            map_series.time_len = 1;
            const Mat img = inflate(per_node, data.mask);
            map_series.data.assign(img.data(), img.data() + img.size());
            write_series(out_dir, stem + "_map", map_series);
        }
        std::cout << "attribute: horizon " << horizon_month << " months, " << sample
                  << " sampled nodes, median humidity attribution "
                  << fi.stats[kHumidity].median << "\n";
    }
}

}  // namespace firecast
