#include "firecast/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

firecast::RunConfig resolve_config(const std::string& config_path, long long seed) {
    firecast::RunConfig config = config_path.empty() ? firecast::default_config()
                                                     : firecast::load_config(config_path);
    if (seed >= 0) firecast::override_seeds(config, static_cast<std::uint64_t>(seed));
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-based global wildfire forecasting pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed = -1;
    int threads = 1;
    bool land_only = false;
    app.add_option("--config", config_path, "JSON run configuration (defaults apply if omitted)");
    app.add_option("--seed", seed, "Override every stage seed");
    app.add_option("--threads", threads, "Worker threads for correlation and batch passes")
        ->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "Generate the synthetic data archive");
    auto* build_graph =
        app.add_subcommand("build-graph", "Correlation graph from training burnt area");
    auto* train = app.add_subcommand("train", "Grid-search and train the forecaster");
    auto* predict = app.add_subcommand("predict", "Autoregressive rollout over the test member");
    auto* eval = app.add_subcommand("eval", "Score predictions against the test member");
    eval->add_flag("--land-only", land_only, "Score land nodes only instead of inflated images");
    auto* communities = app.add_subcommand("communities", "Louvain communities of the graph");
    auto* attribute = app.add_subcommand("attribute", "Integrated-gradients attributions");

    CLI11_PARSE(app, argc, argv);

    try {
        const firecast::RunConfig config = resolve_config(config_path, seed);
        if (synth->parsed()) firecast::cmd_synth(config);
        if (build_graph->parsed()) firecast::cmd_build_graph(config, threads);
        if (train->parsed()) firecast::cmd_train(config, threads);
        if (predict->parsed()) firecast::cmd_predict(config);
        if (eval->parsed()) firecast::cmd_eval(config, land_only);
        if (communities->parsed()) firecast::cmd_communities(config);
        if (attribute->parsed()) firecast::cmd_attribute(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
