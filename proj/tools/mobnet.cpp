#include "mobnet/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace mobnet;

struct Common {
    std::string config;
    std::string output_dir;
    unsigned threads = 0;
    bool threads_set = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required = true)
{
    auto* opt = sub->add_option("-c,--config", c.config, "run configuration (JSON)");
    if (config_required)
        opt->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", c.output_dir, "output directory (overrides config and MOBNET_OUTPUT_DIR)");
    sub->add_option_function<unsigned>(
           "-j,--threads", [&c](unsigned t) { c.threads = t, c.threads_set = true; },
           "worker threads (0 = hardware concurrency)")
        ->check(CLI::Range(0u, 1024u));
}

RunConfig run_config(const Common& c)
{
    auto cfg = load_config(c.config);
    if (!c.output_dir.empty())
        cfg.output_dir = fs::absolute(c.output_dir).lexically_normal().string();
    if (c.threads_set)
        cfg.threads = c.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Daily mobility networks from device location pings, analysed at macro, motif and micro scale"};
    app.set_version_flag("--version", std::string("mobnet ") + kVersion);
    app.require_subcommand(1);

    Common ingest, build, analyze, compare, report, synth;
    std::string scale;
    add_common(app.add_subcommand("ingest", "pings to stops and trips"), ingest);
    add_common(app.add_subcommand("build-network", "daily tract networks from trips"), build);
    auto* an = app.add_subcommand("analyze", "metrics at one scale");
    add_common(an, analyze);
    an->add_option("--scale", scale, "macro, motif or micro")
        ->required()
        ->check(CLI::IsMember({"macro", "motif", "micro"}));
    add_common(app.add_subcommand("compare", "closest-pair verdicts across sources"), compare);
    add_common(app.add_subcommand("report", "network size table"), report);
    add_common(app.add_subcommand("synth", "write a synthetic county with provider pings"), synth, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("synth")) {
            SynthConfig s;
            if (!synth.config.empty()) {
                const auto j = read_json_file(synth.config);
                s = parse_synth_config(j.contains("synth") ? j["synth"] : j);
            }
            cmd_synth(s, synth.output_dir.empty() ? fs::path("synth_out") : fs::path(synth.output_dir),
                      synth.threads, std::cerr);
        } else if (app.got_subcommand("ingest")) {
            cmd_ingest(run_config(ingest), std::cerr);
        } else if (app.got_subcommand("build-network")) {
            cmd_build_network(run_config(build), std::cerr);
        } else if (app.got_subcommand("analyze")) {
            cmd_analyze(run_config(analyze), parse_scale(scale), std::cerr);
        } else if (app.got_subcommand("compare")) {
            cmd_compare(run_config(compare), std::cerr);
        } else if (app.got_subcommand("report")) {
            cmd_report(run_config(report), std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
