#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "satprobe/cli.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

void add_analysis_flags(CLI::App& cmd, satprobe::cli::AnalyzeConfig& cfg) {
    cmd.add_option("log", cfg.log, "activation log (SATL)")->required();
    cmd.add_option("--threshold", cfg.options.threshold, "cumulative variance fraction delta")
        ->capture_default_str();
    cmd.add_option("--csv", cfg.csv, "CSV report path (default <log>.csv)");
    cmd.add_option("--json", cfg.json, "JSON report path (default <log>.json)");
    cmd.add_flag("--reset-per-window", cfg.options.reset_per_window,
                 "estimate each checkpoint from its own window only");
    cmd.add_option("--checkpoint-every", cfg.options.checkpoint_every,
                   "minimum samples per window before a step boundary closes it")
        ->capture_default_str();
    cmd.add_option("--tail-ratio", cfg.options.tail_ratio, "tail cut as a fraction of peak saturation")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    namespace cli = satprobe::cli;

    CLI::App app{"Layer saturation analysis for activation logs"};
    app.require_subcommand(1);

    cli::AnalyzeConfig analyze_cfg;
    auto* analyze = app.add_subcommand("analyze", "analyze a complete log and write reports");
    add_analysis_flags(*analyze, analyze_cfg);

    cli::WatchConfig watch_cfg;
    long long interval_ms = watch_cfg.interval.count();
    long long max_idle_ms = 0;
    auto* watch = app.add_subcommand("watch", "tail a growing log until interrupted");
    add_analysis_flags(*watch, watch_cfg.analyze);
    watch->add_option("--interval", interval_ms, "poll interval in milliseconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    watch->add_option("--max-idle", max_idle_ms, "stop after the log is idle this long (0 = never)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    cli::DemoConfig demo_cfg;
    std::string config_file;
    auto* demo = app.add_subcommand("demo", "train toy networks, log, analyze and report");
    auto* hidden = demo->add_option("--hidden", demo_cfg.hidden, "comma-separated hidden widths")->delimiter(',');
    auto* classes = demo->add_option("--classes", demo_cfg.train.classes, "number of synthetic classes");
    auto* epochs = demo->add_option("--epochs", demo_cfg.train.epochs, "training epochs");
    auto* seed = demo->add_option("--seed", demo_cfg.train.seed, "random seed");
    auto* batch = demo->add_option("--batch-size", demo_cfg.train.batch_size, "minibatch size");
    auto* lr = demo->add_option("--lr", demo_cfg.train.learning_rate, "learning rate");
    demo->add_option("--out", demo_cfg.out, "output directory")->capture_default_str();
    demo->add_option("--config", config_file, "trainer config file (key=value lines)");
    demo->add_option("--threshold", demo_cfg.options.threshold, "cumulative variance fraction delta");

    std::string validate_log;
    auto* validate = app.add_subcommand("validate", "check a log and print per-layer counts");
    validate->add_option("log", validate_log, "activation log (SATL)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }

    if (*analyze) {
        return cli::cmd_analyze(analyze_cfg, std::cout, std::cerr);
    }
    if (*watch) {
        watch_cfg.interval = std::chrono::milliseconds(interval_ms);
        watch_cfg.max_idle = std::chrono::milliseconds(max_idle_ms);
        std::signal(SIGINT, on_sigint);
        std::signal(SIGTERM, on_sigint);
        return cli::cmd_watch(watch_cfg, g_interrupted, std::cout, std::cerr);
    }
    if (*demo) {
        // Precedence: defaults, then SATPROBE_PRECISION, then --config, then flags.
        satprobe::toynet::TrainConfig flags = demo_cfg.train;
        demo_cfg.train = satprobe::toynet::TrainConfig{};
        try {
            if (const char* p = std::getenv("SATPROBE_PRECISION"); p != nullptr && *p != '\0') {
                satprobe::toynet::set_config_value(demo_cfg.train, "precision", p);
            }
            if (!config_file.empty()) {
                std::ifstream in(config_file);
                if (!in) {
                    std::cerr << "error: cannot open config file " << config_file << '\n';
                    return cli::kConfigError;
                }
                satprobe::toynet::apply_config(demo_cfg.train, in);
            }
        } catch (const satprobe::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cli::kConfigError;
        }
        if (*classes) demo_cfg.train.classes = flags.classes;
        if (*epochs) demo_cfg.train.epochs = flags.epochs;
        if (*seed) demo_cfg.train.seed = flags.seed;
        if (*batch) demo_cfg.train.batch_size = flags.batch_size;
        if (*lr) demo_cfg.train.learning_rate = flags.learning_rate;
        if (!*hidden) demo_cfg.hidden = {demo_cfg.train.hidden};
        return cli::cmd_demo(demo_cfg, std::cout, std::cerr);
    }
    return cli::cmd_validate(validate_log, std::cout, std::cerr);
}
