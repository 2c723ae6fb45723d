#include "pdmp/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

enum ExitCode { kPass = 0, kEnvelopeFail = 1, kConfigError = 2, kNumericError = 3 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::optional<std::string> out;
    int workers = 1;
};

void add_options(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed (overrides the file)");
    sub->add_option("--replicas", opt.replicas, "replica count (overrides the file)")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "output directory (overrides the file)");
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
}

int run(pdmp::ExperimentKind kind, const Options& opt) {
    using namespace pdmp;
    try {
        ExperimentConfig config = load_config(opt.config);
        config.kind = kind;
        if (opt.seed) config.master_seed = *opt.seed;
        if (opt.replicas) config.replicas = *opt.replicas;
        if (opt.out) config.output_dir = *opt.out;
        const ExperimentResult result = run_experiment(config, opt.workers);
        for (const auto& line : result.summary) std::cout << line << "\n";
        std::cout << "artifacts: " << config.output_dir << "/manifest.json\n";
        return result.pass ? kPass : (kind == ExperimentKind::audit ? kConfigError : kEnvelopeFail);
    } catch (const AuditFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& line : e.lines()) std::cerr << "  " << line << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidAssumption& e) {
        std::cerr << "invalid assumption: " << e.what() << "\n";
        return kConfigError;
    } catch (const RangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kNumericError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate switched flows, couple replicas and check convergence envelopes"};
    app.require_subcommand(1);
    Options opt;
    const std::pair<const char*, pdmp::ExperimentKind> commands[] = {
        {"simulate", pdmp::ExperimentKind::simulate},
        {"couple", pdmp::ExperimentKind::couple},
        {"bounds", pdmp::ExperimentKind::bounds},
        {"full-check", pdmp::ExperimentKind::full_check},
        {"audit", pdmp::ExperimentKind::audit},
    };
    std::optional<pdmp::ExperimentKind> chosen;
    for (const auto& [name, kind] : commands) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        add_options(sub, opt);
        sub->callback([&chosen, kind = kind] { chosen = kind; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }
    return run(*chosen, opt);
}
