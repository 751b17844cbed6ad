#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "onet/harness/config.hpp"
#include "onet/harness/experiments.hpp"

namespace {

void print_usage(std::ostream& out) {
    out << "usage:\n"
        << "  onet run <config-file>   run the experiment described by the config\n"
        << "  onet list                list available experiments\n"
        << "  onet check               fast self-test of the numerical core\n"
        << "\n"
        << "config files are flat key = value text; '#' starts a comment.\n"
        << "recognized keys: experiment (required), output_dir, seeds (comma separated),\n"
        << "plus the per-experiment parameters shown by `onet list`.\n"
        << "the ONET_OUT environment variable overrides output_dir.\n";
}

int cmd_list() {
    for (const auto& exp : onet::harness::experiment_registry()) {
        std::cout << exp.name << "\n    " << exp.summary << "\n";
        if (!exp.keys.empty()) {
            std::cout << "    parameters:";
            for (const auto& key : exp.keys) std::cout << ' ' << key;
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_run(const std::string& path) {
    onet::harness::ExperimentConfig cfg = onet::harness::parse_config_file(path);
    if (const char* out_override = std::getenv("ONET_OUT"); out_override && *out_override)
        cfg.output_dir = out_override;
    const int rc = onet::harness::run_experiment(cfg);
    if (rc == 0)
        std::cout << "experiment '" << cfg.experiment << "' passed; results in " << cfg.output_dir
                  << "\n";
    else
        std::cout << "experiment '" << cfg.experiment << "' FAILED its acceptance check; results in "
                  << cfg.output_dir << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc < 2) {
            print_usage(std::cerr);
            return 2;
        }
        const std::string cmd = argv[1];
        if (cmd == "list") return cmd_list();
        if (cmd == "check") return onet::harness::run_quick_check(std::cout);
        if (cmd == "run") {
            if (argc != 3) {
                std::cerr << "onet run: expected exactly one config file\n";
                return 2;
            }
            return cmd_run(argv[2]);
        }
        if (cmd == "-h" || cmd == "--help" || cmd == "help") {
            print_usage(std::cout);
            return 0;
        }
        std::cerr << "onet: unknown command '" << cmd << "'\n";
        print_usage(std::cerr);
        return 2;
    } catch (const onet::harness::ConfigError& e) {
        std::cerr << "onet: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "onet: error: " << e.what() << "\n";
        return 2;
    }
}
