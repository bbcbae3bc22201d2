#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "curvlab/harness.hpp"
#include "curvlab/textio.hpp"

int main(int argc, char** argv) {
    CLI::App app{"curvlab: decision-boundary geometry experiments"};
    app.require_subcommand(1);

    struct Args {
        std::string config_path;
        std::string out_dir;
        std::string seed;
    };
    std::vector<std::pair<CLI::App*, Args>> subs;
    for (const auto& id : curvlab::experiment_ids()) {
        CLI::App* sub = app.add_subcommand(id, "run the '" + id + "' experiment");
        subs.emplace_back(sub, Args{});
        Args& args = subs.back().second;
        sub->add_option("--config", args.config_path, "flat key=value config file")
            ->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", args.seed, "root seed (overrides config)");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [sub, args] : subs) {
        if (!sub->parsed()) continue;
        try {
            curvlab::FlatConfig cfg = curvlab::FlatConfig::load(args.config_path);
            if (!args.seed.empty()) cfg.set("seed", args.seed);
            std::string out = !args.out_dir.empty() ? args.out_dir : cfg.get_or("out", "");
            if (out.empty())
                throw curvlab::ConfigError("no output directory: set 'out' or pass --out");
            cfg.set("out", out);
            const std::string summary =
                curvlab::run_experiment(sub->get_name(), cfg, out);
            std::cout << summary;
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 1;
}
