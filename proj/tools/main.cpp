#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypertomo/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hypertomo: simulate and reconstruct hyperentangled pair characterization runs"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string stages_arg;
    std::string out_dir;

    CLI::App* run = app.add_subcommand("run", "execute a pipeline from a JSON config");
    run->add_option("config", config_path, "path to the run configuration JSON")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the RNG seed");
    CLI::Option* stages_opt =
        run->add_option("--stages", stages_arg, "comma-separated stage list override");
    CLI::Option* out_opt = run->add_option("--out", out_dir, "directory override for outputs");

    CLI11_PARSE(app, argc, argv);

    hypertomo::RunOverrides overrides;
    if (*seed_opt) overrides.seed = seed;
    if (*stages_opt) {
        std::vector<std::string> stages;
        std::size_t start = 0;
        while (start <= stages_arg.size()) {
            const std::size_t pos = stages_arg.find(',', start);
            const std::string item = stages_arg.substr(start, pos - start);
            if (!item.empty()) stages.push_back(item);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        overrides.stages = std::move(stages);
    }
    if (*out_opt) overrides.out_dir = out_dir;

    return hypertomo::run_pipeline(config_path, overrides);
}
