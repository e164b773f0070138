// Command-line benchmark harness: run the benchmark grid, aggregate ranks,
// and render plots from a records.csv file.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "spce/spce.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sparse-PCE benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", in_path, mode = "same-ed";
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto* run_cmd = app.add_subcommand("run", "run the benchmark grid");
    run_cmd->add_option("--config", config_path, "config JSON file")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->required();
    run_cmd->add_option("--jobs", jobs, "parallel cells (overrides config)");
    run_cmd->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* agg_cmd = app.add_subcommand("aggregate", "aggregate ranks from records.csv");
    agg_cmd->add_option("--in", in_path, "records.csv path")->required();
    agg_cmd->add_option("--mode", mode, "same-ed|paired")
        ->check(CLI::IsMember({"same-ed", "paired"}));

    auto* plot_cmd = app.add_subcommand("plot", "render SVG plots from records.csv");
    plot_cmd->add_option("--in", in_path, "records.csv path")->required();
    plot_cmd->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            std::ifstream f(config_path);
            if (!f) throw std::runtime_error("cannot open config " + config_path);
            nlohmann::json j;
            f >> j;
            auto config = spce::BenchConfig::from_json(j);
            if (jobs > 0) config.jobs = jobs;
            if (seed_set) config.master_seed = seed;
            std::filesystem::create_directories(out_dir);
            auto records = spce::run(config);
            spce::emit_outputs(records, out_dir);
            std::cout << "wrote " << records.size() << " records to " << out_dir
                      << "/records.csv\n";
        } else if (agg_cmd->parsed()) {
            auto records = spce::read_records_csv(in_path);
            auto m = mode == "paired" ? spce::AggregateMode::Paired : spce::AggregateMode::SameEd;
            auto tables = spce::aggregate_ranks(records, m);
            std::cout << spce::aggregates_to_json(tables, m).dump(2) << "\n";
        } else if (plot_cmd->parsed()) {
            auto records = spce::read_records_csv(in_path);
            std::filesystem::create_directories(out_dir);
            std::vector<std::string> models;
            for (const auto& r : records)
                if (std::find(models.begin(), models.end(), r.model) == models.end())
                    models.push_back(r.model);
            for (const auto& m : models)
                spce::write_boxplot_svg(records, m, out_dir + "/boxplot_" + m + ".svg");
            for (const auto& t : spce::aggregate_ranks(records, spce::AggregateMode::SameEd))
                spce::write_rank_svg(t, out_dir + "/ranks_" + t.split + ".svg");
            std::cout << "wrote plots to " << out_dir << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
