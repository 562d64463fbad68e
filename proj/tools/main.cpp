#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cross-chain address clustering and impact analysis"};
    app.require_subcommand(1);

    xchain::cli::GlobalOptions g;
    app.add_option("-j,--jobs", g.jobs, "worker threads for per-chain stages")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    app.add_option("-o,--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("-f,--format", g.format, "report file format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    std::vector<std::string> files;
    std::vector<std::string> compare_files;
    std::string universe;
    std::string source;
    std::string name = "combined";
    std::string compare_name = "baseline";
    std::string scenario_file;
    size_t max_points = 0;
    uint64_t seed_val = 0;

    CLI::App* stats = app.add_subcommand("stats", "per-chain summary table");
    stats->add_option("files", files, "chain files (jsonl)")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* venn = app.add_subcommand("venn", "address overlap between chains");
    venn->add_option("files", files, "chain files (jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    venn->add_option("--universe", universe, "restrict regions to one chain's addresses");

    CLI::App* cluster = app.add_subcommand("cluster", "per-chain address clustering");
    cluster->add_option("files", files, "chain files (jsonl)")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* novelty = app.add_subcommand("novelty", "address and cluster novelty series");
    novelty->add_option("files", files, "chain files (jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    novelty->add_option("--max-points", max_points,
                        "down-sample series to at most N points (0 = all)");

    CLI::App* impact = app.add_subcommand("impact",
                                          "cross-chain co-cluster graph and impact report");
    impact->add_option("--source", source, "source chain id")->required();
    impact->add_option("files", files, "chain files (jsonl), source included")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* combine = app.add_subcommand("combine",
                                           "merge chains into one clustering; optionally "
                                           "diff against a second combination");
    combine->add_option("--name", name, "label of the combination")->capture_default_str();
    combine->add_option("files", files, "member chain files (jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    combine->add_option("--compare-to", compare_files, "member files of the baseline combination")
        ->check(CLI::ExistingFile);
    combine->add_option("--compare-name", compare_name, "label of the baseline")
        ->capture_default_str();

    CLI::App* generate = app.add_subcommand("generate",
                                            "emit a deterministic synthetic scenario");
    generate->add_option("--scenario", scenario_file, "scenario JSON file")
        ->check(CLI::ExistingFile);
    CLI::Option* seed_opt = generate->add_option("--seed", seed_val, "override the scenario seed");

    for (CLI::App* sub : {stats, venn, cluster, novelty, impact, combine, generate})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (stats->parsed())
            return xchain::cli::run_stats(files, g);
        if (venn->parsed())
            return xchain::cli::run_venn(files, universe, g);
        if (cluster->parsed())
            return xchain::cli::run_cluster(files, g);
        if (novelty->parsed())
            return xchain::cli::run_novelty(files, max_points, g);
        if (impact->parsed())
            return xchain::cli::run_impact(source, files, g);
        if (combine->parsed())
            return xchain::cli::run_combine(name, files, compare_name, compare_files, g);
        if (generate->parsed()) {
            std::optional<uint64_t> seed;
            if (seed_opt->count() > 0)
                seed = seed_val;
            return xchain::cli::run_generate(scenario_file, seed, g);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
