// Command implementations behind the xchain CLI.
//
// Each command parses its inputs (per-chain work fanned out over --jobs
// threads), writes its report files under --out, prints a short summary to
// stdout, and records a manifest.json sufficient to reproduce the run.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace xchain::cli {

struct GlobalOptions {
    unsigned jobs = 1;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json
};

int run_stats(const std::vector<std::string>& files, const GlobalOptions& g);
int run_venn(const std::vector<std::string>& files, const std::string& universe,
             const GlobalOptions& g);
int run_cluster(const std::vector<std::string>& files, const GlobalOptions& g);
int run_novelty(const std::vector<std::string>& files, size_t max_points,
                const GlobalOptions& g);
int run_impact(const std::string& source, const std::vector<std::string>& files,
               const GlobalOptions& g);
int run_combine(const std::string& name, const std::vector<std::string>& files,
                const std::string& compare_name,
                const std::vector<std::string>& compare_files, const GlobalOptions& g);
int run_generate(const std::string& scenario_file, std::optional<uint64_t> seed,
                 const GlobalOptions& g);

}  // namespace xchain::cli
