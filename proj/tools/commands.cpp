#include "commands.hpp"

#include <atomic>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "xchain/chain_model.hpp"
#include "xchain/clustering.hpp"
#include "xchain/combination.hpp"
#include "xchain/crosschain.hpp"
#include "xchain/novelty.hpp"
#include "xchain/synthgen.hpp"

#ifndef XCHAIN_VERSION
#define XCHAIN_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace xchain::cli {

namespace {

void parallel_for(size_t n, unsigned jobs, const std::function<void(size_t)>& fn) {
    if (n == 0)
        return;
    unsigned workers =
        std::max(1u, static_cast<unsigned>(std::min<size_t>(jobs, n)));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mtx;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mtx);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

struct LoadedChain {
    std::string path;
    ChainSnapshot snap;
    std::vector<std::string> warnings;
};

std::vector<LoadedChain> load_chains(const std::vector<std::string>& files, unsigned jobs) {
    std::vector<LoadedChain> out(files.size());
    parallel_for(files.size(), jobs, [&](size_t i) {
        out[i].path = files[i];
        ChainId id = fs::path(files[i]).stem().string();
        out[i].snap = parse_chain_file(files[i], id, &out[i].warnings);
    });
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = i + 1; j < out.size(); ++j)
            if (out[i].snap.chain == out[j].snap.chain)
                throw std::runtime_error("duplicate chain id across inputs: " +
                                         out[i].snap.chain);
    return out;
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write: " + path);
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

void write_manifest(const GlobalOptions& g, const std::string& command,
                    ordered_json parameters, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    parameters["jobs"] = g.jobs;
    parameters["out"] = g.out_dir;
    parameters["format"] = g.format;
    ordered_json m;
    m["tool"] = "xchain";
    m["version"] = XCHAIN_VERSION;
    m["command"] = command;
    m["parameters"] = std::move(parameters);
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_text(out_path(g, "manifest.json"), m.dump(2) + "\n");
}

void print_warnings(const std::vector<LoadedChain>& chains) {
    size_t total = 0;
    for (const LoadedChain& c : chains)
        total += c.warnings.size();
    if (total == 0)
        return;
    std::cout << "\nwarnings (" << total << "):\n";
    for (const LoadedChain& c : chains)
        for (const std::string& w : c.warnings)
            std::cout << "  " << w << '\n';
}

std::vector<std::string> paths_of(const std::vector<LoadedChain>& chains) {
    std::vector<std::string> p;
    p.reserve(chains.size());
    for (const LoadedChain& c : chains)
        p.push_back(c.path);
    return p;
}

ordered_json series_json(const NoveltySeries& series, size_t max_points) {
    const std::vector<NoveltyPoint>& pts = series.points;
    size_t stride = 1;
    if (max_points > 0 && pts.size() > max_points)
        stride = (pts.size() + max_points - 1) / max_points;
    ordered_json arr = ordered_json::array();
    for (size_t i = 0; i < pts.size(); i += stride)
        arr.push_back({{"ordinal", pts[i].ordinal}, {"raw", pts[i].raw}, {"sma", pts[i].sma}});
    if (!pts.empty() && (pts.size() - 1) % stride != 0)
        arr.push_back({{"ordinal", pts.back().ordinal},
                       {"raw", pts.back().raw},
                       {"sma", pts.back().sma}});
    return arr;
}

ordered_json histogram_json(const SizeHistogram& h) {
    ordered_json bins = ordered_json::array();
    for (const SizeHistogramBin& b : h.bins) {
        ordered_json jb;
        jb["lo"] = b.lo;
        if (b.hi == UINT64_MAX)
            jb["hi"] = nullptr;
        else
            jb["hi"] = b.hi;
        jb["clusters"] = b.clusters;
        jb["coverage"] = b.coverage;
        bins.push_back(std::move(jb));
    }
    return bins;
}

template <class Fn>
std::string capture(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return std::move(out).str();
}

}  // namespace

int run_stats(const std::vector<std::string>& files, const GlobalOptions& g) {
    std::vector<LoadedChain> chains = load_chains(files, g.jobs);
    struct Row {
        ChainStats cs;
        PartitionStats ps;
    };
    std::vector<Row> rows(chains.size());
    parallel_for(chains.size(), g.jobs, [&](size_t i) {
        rows[i].cs = chain_stats(chains[i].snap);
        Partition p = cluster_stream(chains[i].snap);
        rows[i].ps = partition_stats(p);
    });

    static const char* kMetrics[] = {"n_txs", "n_outputs", "n_addresses", "n_clusters",
                                     "n_nontrivial"};
    auto value = [&](size_t m, size_t i) -> uint64_t {
        switch (m) {
            case 0: return rows[i].cs.n_txs;
            case 1: return rows[i].cs.n_outputs;
            case 2: return rows[i].cs.n_addresses;
            case 3: return rows[i].ps.n_clusters;
            default: return rows[i].ps.n_nontrivial;
        }
    };

    std::vector<size_t> width(chains.size());
    for (size_t i = 0; i < chains.size(); ++i) {
        width[i] = chains[i].snap.chain.size();
        for (size_t m = 0; m < 5; ++m)
            width[i] = std::max(width[i], std::to_string(value(m, i)).size());
    }
    std::cout << std::left << std::setw(14) << "metric";
    for (size_t i = 0; i < chains.size(); ++i)
        std::cout << "  " << std::right << std::setw(static_cast<int>(width[i]))
                  << chains[i].snap.chain;
    std::cout << '\n';
    for (size_t m = 0; m < 5; ++m) {
        std::cout << std::left << std::setw(14) << kMetrics[m];
        for (size_t i = 0; i < chains.size(); ++i)
            std::cout << "  " << std::right << std::setw(static_cast<int>(width[i]))
                      << value(m, i);
        std::cout << '\n';
    }

    std::string artifact;
    if (g.format == "csv") {
        std::ostringstream csv;
        csv << "metric";
        for (const LoadedChain& c : chains)
            csv << ',' << c.snap.chain;
        csv << '\n';
        for (size_t m = 0; m < 5; ++m) {
            csv << kMetrics[m];
            for (size_t i = 0; i < chains.size(); ++i)
                csv << ',' << value(m, i);
            csv << '\n';
        }
        artifact = out_path(g, "stats.csv");
        write_text(artifact, csv.str());
    } else {
        ordered_json j = ordered_json::array();
        for (size_t i = 0; i < chains.size(); ++i)
            j.push_back({{"chain", chains[i].snap.chain},
                         {"n_txs", rows[i].cs.n_txs},
                         {"n_outputs", rows[i].cs.n_outputs},
                         {"n_addresses", rows[i].cs.n_addresses},
                         {"n_clusters", rows[i].ps.n_clusters},
                         {"n_nontrivial", rows[i].ps.n_nontrivial}});
        artifact = out_path(g, "stats.json");
        write_text(artifact, j.dump(2) + "\n");
    }

    write_manifest(g, "stats", ordered_json::object(), paths_of(chains), {artifact});
    print_warnings(chains);
    return 0;
}

int run_venn(const std::vector<std::string>& files, const std::string& universe,
             const GlobalOptions& g) {
    std::vector<LoadedChain> chains = load_chains(files, g.jobs);
    std::vector<const ChainSnapshot*> ptrs;
    for (const LoadedChain& c : chains)
        ptrs.push_back(&c.snap);
    VennCounts venn = shared_address_counts(ptrs);

    if (!universe.empty()) {
        auto it = std::find(venn.chains.begin(), venn.chains.end(), universe);
        if (it == venn.chains.end())
            throw std::runtime_error("unknown chain id: " + universe);
        uint32_t bit = 1u << (it - venn.chains.begin());
        std::map<uint32_t, uint64_t> kept;
        for (const auto& [mask, count] : venn.regions)
            if (mask & bit)
                kept.emplace(mask, count);
        venn.regions = std::move(kept);
    }

    uint64_t total = 0;
    for (const auto& [mask, count] : venn.regions) {
        std::cout << venn.region_label(mask) << ": " << count << '\n';
        total += count;
    }
    std::cout << (universe.empty() ? "all regions" : "universe " + universe) << ": " << total
              << " addresses\n";

    std::string artifact;
    if (g.format == "csv") {
        artifact = out_path(g, "venn.csv");
        write_text(artifact, capture([&](std::ostream& o) { venn_to_csv(venn, o); }));
    } else {
        ordered_json j;
        j["chains"] = venn.chains;
        j["regions"] = ordered_json::array();
        for (const auto& [mask, count] : venn.regions)
            j["regions"].push_back({{"chains", venn.region_label(mask)}, {"count", count}});
        artifact = out_path(g, "venn.json");
        write_text(artifact, j.dump(2) + "\n");
    }

    ordered_json params;
    params["universe"] = universe;
    write_manifest(g, "venn", std::move(params), paths_of(chains), {artifact});
    print_warnings(chains);
    return 0;
}

int run_cluster(const std::vector<std::string>& files, const GlobalOptions& g) {
    std::vector<LoadedChain> chains = load_chains(files, g.jobs);
    std::vector<std::string> outputs(chains.size() * 2);
    std::vector<std::string> summary(chains.size());

    parallel_for(chains.size(), g.jobs, [&](size_t i) {
        const ChainId& chain = chains[i].snap.chain;
        Partition p = cluster_stream(chains[i].snap);
        PartitionStats st = partition_stats(p);
        std::vector<uint64_t> bins = default_size_bins();
        SizeHistogram hist = size_histogram(p, bins);

        if (g.format == "csv") {
            outputs[i * 2] = out_path(g, chain + "_clusters.csv");
            write_text(outputs[i * 2],
                       capture([&](std::ostream& o) { partition_to_csv(p, o); }));
            outputs[i * 2 + 1] = out_path(g, chain + "_cluster_sizes.csv");
            write_text(outputs[i * 2 + 1],
                       capture([&](std::ostream& o) { histogram_to_csv(hist, o); }));
        } else {
            ordered_json jc;
            jc["chain"] = chain;
            jc["clusters"] = ordered_json::array();
            for (const ClusterView& cv : clusters(p)) {
                ordered_json e;
                e["representative"] = cv.representative;
                e["members"] = cv.members;
                jc["clusters"].push_back(std::move(e));
            }
            outputs[i * 2] = out_path(g, chain + "_clusters.json");
            write_text(outputs[i * 2], jc.dump(2) + "\n");
            outputs[i * 2 + 1] = out_path(g, chain + "_cluster_sizes.json");
            write_text(outputs[i * 2 + 1], histogram_json(hist).dump(2) + "\n");
        }
        std::ostringstream line;
        line << chain << ": " << p.universe_size() << " addresses, " << st.n_clusters
             << " clusters (" << st.n_nontrivial << " non-trivial)";
        summary[i] = line.str();
    });

    for (const std::string& s : summary)
        std::cout << s << '\n';
    write_manifest(g, "cluster", ordered_json::object(), paths_of(chains), outputs);
    print_warnings(chains);
    return 0;
}

int run_novelty(const std::vector<std::string>& files, size_t max_points,
                const GlobalOptions& g) {
    std::vector<LoadedChain> chains = load_chains(files, g.jobs);
    std::vector<std::string> outputs(chains.size() * 2);
    std::vector<std::string> summary(chains.size());

    parallel_for(chains.size(), g.jobs, [&](size_t i) {
        const ChainId& chain = chains[i].snap.chain;
        NoveltySeries addr = sma(address_novelty(chains[i].snap));
        NoveltySeries clus = sma(cluster_novelty(chains[i].snap));

        const char* ext = g.format == "csv" ? ".csv" : ".json";
        outputs[i * 2] = out_path(g, chain + "_address_novelty" + ext);
        outputs[i * 2 + 1] = out_path(g, chain + "_cluster_novelty" + ext);
        if (g.format == "csv") {
            write_text(outputs[i * 2], capture([&](std::ostream& o) {
                           series_to_csv(addr, o, max_points);
                       }));
            write_text(outputs[i * 2 + 1], capture([&](std::ostream& o) {
                           series_to_csv(clus, o, max_points);
                       }));
        } else {
            write_text(outputs[i * 2], series_json(addr, max_points).dump(2) + "\n");
            write_text(outputs[i * 2 + 1], series_json(clus, max_points).dump(2) + "\n");
        }

        std::ostringstream line;
        line << chain << ": address points=" << addr.points.size()
             << " cluster points=" << clus.points.size();
        if (!addr.points.empty())
            line << " final address sma=" << addr.points.back().sma;
        summary[i] = line.str();
    });

    for (const std::string& s : summary)
        std::cout << s << '\n';
    ordered_json params;
    params["max_points"] = max_points;
    write_manifest(g, "novelty", std::move(params), paths_of(chains), outputs);
    print_warnings(chains);
    return 0;
}

int run_impact(const std::string& source, const std::vector<std::string>& files,
               const GlobalOptions& g) {
    std::vector<LoadedChain> chains = load_chains(files, g.jobs);
    std::vector<Partition> parts(chains.size());
    parallel_for(chains.size(), g.jobs,
                 [&](size_t i) { parts[i] = cluster_stream(chains[i].snap); });
    std::map<ChainId, const Partition*> pmap;
    for (size_t i = 0; i < chains.size(); ++i)
        pmap[chains[i].snap.chain] = &parts[i];
    if (!pmap.count(source))
        throw std::runtime_error("unknown chain id: " + source);

    ImpactReport rep = impact_report(pmap, source, {});
    CoClusterGraph graph = build_cocluster_graph(pmap);

    std::string report_path = out_path(g, "impact.json");
    write_text(report_path, capture([&](std::ostream& o) { impact_to_json(rep, o); }));
    std::string edges_path = out_path(g, "edges.csv");
    write_text(edges_path, capture([&](std::ostream& o) { edges_to_csv(graph, o); }));
    std::string dot_path = out_path(g, "cocluster.dot");
    write_text(dot_path, capture([&](std::ostream& o) { graph_to_dot(graph, o); }));

    for (const TargetImpact& t : rep.targets) {
        std::cout << source << " -> " << t.target << ": " << t.component_count
                  << " components (" << t.stars << " stars, " << t.non_stars
                  << " non-stars), " << t.impacted_clusters << "/" << t.target_cluster_total
                  << " clusters impacted\n";
    }
    std::cout << "multi-hop components: " << rep.multi_hop.size() << '\n';

    ordered_json params;
    params["source"] = source;
    write_manifest(g, "impact", std::move(params), paths_of(chains),
                   {report_path, edges_path, dot_path});
    print_warnings(chains);
    return 0;
}

int run_combine(const std::string& name, const std::vector<std::string>& files,
                const std::string& compare_name,
                const std::vector<std::string>& compare_files, const GlobalOptions& g) {
    const bool comparing = !compare_files.empty();
    if (comparing && name == compare_name)
        throw std::runtime_error("combination names must differ: " + name);

    std::vector<std::string> all = files;
    for (const std::string& f : compare_files)
        if (std::find(all.begin(), all.end(), f) == all.end())
            all.push_back(f);
    std::vector<LoadedChain> chains = load_chains(all, g.jobs);
    std::map<std::string, size_t> index_of;
    for (size_t i = 0; i < chains.size(); ++i)
        index_of[chains[i].path] = i;
    auto snaps_for = [&](const std::vector<std::string>& fl) {
        std::vector<const ChainSnapshot*> v;
        for (const std::string& f : fl)
            v.push_back(&chains[index_of.at(f)].snap);
        return v;
    };

    CombinationOrdering combo = combine(snaps_for(files), name);
    Partition part = cluster_stream(combo.sequence);

    // Per-member clusterings, for the improvement diagram.
    std::vector<Partition> member_parts(chains.size());
    parallel_for(chains.size(), g.jobs,
                 [&](size_t i) { member_parts[i] = cluster_stream(chains[i].snap); });

    std::vector<std::string> outputs;
    auto write_series = [&](const std::string& label, const NoveltySeries& s) {
        const char* ext = g.format == "csv" ? ".csv" : ".json";
        std::string path = out_path(g, label + ext);
        if (g.format == "csv")
            write_text(path, capture([&](std::ostream& o) { series_to_csv(s, o); }));
        else
            write_text(path, series_json(s, 0).dump(2) + "\n");
        outputs.push_back(path);
    };
    write_series(name + "_address_novelty", sma(address_novelty(combo.sequence)));
    write_series(name + "_cluster_novelty", sma(cluster_novelty(combo.sequence)));

    ordered_json summary;
    summary["name"] = name;
    summary["members"] = combo.members;
    summary["n_txs"] = combo.sequence.size();
    PartitionStats pst = partition_stats(part);
    summary["n_clusters"] = pst.n_clusters;
    summary["n_nontrivial"] = pst.n_nontrivial;

    std::cout << name << ": " << combo.members.size() << " chains, "
              << combo.sequence.size() << " txs, " << pst.n_clusters << " clusters\n";

    bool analysis_error = false;
    std::optional<CombinationOrdering> ccombo;
    std::optional<Partition> cpart;
    if (comparing) {
        ccombo = combine(snaps_for(compare_files), compare_name);
        cpart = cluster_stream(ccombo->sequence);
        write_series(compare_name + "_address_novelty", sma(address_novelty(ccombo->sequence)));
        write_series(compare_name + "_cluster_novelty", sma(cluster_novelty(ccombo->sequence)));

        bool improves = is_improvement(part, *cpart);
        summary["compare"] = compare_name;
        summary["improves"] = improves;
        if (improves) {
            ClusterDiff diff = cluster_diff(part, *cpart);
            summary["merged_clusters"] = diff.merged_clusters.size();
            if (g.format == "csv") {
                std::string dpath = out_path(g, "diff.csv");
                write_text(dpath, capture([&](std::ostream& o) { diff_to_csv(diff, o); }));
                outputs.push_back(dpath);
                std::string hpath = out_path(g, "diff_histogram.csv");
                write_text(hpath,
                           capture([&](std::ostream& o) { histogram_to_csv(diff.histogram, o); }));
                outputs.push_back(hpath);
            } else {
                ordered_json jd;
                jd["merged_clusters"] = ordered_json::array();
                for (const MergedCluster& mc : diff.merged_clusters)
                    jd["merged_clusters"].push_back({{"finer_rep", mc.finer_rep},
                                                     {"coarser_reps", mc.coarser_reps},
                                                     {"finer_size", mc.finer_size},
                                                     {"restricted_size", mc.restricted_size}});
                jd["histogram"] = histogram_json(diff.histogram);
                std::string dpath = out_path(g, "diff.json");
                write_text(dpath, jd.dump(2) + "\n");
                outputs.push_back(dpath);
            }
            std::cout << name << " improves " << compare_name << ": "
                      << diff.merged_clusters.size() << " coarser clusters merged\n";
        } else {
            analysis_error = true;
            std::cout << "analysis error: " << name << " does not improve " << compare_name
                      << "; diff skipped\n";
        }
    }

    // Improvement diagram over every clustering in this run.
    std::vector<LabeledPartition> labeled;
    for (size_t i = 0; i < chains.size(); ++i)
        labeled.push_back({chains[i].snap.chain, &member_parts[i]});
    labeled.push_back({name, &part});
    if (cpart)
        labeled.push_back({compare_name, &*cpart});
    HasseResult hasse = improvement_hasse(labeled);
    std::string hasse_path = out_path(g, "hasse.json");
    write_text(hasse_path, capture([&](std::ostream& o) { hasse_to_json(hasse, o); }));
    outputs.push_back(hasse_path);

    std::string summary_path = out_path(g, "combine_summary.json");
    write_text(summary_path, summary.dump(2) + "\n");
    outputs.push_back(summary_path);

    ordered_json params;
    params["name"] = name;
    params["files"] = files;
    if (comparing) {
        params["compare_name"] = compare_name;
        params["compare_files"] = compare_files;
    }
    write_manifest(g, "combine", std::move(params), paths_of(chains), outputs);
    print_warnings(chains);
    return analysis_error ? 2 : 0;
}

int run_generate(const std::string& scenario_file, std::optional<uint64_t> seed,
                 const GlobalOptions& g) {
    Scenario s = scenario_file.empty() ? Scenario{} : load_scenario(scenario_file);
    if (seed)
        s.seed = *seed;

    GenerationResult res = generate(s);

    std::vector<std::string> outputs;
    for (const ChainSnapshot& snap : res.snapshots) {
        std::string path = out_path(g, snap.chain + ".jsonl");
        write_chain_file(snap, path);
        outputs.push_back(path);
        std::cout << snap.chain << ": " << snap.txs.size() << " txs\n";
    }
    std::string truth_path = out_path(g, "ground_truth.json");
    write_text(truth_path,
               capture([&](std::ostream& o) { ground_truth_to_json(res.truth, o); }));
    outputs.push_back(truth_path);
    std::string scenario_path = out_path(g, "scenario.json");
    write_text(scenario_path, capture([&](std::ostream& o) { scenario_to_json(s, o); }));
    outputs.push_back(scenario_path);

    std::cout << "entities: " << res.truth.entity_addresses.size()
              << ", granted addresses: " << res.truth.granted.size() << '\n';

    ordered_json params;
    params["scenario"] = scenario_file.empty() ? "(defaults)" : scenario_file;
    params["seed"] = s.seed;
    std::vector<std::string> inputs;
    if (!scenario_file.empty())
        inputs.push_back(scenario_file);
    write_manifest(g, "generate", std::move(params), inputs, outputs);
    return 0;
}

}  // namespace xchain::cli
