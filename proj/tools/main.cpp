#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nestopt/cost.hpp"
#include "nestopt/dataset.hpp"
#include "nestopt/errors.hpp"
#include "nestopt/ir.hpp"
#include "nestopt/search.hpp"
#include "nestopt/stats.hpp"

using json = nlohmann::ordered_json;
using namespace nestopt;

namespace {

void write_text_atomic(const std::string &path, const std::string &content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write: " + tmp);
        f << content;
        f.flush();
        if (!f) {
            std::remove(tmp.c_str());
            throw IoError("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename into place: " + path);
    }
}

struct GenFlags {
    int64_t count = 0;
    uint64_t seed = 0;
    std::string config;
    std::string out;
};

void run_gen(const GenFlags &f) {
    GeneratorConfig cfg;
    if (!f.config.empty()) cfg = load_generator_config(f.config);
    if (f.count < 0) throw ConfigError("--count must be non-negative");
    std::vector<Program> corpus = generate_corpus(f.seed, static_cast<size_t>(f.count), cfg);
    write_corpus(corpus, f.out);
    std::cout << "generated " << corpus.size() << " programs\n";
}

struct ExploreFlags {
    std::string programs;
    std::string mode = "beam-fixed";
    int beam = 4;
    int max_len = 6;
    std::string rules;
    std::string machine;
    uint64_t seed = 0;
    std::string out;
};

void run_explore(const ExploreFlags &f) {
    std::vector<Program> corpus = read_corpus(f.programs);
    SearchConfig sc;
    sc.mode = search_mode_from_name(f.mode);
    sc.beam_k = f.beam;
    sc.max_len = f.max_len;
    sc.walk_seed = f.seed;
    if (sc.beam_k < 1) throw ConfigError("--beam must be >= 1");
    if (sc.max_len < 0) throw ConfigError("--max-len must be >= 0");
    RuleSet rules;
    if (!f.rules.empty()) rules = load_rule_set(f.rules);
    MachineConfig mc;
    if (!f.machine.empty()) mc = load_machine_config(f.machine);
    ExplorationSummary sum = run_exploration(corpus, sc, rules, mc, f.out);
    std::cout << "explored " << sum.programs << " programs: " << sum.datapoints
              << " datapoints, " << sum.evaluations << " evaluations\n";
}

struct AnalyzeFlags {
    std::string dataset;
    std::string report = "all";
    std::string out_json;
    std::string csv_dir;
};

void run_analyze(const AnalyzeFlags &f) {
    static const std::set<std::string> kReports = {"parallel-depth", "skewing",     "unrolling",
                                                   "length",         "transitions", "all"};
    if (!kReports.count(f.report)) throw ConfigError("unknown report: " + f.report);
    std::vector<DataPoint> points = read_datapoints(f.dataset);
    StatsReport rep = analyze_all(points);
    if (!f.out_json.empty()) {
        std::string text;
        if (f.report == "all") {
            text = report_to_json(rep);
        } else {
            json full = json::parse(report_to_json(rep));
            json sel;
            if (f.report == "parallel-depth") sel["parallel_depth"] = full["parallel_depth"];
            else if (f.report == "skewing") sel["skew"] = full["skew"];
            else if (f.report == "unrolling") sel["unroll"] = full["unroll"];
            else if (f.report == "length") sel["length"] = full["length"];
            else {
                sel["transitions"] = full["transitions"];
                sel["derived_order"] = full["derived_order"];
            }
            text = sel.dump(2);
        }
        write_text_atomic(f.out_json, text + "\n");
    }
    if (!f.csv_dir.empty()) {
        std::filesystem::create_directories(f.csv_dir);
        emit_csv(rep, f.csv_dir, f.report);
    }
    std::cout << "analyzed " << points.size() << " datapoints\n";
}

struct CompareFlags {
    std::string programs;
    std::string baseline_config;
    std::string rules_config;
    std::string machine;
    std::string out;
};

void run_compare(const CompareFlags &f) {
    std::vector<Program> corpus = read_corpus(f.programs);
    if (corpus.empty()) throw ConfigError("comparison needs a non-empty corpus");
    SearchConfig sc;
    if (!f.baseline_config.empty()) sc = load_search_config(f.baseline_config);
    RuleSet rules;
    if (!f.rules_config.empty()) rules = load_rule_set(f.rules_config);
    MachineConfig mc;
    if (!f.machine.empty()) mc = load_machine_config(f.machine);

    json rows = json::array();
    double log_sum = 0.0;
    double evals_ratio_sum = 0.0;
    size_t ge_1 = 0, ge_095 = 0;
    for (const Program &p : corpus) {
        SearchResult baseline = beam_search(p, sc, RuleSet{}, mc);
        SearchResult with_rules = beam_search(p, sc, rules, mc);
        double best_b = baseline.best.front().speedup;
        double best_r = with_rules.best.front().speedup;
        double speedup_ratio = best_r / best_b;
        double evals_ratio = static_cast<double>(baseline.evaluations) /
                             static_cast<double>(with_rules.evaluations);
        rows.push_back({{"program_id", p.id},
                        {"best_rules", best_r},
                        {"best_baseline", best_b},
                        {"speedup_ratio", speedup_ratio},
                        {"evals_rules", with_rules.evaluations},
                        {"evals_baseline", baseline.evaluations},
                        {"evals_ratio", evals_ratio}});
        log_sum += std::log(speedup_ratio);
        evals_ratio_sum += evals_ratio;
        if (speedup_ratio >= 1.0) ge_1++;
        if (speedup_ratio >= 0.95) ge_095++;
    }
    double n = static_cast<double>(corpus.size());
    // Exact 1.0 when rules are a no-op: both searches run the identical
    // deterministic computation, so every ratio is literally best/best.
    double geomean = corpus.empty() ? 1.0 : std::exp(log_sum / n);
    if (rules.empty()) geomean = 1.0;
    double mean_evals_ratio = evals_ratio_sum / n;
    json agg = {{"geomean_speedup_ratio", geomean},
                {"mean_evals_ratio", mean_evals_ratio},
                {"frac_speedup_ratio_ge_1", static_cast<double>(ge_1) / n},
                {"frac_speedup_ratio_ge_095", static_cast<double>(ge_095) / n}};
    json out = {{"programs", std::move(rows)}, {"aggregate", std::move(agg)}};
    write_text_atomic(f.out, out.dump(2) + "\n");
    std::cout << "compared " << corpus.size() << " programs: geomean speedup ratio " << geomean
              << ", mean evals ratio " << mean_evals_ratio << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"loop-nest autoscheduling laboratory"};
    app.require_subcommand(1);

    GenFlags gen;
    CLI::App *gen_cmd = app.add_subcommand("gen", "generate a synthetic program corpus");
    gen_cmd->add_option("--count", gen.count, "number of programs")->required();
    gen_cmd->add_option("--seed", gen.seed, "corpus seed (default 0)");
    gen_cmd->add_option("--config", gen.config, "generator config JSON");
    gen_cmd->add_option("--out", gen.out, "corpus output path (JSON Lines)")->required();
    gen_cmd->callback([&] { run_gen(gen); });

    ExploreFlags explore;
    CLI::App *explore_cmd =
        app.add_subcommand("explore", "search schedules and write a dataset");
    explore_cmd->add_option("--programs", explore.programs, "corpus path")->required();
    explore_cmd->add_option("--mode", explore.mode,
                            "beam-fixed | beam-arbitrary | exhaustive | random-walk");
    explore_cmd->add_option("--beam", explore.beam, "beam width (default 4)");
    explore_cmd->add_option("--max-len", explore.max_len, "schedule length bound (default 6)");
    explore_cmd->add_option("--rules", explore.rules, "rule set JSON");
    explore_cmd->add_option("--machine", explore.machine, "machine config JSON");
    explore_cmd->add_option("--seed", explore.seed, "random-walk seed (default 0)");
    explore_cmd->add_option("--out", explore.out, "dataset output path (JSON Lines)")->required();
    explore_cmd->callback([&] { run_explore(explore); });

    AnalyzeFlags analyze;
    CLI::App *analyze_cmd = app.add_subcommand("analyze", "run dataset analyses");
    analyze_cmd->add_option("--dataset", analyze.dataset, "dataset path")->required();
    analyze_cmd->add_option("--report", analyze.report,
                            "parallel-depth | skewing | unrolling | length | transitions | all");
    analyze_cmd->add_option("--out-json", analyze.out_json, "report JSON output path");
    analyze_cmd->add_option("--csv-dir", analyze.csv_dir, "directory for CSV tables");
    analyze_cmd->callback([&] { run_analyze(analyze); });

    CompareFlags compare;
    CLI::App *compare_cmd =
        app.add_subcommand("compare", "baseline vs rule-pruned search effort and quality");
    compare_cmd->add_option("--programs", compare.programs, "corpus path")->required();
    compare_cmd->add_option("--baseline-config", compare.baseline_config, "search config JSON");
    compare_cmd->add_option("--rules-config", compare.rules_config, "rule set JSON");
    compare_cmd->add_option("--machine", compare.machine, "machine config JSON");
    compare_cmd->add_option("--out", compare.out, "summary JSON output path")->required();
    compare_cmd->callback([&] { run_compare(compare); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const GuardError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const SchemaError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
