// splinegale gen|check|sweep|report --config <file> [--seed N] [--out DIR]
//
// Exit status is 0 iff no trial failed a hard bound or raised an error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "splinegale/harness.hpp"

namespace fs = std::filesystem;
using namespace splinegale;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
    out << text;
}

void print_summary(const std::string& label, const json& summary) {
    std::printf("%-24s trials=%s errors=%s failures=%s max_ratio=%s median_ratio=%s all_pass=%s\n", label.c_str(),
                summary.at("trials").dump().c_str(), summary.at("errors").dump().c_str(),
                summary.at("failures").dump().c_str(), summary.at("max_ratio").dump().c_str(),
                summary.at("median_ratio").dump().c_str(), summary.at("all_pass").dump().c_str());
}

int run_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
    json levels = json::array();
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, static_cast<std::uint64_t>(t));
        Rng rng(seed);
        json entry{{"trial", t}, {"seed", seed}};
        try {
            const auto g = gen_filtration(cfg, rng);
            entry["filtration"] = g.filtration;
            entry["gamma"] = g.gammas;
        } catch (const Error& e) {
            entry["error"] = e.what();
        }
        levels.push_back(entry);
    }
    const json doc{{"schema", 1}, {"config", config_to_json(cfg)}, {"filtrations", levels}};
    write_file(out_dir / "filtrations.json", doc.dump(2) + "\n");
    std::printf("wrote %s\n", (out_dir / "filtrations.json").string().c_str());
    return 0;
}

int run_one(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const CheckReport rep = run_check(cfg);
    write_file(out_dir / (cfg.check + ".json"), report_to_json(rep).dump(2) + "\n");
    write_file(out_dir / (cfg.check + ".csv"), report_to_csv(rep));
    print_summary(cfg.check, summary_json(rep));
    for (const auto& t : rep.trials)
        if (!t.error.empty()) std::fprintf(stderr, "trial %zu (seed %llu): %s\n", t.trial,
                                           static_cast<unsigned long long>(t.seed), t.error.c_str());
    return rep.ok() ? 0 : 1;
}

int run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const SweepReport s = sweep(cfg);
    write_file(out_dir / (cfg.check + "_sweep.json"), sweep_to_json(s).dump(2) + "\n");
    write_file(out_dir / (cfg.check + "_sweep.csv"), sweep_to_csv(s));
    for (std::size_t a = 0; a < s.runs.size(); ++a)
        print_summary(cfg.axis + "=" + detail::csv_number(s.values[a]), summary_json(s.runs[a]));
    return s.ok() ? 0 : 1;
}

/// Prints the summaries of an existing report (single run or sweep).
int run_report(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const bool is_sweep = !cfg.axis.empty();
    const fs::path path = out_dir / (cfg.check + (is_sweep ? "_sweep.json" : ".json"));
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "no report at " + path.string());
    json doc;
    in >> doc;
    bool ok = true;
    auto account = [&](const json& summary) {
        ok = ok && summary.at("errors").get<std::size_t>() == 0 && summary.at("failures").get<std::size_t>() == 0;
    };
    if (is_sweep) {
        for (const auto& point : doc.at("points")) {
            print_summary(doc.at("axis").get<std::string>() + "=" + point.at("axis_value").dump(), point.at("summary"));
            account(point.at("summary"));
        }
    } else {
        print_summary(doc.at("check").get<std::string>(), doc.at("summary"));
        account(doc.at("summary"));
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spline martingale inequality harness"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    const std::pair<const char*, const char*> commands[]{
        {"gen", "write random filtrations to <out>/filtrations.json"},
        {"check", "run one check, write <out>/<check>.json and .csv"},
        {"sweep", "run the check once per axis value, write <out>/<check>_sweep.json and .csv"},
        {"report", "print summaries of an existing report"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "override master_seed");
        sub->add_option("--out", out, "output directory (default: config 'output')");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (seed) cfg.master_seed = *seed;
        const fs::path out_dir = out.empty() ? fs::path(cfg.output) : fs::path(out);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "gen") return run_gen(cfg, out_dir);
        if (cmd == "check") return run_one(cfg, out_dir);
        if (cmd == "sweep") return run_sweep(cfg, out_dir);
        return run_report(cfg, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
