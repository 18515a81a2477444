#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tsrt/analysis.hpp"
#include "tsrt/scenario.hpp"
#include "tsrt/treebuild.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mode;
};

tsrt::Scenario load_scenario(const std::string& path, const Overrides& ov) {
    tsrt::Scenario sc = tsrt::Scenario::load_file(path);
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.out) sc.out = *ov.out;
    if (ov.mode) {
        if (*ov.mode == "paper")
            sc.correction = tsrt::CorrectionMode::PaperFormula;
        else if (*ov.mode == "corrected")
            sc.correction = tsrt::CorrectionMode::CorrectedFormula;
        else
            throw tsrt::ScenarioError("--mode: expected paper or corrected, got `" + *ov.mode + "`");
    }
    return sc;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << text;
}

void maybe_write_trace(const tsrt::Scenario& sc, const tsrt::Sim& sim) {
    if (!sc.trace_out.empty()) write_output(sc.trace_out, sim.engine().trace().to_text());
}

int cmd_tree(const tsrt::Scenario& sc) {
    tsrt::NetworkGraph g = sc.make_graph();
    tsrt::Sim sim(g, sc.make_sim_config(), sc.make_clocks(g.node_count()));
    tsrt::TreeState tree = tsrt::build_tree(sim);
    write_output(sc.out, tree.dump());
    maybe_write_trace(sc, sim);
    if (tree.accepted_count() < g.node_count()) {
        std::cerr << "warning: flood reached " << tree.accepted_count() << " of "
                  << g.node_count() << " nodes\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_run(const tsrt::Scenario& sc) {
    tsrt::NetworkGraph g = sc.make_graph();
    tsrt::HtsOptions opt = sc.make_hts_options();
    tsrt::Sim sim(g, sc.make_sim_config(), sc.make_clocks(g.node_count()));
    tsrt::TreeState tree = tsrt::build_tree(sim);
    bool covered = tree.accepted_count() == g.node_count();
    if (!covered)
        std::cerr << "warning: flood reached " << tree.accepted_count() << " of "
                  << g.node_count() << " nodes\n";
    tsrt::SyncErrorReport report = tsrt::run_network_sync(sim, tree, opt);
    write_output(sc.out, report.to_text());
    maybe_write_trace(sc, sim);
    if (!covered || !report.all_synced()) {
        std::cerr << "error: synchronization incomplete\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_sweep(const tsrt::Scenario& sc, int n_min, int n_max) {
    if (n_min < 1 || n_max < n_min)
        throw tsrt::ScenarioError("sweep range: need 1 <= n-min <= n-max");
    tsrt::NetworkGraph g = sc.make_graph();
    tsrt::ErrorModel model = sc.make_error_model();
    tsrt::Sim sim(g, sc.make_sim_config(), sc.make_clocks(g.node_count()));
    tsrt::TreeState tree = tsrt::build_tree(sim);
    tsrt::SyncParams p = sc.make_sync_params(std::max(1, tree.accepted_count() - 1));
    tsrt::SweepResult sweep = tsrt::sweep_m_vs_n(p, model, tree, n_min, n_max);
    write_output(sc.out, sweep.to_csv());
    if (!sc.json_out.empty()) write_output(sc.json_out, sweep.to_json());
    return kExitOk;
}

int cmd_evaluate(const tsrt::Scenario& sc) {
    tsrt::ErrorModel model = sc.make_error_model();
    int branches = 1;
    if (sc.branches) {
        branches = *sc.branches;
    } else {
        // B comes out of the tree-construction phase when not given directly.
        tsrt::NetworkGraph g = sc.make_graph();
        tsrt::Sim sim(g, sc.make_sim_config(), sc.make_clocks(g.node_count()));
        tsrt::TreeState tree = tsrt::build_tree(sim);
        branches = std::max(1, tree.accepted_count() - 1);
    }
    tsrt::SyncParams p = sc.make_sync_params(branches);
    tsrt::EvalReport report = tsrt::evaluate(p, model);
    write_output(sc.out, report.to_text());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TSRT tree-structured time synchronization simulator"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path;
    int n_min = 1;
    int n_max = 30;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "scenario config file")->required();
        cmd->add_option("--seed", ov.seed, "override the scenario seed");
        cmd->add_option("--out", ov.out, "override the output path");
        cmd->add_option("--mode", ov.mode, "correction mode: paper or corrected");
    };

    CLI::App* tree = app.add_subcommand("tree", "build the topology, run flooding, dump the tree");
    add_common(tree);
    CLI::App* run = app.add_subcommand("run", "full pipeline: tree, HTS ripple, error report");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "emit the M-vs-N comparison CSV");
    add_common(sweep);
    sweep->add_option("--n-min", n_min, "first beacon count");
    sweep->add_option("--n-max", n_max, "last beacon count");
    CLI::App* evaluate = app.add_subcommand("evaluate", "network-evaluation report (mode, tau_max, tau, M)");
    add_common(evaluate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        tsrt::Scenario sc = load_scenario(config_path, ov);
        if (tree->parsed()) return cmd_tree(sc);
        if (run->parsed()) return cmd_run(sc);
        if (sweep->parsed()) return cmd_sweep(sc, n_min, n_max);
        if (evaluate->parsed()) return cmd_evaluate(sc);
        return kExitValidation;
    } catch (const tsrt::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
