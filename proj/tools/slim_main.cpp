// Copyright 2026 The slimattn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slim/bench.hpp"
#include "slim/error.hpp"
#include "slim/mask.hpp"
#include "slim/runtime.hpp"
#include "slim/scene.hpp"
#include "slim/scene_gen.hpp"
#include "slim/train.hpp"
#include "slim/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1; // verification or training failure
constexpr int kExitUsage = 2;   // parse/config/usage errors

struct MaskArgs {
    std::string scene_path;
    std::string layout_path;
    std::string strategy = "geo+inst";
    int k_min = 2;
    int k_max = 10;
    int n_fixed = 5;
    std::string out_path;
};

int cmd_mask(const MaskArgs& args) {
    const slim::SceneObjects scene = slim::load_scene(args.scene_path);
    const slim::TokenLayout layout = slim::load_layout(args.layout_path);
    slim::MaskStrategy strategy = slim::MaskStrategy::parse(args.strategy);
    strategy.geo = {args.k_min, args.k_max};
    if (args.strategy.rfind("fixedn:", 0) != 0 && strategy.kind == slim::MaskKind::FixedN) {
        strategy.n_fixed = args.n_fixed;
    }
    const slim::AttentionMask mask = slim::compose(scene, layout, strategy);
    slim::save_mask(mask, args.out_path);
    std::cout << "wrote " << args.out_path << " strategy=" << strategy.str() << " "
              << slim::format_sparsity(slim::sparsity_stats(mask)) << "\n";
    return kExitOk;
}

struct CheckArgs {
    std::uint64_t seed = 20260811;
    int cases = 1000;
    std::string fault;
    std::string replay_dir = "slim-failcase";
};

int cmd_check(const CheckArgs& args) {
    slim::VerifyConfig config;
    config.seed = args.seed;
    config.cases = args.cases;
    config.replay_dir = args.replay_dir;
    if (!args.fault.empty()) {
        if (args.fault == "inject-grad") {
            config.inject_gradient_fault = true;
        } else {
            throw slim::ConfigError("unknown fault '" + args.fault + "' (supported: inject-grad)");
        }
    }

    bool all_pass = true;
    for (const slim::SuiteResult& suite : slim::run_all_suites(config)) {
        std::printf("[%s] %-24s cases=%-6d %.2fs%s%s\n", suite.pass ? "PASS" : "FAIL", suite.name.c_str(),
                    suite.cases, suite.seconds, suite.detail.empty() ? "" : " ", suite.detail.c_str());
        all_pass = all_pass && suite.pass;
    }
    std::cout << (all_pass ? "all suites passed" : "verification FAILED") << "\n";
    return all_pass ? kExitOk : kExitFailure;
}

struct BenchArgs {
    std::vector<int> sizes{64, 128, 256, 512};
    std::vector<std::string> strategies{"geo", "full", "causal"};
    int trials = 20;
    int warmup = 3;
    int d_head = 64;
    std::uint64_t seed = 20260811;
    std::string out_csv;
};

int cmd_bench(const BenchArgs& args) {
    slim::BenchConfig config;
    config.sizes = args.sizes;
    config.trials = args.trials;
    config.warmup = args.warmup;
    config.d_head = args.d_head;
    config.seed = args.seed;
    config.strategies.clear();
    for (const std::string& s : args.strategies) {
        config.strategies.push_back(slim::MaskStrategy::parse(s));
    }

    const std::vector<slim::BenchRow> rows = slim::run_bench(config);
    std::cout << slim::bench_table(rows);
    if (!args.out_csv.empty()) {
        std::ofstream out(args.out_csv);
        if (!out) throw slim::ConfigError("cannot open '" + args.out_csv + "' for writing");
        out << slim::bench_csv(rows);
        std::cout << "wrote " << args.out_csv << "\n";
    }
    return kExitOk;
}

struct AblateArgs {
    int seeds = 5;
    int steps = -1;
    int batch_episodes = -1;
    int eval_episodes = -1;
    double learning_rate = -1.0;
    int k_min = 2;
    int k_max = 10;
    std::string recipe_path;
    std::string out_csv;
    std::string metrics_dir;
};

int cmd_ablate(const AblateArgs& args) {
    slim::TrainConfig base;
    if (!args.recipe_path.empty()) base.recipe = slim::load_recipe(args.recipe_path);
    if (args.steps >= 0) base.steps = args.steps;
    if (args.batch_episodes > 0) base.batch_episodes = args.batch_episodes;
    if (args.eval_episodes > 0) base.eval_episodes = args.eval_episodes;
    if (args.learning_rate > 0.0) base.learning_rate = args.learning_rate;

    struct Cell {
        std::string strategy;
        std::uint64_t seed = 0;
        bool ok = false;
        double accuracy = 0.0;
        double loss = 0.0;
        std::string error;
    };
    std::vector<Cell> cells;

    std::vector<slim::MaskStrategy> strategies = slim::ablation_strategies();
    for (slim::MaskStrategy& s : strategies) s.geo = {args.k_min, args.k_max};

    for (const slim::MaskStrategy& strategy : strategies) {
        for (int seed = 0; seed < args.seeds; ++seed) {
            slim::TrainConfig config = base;
            config.strategy = strategy;
            config.seed = static_cast<std::uint64_t>(seed);
            Cell cell;
            cell.strategy = strategy.str();
            cell.seed = config.seed;
            try {
                const slim::TrainResult result = slim::toy_train(config);
                cell.ok = true;
                cell.accuracy = result.final_accuracy;
                cell.loss = result.final_loss;
                std::cout << slim::summary_json(result) << "\n";
                if (!args.metrics_dir.empty()) {
                    std::filesystem::create_directories(args.metrics_dir);
                    slim::write_metrics_csv(result, std::filesystem::path(args.metrics_dir) /
                                                        (strategy.str() + "_seed" + std::to_string(seed) + ".csv"));
                }
            } catch (const slim::TrainingError& e) {
                cell.error = e.what();
                std::cout << "{\"strategy\": \"" << strategy.str() << "\", \"seed\": " << seed
                          << ", \"error\": \"" << e.what() << "\"}\n";
            }
            cells.push_back(cell);
        }
    }

    // aligned summary table, mean +- sd per strategy in table row order
    bool any_failed = false;
    std::printf("\n%-12s  %8s  %8s  %s\n", "strategy", "mean", "sd", "per-seed accuracy");
    for (const slim::MaskStrategy& strategy : strategies) {
        std::vector<double> accs;
        std::string per_seed;
        for (const Cell& cell : cells) {
            if (cell.strategy != strategy.str()) continue;
            if (!cell.ok) {
                per_seed += " failed";
                any_failed = true;
                continue;
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), " %.3f", cell.accuracy);
            per_seed += buf;
            accs.push_back(cell.accuracy);
        }
        double mean = 0.0, sd = 0.0;
        if (!accs.empty()) {
            mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
            for (double a : accs) sd += (a - mean) * (a - mean);
            sd = accs.size() > 1 ? std::sqrt(sd / static_cast<double>(accs.size() - 1)) : 0.0;
        }
        std::printf("%-12s  %8.3f  %8.3f %s\n", strategy.str().c_str(), mean, sd, per_seed.c_str());
    }

    if (!args.out_csv.empty()) {
        std::ofstream out(args.out_csv);
        if (!out) throw slim::ConfigError("cannot open '" + args.out_csv + "' for writing");
        out << "strategy,seed,accuracy,loss,status\n";
        for (const Cell& cell : cells) {
            out << cell.strategy << ',' << cell.seed << ',';
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f", cell.accuracy, cell.loss);
            out << buf << ',' << (cell.ok ? "ok" : "failed") << "\n";
        }
        std::cout << "wrote " << args.out_csv << "\n";
    }
    return any_failed ? kExitFailure : kExitOk;
}

struct GenArgs {
    std::string recipe_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_path;
};

int cmd_gen(const GenArgs& args) {
    slim::SceneRecipe recipe;
    if (!args.recipe_path.empty()) recipe = slim::load_recipe(args.recipe_path);
    if (args.seed_set) recipe.seed = args.seed;
    const slim::SceneObjects scene = slim::generate_scene(recipe);
    slim::save_scene(scene, args.out_path);
    std::cout << "wrote " << args.out_path << " with " << scene.size() << " objects\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    slim::init_threads_from_env();

    CLI::App app{"slimattn: geometry-adaptive and instruction-aware attention masks for 3D scene-language decoding"};
    app.require_subcommand(1);

    MaskArgs mask_args;
    CLI::App* mask_cmd = app.add_subcommand("mask", "build a SLIMMASK file from a scene and a layout");
    mask_cmd->add_option("--scene", mask_args.scene_path, "SLIMSCENE v1 input")->required();
    mask_cmd->add_option("--layout", mask_args.layout_path, "SLIMLAYOUT v1 input")->required();
    mask_cmd->add_option("--strategy", mask_args.strategy,
                         "causal|fullall|full|diag|fixedn:<k>|geo, optional +inst suffix");
    mask_cmd->add_option("--kmin", mask_args.k_min, "geo lower neighborhood bound");
    mask_cmd->add_option("--kmax", mask_args.k_max, "geo upper neighborhood bound");
    mask_cmd->add_option("--nfixed", mask_args.n_fixed, "fixedn neighbor count");
    mask_cmd->add_option("--out", mask_args.out_path, "output SLIMMASK path")->required();

    CheckArgs check_args;
    CLI::App* check_cmd = app.add_subcommand("check", "run the verification suites");
    check_cmd->add_option("--seed", check_args.seed, "base seed");
    check_cmd->add_option("--cases", check_args.cases, "random cases per suite");
    check_cmd->add_option("--fault", check_args.fault, "inject a fault (inject-grad)");
    check_cmd->add_option("--replay-dir", check_args.replay_dir, "where failing cases are serialized");

    BenchArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("bench", "time dense vs sparse-gather masked attention");
    bench_cmd->add_option("--sizes", bench_args.sizes, "object counts to bench");
    bench_cmd->add_option("--strategies", bench_args.strategies, "strategies to bench");
    bench_cmd->add_option("--trials", bench_args.trials, "timed trials per cell");
    bench_cmd->add_option("--warmup", bench_args.warmup, "discarded warmup runs");
    bench_cmd->add_option("--dhead", bench_args.d_head, "attention head width");
    bench_cmd->add_option("--seed", bench_args.seed, "base seed");
    bench_cmd->add_option("--csv", bench_args.out_csv, "also write a CSV report");

    AblateArgs ablate_args;
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "train the toy decoder under every masking strategy");
    ablate_cmd->add_option("--seeds", ablate_args.seeds, "seeds per strategy");
    ablate_cmd->add_option("--steps", ablate_args.steps, "gradient steps");
    ablate_cmd->add_option("--batch-episodes", ablate_args.batch_episodes, "fresh episodes per step");
    ablate_cmd->add_option("--eval-episodes", ablate_args.eval_episodes, "held-out episodes");
    ablate_cmd->add_option("--lr", ablate_args.learning_rate, "learning rate");
    ablate_cmd->add_option("--kmin", ablate_args.k_min, "geo lower neighborhood bound");
    ablate_cmd->add_option("--kmax", ablate_args.k_max, "geo upper neighborhood bound");
    ablate_cmd->add_option("--recipe", ablate_args.recipe_path, "scene recipe file (key=value)");
    ablate_cmd->add_option("--csv", ablate_args.out_csv, "write per-cell CSV");
    ablate_cmd->add_option("--metrics-dir", ablate_args.metrics_dir, "write per-run step,loss,accuracy CSVs");

    GenArgs gen_args;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic SLIMSCENE file");
    gen_cmd->add_option("--recipe", gen_args.recipe_path, "scene recipe file (key=value)");
    CLI::Option* seed_opt = gen_cmd->add_option("--seed", gen_args.seed, "override recipe seed");
    gen_cmd->add_option("--out", gen_args.out_path, "output SLIMSCENE path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (mask_cmd->parsed()) return cmd_mask(mask_args);
        if (check_cmd->parsed()) return cmd_check(check_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_args);
        if (gen_cmd->parsed()) {
            gen_args.seed_set = seed_opt->count() > 0;
            return cmd_gen(gen_args);
        }
    } catch (const slim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const slim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const slim::TrainingError& e) {
        std::cerr << "training failure: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
