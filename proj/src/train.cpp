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

#include "slim/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "slim/error.hpp"
#include "slim/rng.hpp"

namespace slim {

namespace {

struct Episode {
    GroundingTask task;
    SequenceBatch batch;
    int response_pos = 0;
};

Episode make_episode(const SceneRecipe& recipe, const MaskStrategy& strategy, std::uint64_t scene_seed,
                     std::uint64_t task_seed) {
    SceneRecipe r = recipe;
    r.seed = scene_seed;
    Episode ep{GroundingTask{generate_scene(r), TokenLayout(), {}, {}, {}, -1, -1, 1}, {}, 0};
    ep.task = generate_grounding_task(ep.task.scene, task_seed);
    ep.batch.tokens = ep.task.tokens;
    ep.batch.layout = ep.task.layout;
    ep.batch.targets = ep.task.targets;
    ep.batch.mask = compose(ep.task.scene, ep.task.layout, strategy);
    ep.response_pos = segment_spans(ep.task.layout).response.begin;
    return ep;
}

// Argmax over the episode's candidate identifier tokens; ties go to the
// lower token id. Mirrors decoding over a fixed proposal set.
int predict(const Mat& logits, const Episode& ep) {
    const double* row = logits[ep.response_pos];
    int best = -1;
    double best_score = 0.0;
    for (int id : ep.task.id_tokens) {
        if (best == -1 || row[id] > best_score || (row[id] == best_score && id < best)) {
            best = id;
            best_score = row[id];
        }
    }
    return best;
}

double evaluate(const DecoderParams& params, const std::vector<Episode>& eval_set) {
    const int count = static_cast<int>(eval_set.size());
    std::vector<int> hits(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(static)
    for (int e = 0; e < count; ++e) {
        const Episode& ep = eval_set[static_cast<std::size_t>(e)];
        const Mat logits = decoder_forward(params, ep.batch, nullptr);
        const int target = ep.batch.targets[static_cast<std::size_t>(ep.response_pos)];
        hits[static_cast<std::size_t>(e)] = predict(logits, ep) == target ? 1 : 0;
    }
    int total = 0;
    for (int h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(count);
}

} // namespace

TrainResult toy_train(const TrainConfig& config) {
    config.model.validate();
    validate(config.recipe);
    if (config.batch_episodes < 1 || config.eval_episodes < 1 || config.steps < 0) {
        throw ConfigError("batch/eval episode counts must be positive and steps non-negative");
    }

    // Episode streams depend on recipe + seed only, never on the strategy, so
    // every strategy competes on identical data.
    auto train_episode = [&](std::uint64_t index) {
        return make_episode(config.recipe, config.strategy, derive_seed(config.seed, 0x5EED, index),
                            derive_seed(config.seed, 0x7A5C, index));
    };
    std::vector<Episode> eval_set;
    eval_set.reserve(static_cast<std::size_t>(config.eval_episodes));
    for (int e = 0; e < config.eval_episodes; ++e) {
        eval_set.push_back(make_episode(config.recipe, config.strategy,
                                        derive_seed(config.seed, 0xEAA1, static_cast<std::uint64_t>(e)),
                                        derive_seed(config.seed, 0xEBB2, static_cast<std::uint64_t>(e))));
    }

    DecoderParams params = DecoderParams::random(config.model, derive_seed(config.seed, 0x1217));
    const std::size_t psize = params.size();
    const int batch = config.batch_episodes;
    std::vector<double> adam_m(psize, 0.0);
    std::vector<double> adam_v(psize, 0.0);

    // One gradient buffer per episode, reduced in episode order, so the sums
    // are identical for any thread count.
    std::vector<std::vector<double>> episode_grads(static_cast<std::size_t>(batch),
                                                   std::vector<double>(psize, 0.0));
    std::vector<double> episode_losses(static_cast<std::size_t>(batch), 0.0);
    std::vector<double> grad(psize, 0.0);

    TrainResult result;
    result.strategy = config.strategy.str();
    result.seed = config.seed;
    result.steps = config.steps;

    double loss = 0.0;
    for (int step = 0; step < config.steps; ++step) {
#pragma omp parallel for schedule(static)
        for (int e = 0; e < batch; ++e) {
            const Episode ep = train_episode(static_cast<std::uint64_t>(step) * batch + e);
            std::vector<double>& g = episode_grads[static_cast<std::size_t>(e)];
            std::fill(g.begin(), g.end(), 0.0);
            episode_losses[static_cast<std::size_t>(e)] = loss_and_grad(params, ep.batch, g);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        loss = 0.0;
        for (int e = 0; e < batch; ++e) {
            loss += episode_losses[static_cast<std::size_t>(e)];
            const std::vector<double>& g = episode_grads[static_cast<std::size_t>(e)];
            for (std::size_t i = 0; i < psize; ++i) grad[i] += g[i];
        }
        const double inv = 1.0 / static_cast<double>(batch);
        loss *= inv;
        if (!std::isfinite(loss)) {
            throw TrainingError("loss diverged at step " + std::to_string(step));
        }
        if (step % config.eval_every == 0) {
            result.curve.push_back({step, loss, evaluate(params, eval_set)});
        }
        const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
        const double bc1 = 1.0 - std::pow(beta1, step + 1);
        const double bc2 = 1.0 - std::pow(beta2, step + 1);
        for (std::size_t i = 0; i < psize; ++i) {
            const double g = inv * grad[i];
            adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * g;
            adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * g * g;
            params.flat()[i] -= config.learning_rate * (adam_m[i] / bc1) / (std::sqrt(adam_v[i] / bc2) + adam_eps);
        }
    }

    if (config.steps == 0) {
        // untrained model: still report a defined loss at chance level
        double untrained_loss = 0.0;
        for (int e = 0; e < batch; ++e) {
            const Episode ep = train_episode(static_cast<std::uint64_t>(e));
            const Mat logits = decoder_forward(params, ep.batch, nullptr);
            untrained_loss += nll_loss(logits, ep.batch.targets, segment_spans(ep.batch.layout).response,
                                       config.model.mean_loss);
        }
        loss = untrained_loss / static_cast<double>(batch);
    }

    result.final_loss = loss;
    result.final_accuracy = evaluate(params, eval_set);
    result.curve.push_back({config.steps, loss, result.final_accuracy});
    return result;
}

void write_metrics_csv(const TrainResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "step,loss,accuracy\n";
    char buf[64];
    for (const TrainPoint& p : result.curve) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", p.step, p.loss, p.accuracy);
        out << buf << "\n";
    }
}

std::string summary_json(const TrainResult& result) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "{\"strategy\": \"%s\", \"seed\": %llu, \"accuracy\": %.6f, \"steps\": %d}",
                  result.strategy.c_str(), static_cast<unsigned long long>(result.seed), result.final_accuracy,
                  result.steps);
    return buf;
}

} // namespace slim
