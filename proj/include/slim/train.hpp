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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slim/decoder.hpp"
#include "slim/mask.hpp"
#include "slim/scene_gen.hpp"

namespace slim {

struct TrainConfig {
    SceneRecipe recipe;
    DecoderConfig model;
    MaskStrategy strategy;
    // Every step draws this many fresh episodes from the recipe stream, so
    // the model can never memorize a finite training set.
    int batch_episodes = 60;
    int eval_episodes = 256;
    int steps = 3000;
    int eval_every = 500;
    // Adam step size (hand-rolled, deterministic; beta1 0.9, beta2 0.999).
    // Bare fixed-rate gradient descent cannot leave the uniform-prediction
    // plateau at this scale.
    double learning_rate = 3e-3;
    std::uint64_t seed = 0;
};

struct TrainPoint {
    int step = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    std::vector<TrainPoint> curve;
    double final_loss = 0.0;
    double final_accuracy = 0.0;
    int steps = 0;
    std::string strategy;
    std::uint64_t seed = 0;
};

/// Full-batch gradient descent on the grounding task, deterministic given
/// (config, seed) for any SLIM_THREADS value. The episode streams depend only
/// on recipe/seed, never on the strategy, so strategies compete on identical
/// data. Accuracy is the fraction of held-out episodes where the argmax over
/// the episode's candidate identifier tokens hits the target. Throws
/// TrainingError when the loss leaves the finite range.
TrainResult toy_train(const TrainConfig& config);

/// CSV with header step,loss,accuracy.
void write_metrics_csv(const TrainResult& result, const std::filesystem::path& path);

/// Single-line JSON summary: strategy, seed, accuracy, steps.
std::string summary_json(const TrainResult& result);

} // namespace slim
