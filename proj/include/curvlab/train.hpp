#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "curvlab/dataset.hpp"
#include "curvlab/network.hpp"

namespace curvlab {

struct TrainingMeta {
    std::string dataset_id;
    std::uint64_t seed = 0;
    int epochs = 0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

struct Checkpoint {
    Network network;
    TrainingMeta meta;
};

struct TrainConfig {
    std::vector<int> hidden;  // hidden widths; output layer is implied
    Activation hidden_activation = Activation::Softplus;
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

// Mini-batch SGD with momentum on softmax cross-entropy. Weights start from
// a scaled uniform draw (+-sqrt(6/(fan_in+fan_out))), biases from zero; all
// randomness comes from the seed, so identical configs give bit-identical
// checkpoints. Throws TrainingDiverged when the loss stops being finite.
Checkpoint train_classifier(const Dataset& train, const Dataset& val,
                            const TrainConfig& config, const std::string& dataset_id);

double accuracy(const Classifier& net, const Dataset& ds);

std::string serialize_checkpoint(const Checkpoint& cp);
Checkpoint deserialize_checkpoint(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace curvlab
