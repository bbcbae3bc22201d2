#include "curvlab/train.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/textio.hpp"

namespace curvlab {

namespace {

using json = nlohmann::ordered_json;

std::vector<Layer> initial_layers(int input_dim, int num_classes, const TrainConfig& cfg,
                                  Rng& rng) {
    std::vector<int> widths;
    widths.push_back(input_dim);
    for (int h : cfg.hidden) {
        if (h <= 0) throw InvalidInput("hidden width must be positive");
        widths.push_back(h);
    }
    widths.push_back(num_classes);

    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        Layer l;
        const int fan_in = widths[k];
        const int fan_out = widths[k + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        l.weight.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) l.weight(r, c) = rng.uniform(-limit, limit);
        l.bias = Vec::Zero(fan_out);
        const bool last = (k + 2 == widths.size());
        l.activation = last ? Activation::Identity : cfg.hidden_activation;
        layers.push_back(std::move(l));
    }
    return layers;
}

Vec softmax(const Vec& logits) {
    const double m = logits.maxCoeff();
    Vec e = (logits.array() - m).exp();
    return e / e.sum();
}

}  // namespace

double accuracy(const Classifier& net, const Dataset& ds) {
    if (ds.size() == 0) return 0.0;
    int hits = 0;
    for (int r = 0; r < ds.size(); ++r)
        if (net.predict(ds.sample(r)) == ds.labels[r]) ++hits;
    return static_cast<double>(hits) / ds.size();
}

Checkpoint train_classifier(const Dataset& train, const Dataset& val,
                            const TrainConfig& cfg, const std::string& dataset_id) {
    if (train.size() == 0) throw InvalidInput("training set is empty");
    for (int lbl : train.labels)
        if (lbl < 0 || lbl >= train.L) throw InvalidInput("training label out of range");

    Rng init_rng = Rng::for_purpose(cfg.seed, "train-init");
    Rng shuffle_rng = Rng::for_purpose(cfg.seed, "train-shuffle");

    std::vector<Layer> layers = initial_layers(train.d, train.L, cfg, init_rng);
    const int K = static_cast<int>(layers.size());

    std::vector<Mat> vel_w(K);
    std::vector<Vec> vel_b(K);
    for (int k = 0; k < K; ++k) {
        vel_w[k] = Mat::Zero(layers[k].weight.rows(), layers[k].weight.cols());
        vel_b[k] = Vec::Zero(layers[k].bias.size());
    }

    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (int start = 0; start < train.size(); start += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, train.size() - start);

            std::vector<Mat> grad_w(K);
            std::vector<Vec> grad_b(K);
            for (int k = 0; k < K; ++k) {
                grad_w[k] = Mat::Zero(layers[k].weight.rows(), layers[k].weight.cols());
                grad_b[k] = Vec::Zero(layers[k].bias.size());
            }

            double batch_loss = 0.0;
            Network net(layers);
            for (int b = 0; b < count; ++b) {
                const int idx = order[start + b];
                const Vec x = train.sample(idx);
                const Network::Trace t = net.trace(x);
                const Vec probs = softmax(t.post.back());
                batch_loss += -std::log(std::max(probs[train.labels[idx]], 1e-300));

                Vec delta = probs;  // dLoss/d logits (identity output layer)
                delta[train.labels[idx]] -= 1.0;
                for (int k = K - 1; k >= 0; --k) {
                    Vec dz(delta.size());
                    for (int u = 0; u < delta.size(); ++u)
                        dz[u] = act_deriv(layers[k].activation, t.pre[k][u]) * delta[u];
                    const Vec& input = (k == 0) ? x : t.post[k - 1];
                    grad_w[k].noalias() += dz * input.transpose();
                    grad_b[k] += dz;
                    delta = layers[k].weight.transpose() * dz;
                }
            }

            batch_loss /= count;
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch offset " + std::to_string(start));

            for (int k = 0; k < K; ++k) {
                vel_w[k] = cfg.momentum * vel_w[k] - cfg.learning_rate * (grad_w[k] / count);
                vel_b[k] = cfg.momentum * vel_b[k] - cfg.learning_rate * (grad_b[k] / count);
                layers[k].weight += vel_w[k];
                layers[k].bias += vel_b[k];
                if (!layers[k].weight.allFinite() || !layers[k].bias.allFinite())
                    throw TrainingDiverged("non-finite parameters at epoch " +
                                           std::to_string(epoch));
            }
        }
    }

    Checkpoint cp{Network(std::move(layers)), {}};
    cp.meta.dataset_id = dataset_id;
    cp.meta.seed = cfg.seed;
    cp.meta.epochs = cfg.epochs;
    cp.meta.train_accuracy = accuracy(cp.network, train);
    cp.meta.val_accuracy = accuracy(cp.network, val);
    return cp;
}

std::string serialize_checkpoint(const Checkpoint& cp) {
    json doc;
    doc["schema_version"] = 1;
    doc["input_dim"] = cp.network.input_dim();
    doc["num_classes"] = cp.network.num_classes();
    json layers = json::array();
    for (const auto& l : cp.network.layers()) {
        json jl;
        jl["activation"] = activation_name(l.activation);
        jl["rows"] = static_cast<int>(l.weight.rows());
        jl["cols"] = static_cast<int>(l.weight.cols());
        json w = json::array();
        for (int r = 0; r < l.weight.rows(); ++r)
            for (int c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
        jl["weights"] = std::move(w);
        json b = json::array();
        for (int r = 0; r < l.bias.size(); ++r) b.push_back(l.bias[r]);
        jl["bias"] = std::move(b);
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    doc["metadata"] = {{"dataset_id", cp.meta.dataset_id},
                       {"seed", cp.meta.seed},
                       {"epochs", cp.meta.epochs},
                       {"train_accuracy", cp.meta.train_accuracy},
                       {"val_accuracy", cp.meta.val_accuracy}};
    return doc.dump(2) + "\n";
}

Checkpoint deserialize_checkpoint(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("schema_version").get<int>() != 1)
            throw IoError("unsupported checkpoint schema version");
        std::vector<Layer> layers;
        for (const auto& jl : doc.at("layers")) {
            Layer l;
            l.activation = activation_from_name(jl.at("activation").get<std::string>());
            const int rows = jl.at("rows").get<int>();
            const int cols = jl.at("cols").get<int>();
            const auto& w = jl.at("weights");
            if (static_cast<int>(w.size()) != rows * cols)
                throw IoError("checkpoint layer weight count mismatch");
            l.weight.resize(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    l.weight(r, c) = w[static_cast<std::size_t>(r) * cols + c].get<double>();
            const auto& b = jl.at("bias");
            if (static_cast<int>(b.size()) != rows)
                throw IoError("checkpoint layer bias count mismatch");
            l.bias.resize(rows);
            for (int r = 0; r < rows; ++r) l.bias[r] = b[r].get<double>();
            layers.push_back(std::move(l));
        }
        Checkpoint cp{Network(std::move(layers)), {}};
        const auto& meta = doc.at("metadata");
        cp.meta.dataset_id = meta.at("dataset_id").get<std::string>();
        cp.meta.seed = meta.at("seed").get<std::uint64_t>();
        cp.meta.epochs = meta.at("epochs").get<int>();
        cp.meta.train_accuracy = meta.at("train_accuracy").get<double>();
        cp.meta.val_accuracy = meta.at("val_accuracy").get<double>();
        if (cp.network.input_dim() != doc.at("input_dim").get<int>() ||
            cp.network.num_classes() != doc.at("num_classes").get<int>())
            throw IoError("checkpoint dimension fields disagree with layer shapes");
        return cp;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    write_text_file(path, serialize_checkpoint(cp));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(read_text_file(path));
}

}  // namespace curvlab
