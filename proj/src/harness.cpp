#include "curvlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "curvlab/adversarial.hpp"
#include "curvlab/boundary.hpp"
#include "curvlab/dataset.hpp"
#include "curvlab/detector.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/shared_directions.hpp"
#include "curvlab/topology.hpp"
#include "curvlab/train.hpp"

namespace curvlab {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct RunContext {
    FlatConfig resolved;  // config with defaults filled in
    fs::path out;
    json metrics;
    std::vector<std::pair<std::string, std::string>> files;  // name -> content

    void emit(const std::string& name, const std::string& content) {
        files.emplace_back(name, content);
    }
    void emit(const std::string& name, const CsvWriter& csv) { emit(name, csv.str()); }
};

std::uint64_t seed_of(const FlatConfig& cfg) { return cfg.get_u64_or("seed", 0); }

Checkpoint load_checkpoint_input(const FlatConfig& cfg) {
    const fs::path path = cfg.get("checkpoint");
    if (!fs::exists(path)) throw IoError("checkpoint file does not exist: " + path.string());
    return load_checkpoint(path);
}

Dataset load_dataset_input(const FlatConfig& cfg, const std::string& key) {
    const fs::path path = cfg.get(key);
    if (!fs::exists(path)) throw IoError("dataset file does not exist: " + path.string());
    return load_dataset(path);
}

PerturbationOptions perturbation_options(const FlatConfig& cfg) {
    PerturbationOptions opts;
    opts.overshoot = cfg.get_double_or("overshoot", 0.02);
    opts.max_iter = cfg.get_int_or("max_iter", 100);
    return opts;
}

void record(RunContext& ctx, const std::string& key, const std::string& value) {
    ctx.resolved.set(key, value);
}
void record(RunContext& ctx, const std::string& key, double value) {
    ctx.resolved.set(key, format_double(value));
}
void record(RunContext& ctx, const std::string& key, int value) {
    ctx.resolved.set(key, std::to_string(value));
}
void record(RunContext& ctx, const std::string& key, std::uint64_t value) {
    ctx.resolved.set(key, std::to_string(value));
}

std::string csv_matrix(const Mat& m) {
    std::vector<std::string> header;
    for (int c = 0; c < m.cols(); ++c) header.push_back("u_" + std::to_string(c));
    CsvWriter w(header);
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) w.cell(m(r, c));
        w.end_row();
    }
    return w.str();
}

Mat read_csv_matrix(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t cols = 0;
    bool first = true;
    for (const auto& line : split(text, '\n')) {
        if (line.empty()) continue;
        if (first) {  // header
            first = false;
            cols = split(line, ',').size();
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() != cols) throw IoError("matrix csv has ragged rows: " + path.string());
        std::vector<double> row;
        for (const auto& cell : cells) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    Mat m(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    return m;
}

// Perturbs rows [first, first+count) of the dataset; failures recorded.
struct PerturbedBatch {
    Mat points;                // successfully perturbed samples
    Mat originals;             // matching source samples
    std::vector<int> rows;     // source row ids
    std::vector<int> orig_predicted;
    std::vector<Vec> applied;  // perturbation vectors
    int failures = 0;
};

PerturbedBatch perturb_range(const Classifier& net, const Dataset& ds, int first, int count,
                             const PerturbationOptions& opts) {
    PerturbedBatch batch;
    std::vector<Vec> pts, orig;
    for (int r = first; r < first + count && r < ds.size(); ++r) {
        const Vec x = ds.sample(r);
        const PerturbationResult res = minimal_perturbation(net, x, opts);
        if (!res.succeeded) {
            ++batch.failures;
            continue;
        }
        pts.push_back(x + res.r);
        orig.push_back(x);
        batch.rows.push_back(r);
        batch.orig_predicted.push_back(res.original_label);
        batch.applied.push_back(res.r);
    }
    batch.points.resize(static_cast<int>(pts.size()), ds.d);
    batch.originals.resize(static_cast<int>(pts.size()), ds.d);
    for (std::size_t r = 0; r < pts.size(); ++r) {
        batch.points.row(static_cast<int>(r)) = pts[r].transpose();
        batch.originals.row(static_cast<int>(r)) = orig[r].transpose();
    }
    return batch;
}

// ---------------------------------------------------------------- generate

void run_generate(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "kind", "d", "L", "n_train", "n_val", "noise",
                            "source_file", "prefix"});
    DatasetSpec spec;
    spec.kind = cfg.get("kind");
    spec.d = cfg.get_int_or("d", 2);
    spec.L = cfg.get_int_or("L", 2);
    spec.n_train = cfg.get_int_or("n_train", 1000);
    spec.n_val = cfg.get_int_or("n_val", 500);
    spec.noise = cfg.get_double_or("noise", 0.1);
    spec.seed = seed_of(cfg);
    spec.source_file = cfg.get_or("source_file", "");
    const std::string prefix = cfg.get_or("prefix", "data");

    const GeneratedDataset gen = generate_dataset(spec);
    record(ctx, "kind", spec.kind);
    record(ctx, "d", spec.d);
    record(ctx, "L", spec.L);
    record(ctx, "n_train", spec.n_train);
    record(ctx, "n_val", spec.n_val);
    record(ctx, "noise", spec.noise);
    record(ctx, "prefix", prefix);

    ctx.emit(prefix + "_train.csv", serialize_dataset(gen.train));
    ctx.emit(prefix + "_val.csv", serialize_dataset(gen.val));
    ctx.metrics["dataset_id"] = gen.id;
    ctx.metrics["train_rows"] = gen.train.size();
    ctx.metrics["val_rows"] = gen.val.size();
}

// ------------------------------------------------------------------- train

void run_train(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "train_file", "val_file", "hidden", "activation",
                            "epochs", "batch_size", "learning_rate", "momentum", "dataset_id"});
    const Dataset train_set = load_dataset_input(cfg, "train_file");
    const Dataset val_set = load_dataset_input(cfg, "val_file");

    TrainConfig tc;
    tc.hidden = cfg.has("hidden") ? cfg.get_int_list("hidden") : std::vector<int>{64, 64};
    tc.hidden_activation = activation_from_name(cfg.get_or("activation", "softplus"));
    tc.epochs = cfg.get_int_or("epochs", 200);
    tc.batch_size = cfg.get_int_or("batch_size", 32);
    tc.learning_rate = cfg.get_double_or("learning_rate", 0.1);
    tc.momentum = cfg.get_double_or("momentum", 0.9);
    tc.seed = seed_of(cfg);
    const std::string dataset_id = cfg.get_or("dataset_id", cfg.get("train_file"));

    std::string hidden_str;
    for (std::size_t i = 0; i < tc.hidden.size(); ++i)
        hidden_str += (i ? "," : "") + std::to_string(tc.hidden[i]);
    record(ctx, "hidden", hidden_str);
    record(ctx, "activation", activation_name(tc.hidden_activation));
    record(ctx, "epochs", tc.epochs);
    record(ctx, "batch_size", tc.batch_size);
    record(ctx, "learning_rate", tc.learning_rate);
    record(ctx, "momentum", tc.momentum);

    const Checkpoint cp = train_classifier(train_set, val_set, tc, dataset_id);
    ctx.emit("checkpoint.json", serialize_checkpoint(cp));
    ctx.metrics["train_accuracy"] = cp.meta.train_accuracy;
    ctx.metrics["val_accuracy"] = cp.meta.val_accuracy;
}

// ----------------------------------------------------------------- perturb

void run_perturb(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "count", "overshoot",
                            "max_iter"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int count = cfg.get_int_or("count", ds.size());
    const PerturbationOptions opts = perturbation_options(cfg);
    record(ctx, "count", count);
    record(ctx, "overshoot", opts.overshoot);
    record(ctx, "max_iter", opts.max_iter);

    CsvWriter csv({"sample_id", "success", "norm_r", "iterations", "orig_label", "new_label"});
    int flips = 0;
    std::vector<double> norms;
    for (int r = 0; r < std::min(count, ds.size()); ++r) {
        const PerturbationResult res = minimal_perturbation(cp.network, ds.sample(r), opts);
        csv.cell(r).cell(res.succeeded).cell(res.norm()).cell(res.iterations)
            .cell(res.original_label).cell(res.new_label);
        csv.end_row();
        if (res.succeeded) {
            ++flips;
            norms.push_back(res.norm());
        }
    }
    ctx.emit("perturbations.csv", csv);

    std::sort(norms.begin(), norms.end());
    ctx.metrics["attempted"] = std::min(count, ds.size());
    ctx.metrics["flip_rate"] =
        count > 0 ? static_cast<double>(flips) / std::min(count, ds.size()) : 0.0;
    ctx.metrics["median_norm"] =
        norms.empty() ? 0.0
                      : (norms.size() % 2 ? norms[norms.size() / 2]
                                          : 0.5 * (norms[norms.size() / 2 - 1] +
                                                   norms[norms.size() / 2]));
}

// -------------------------------------------------------------------- path

void run_path(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "scenario", "pairs",
                            "depth_cap", "samples_per_segment"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int scenario = cfg.get_int_or("scenario", 1);
    const int pairs = cfg.get_int_or("pairs", 100);

    PathConfig pc;
    pc.depth_cap = cfg.get_int_or("depth_cap", 20);
    pc.samples_per_segment = cfg.get_int_or("samples_per_segment", 8);
    pc.sample_spacing = 0.01 * dataset_diameter(ds.X);
    record(ctx, "scenario", scenario);
    record(ctx, "pairs", pairs);
    record(ctx, "depth_cap", pc.depth_cap);
    record(ctx, "samples_per_segment", pc.samples_per_segment);
    record(ctx, "sample_spacing", pc.sample_spacing);

    const auto results = run_scenario(cp.network, scenario, pairs, ds, seed_of(cfg), pc);
    CsvWriter csv({"pair_id", "scenario", "success", "anchors", "depth", "path_length"});
    int successes = 0, attempted = 0;
    for (const auto& sp : results) {
        csv.cell(sp.pair_id).cell(sp.scenario).cell(sp.success).cell(sp.anchors)
            .cell(sp.depth).cell(sp.length);
        csv.end_row();
        if (sp.note.empty()) ++attempted;
        if (sp.success) ++successes;
    }
    ctx.emit("paths.csv", csv);
    ctx.metrics["pairs"] = static_cast<int>(results.size());
    ctx.metrics["attempted"] = attempted;
    ctx.metrics["success_fraction"] =
        results.empty() ? 0.0 : static_cast<double>(successes) / results.size();
}

// ------------------------------------------------------------ convex-probe

void run_convex_probe(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "k_values", "trials"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const std::vector<int> ks =
        cfg.has("k_values") ? cfg.get_int_list("k_values") : std::vector<int>{1, 2, 3, 5, 10};
    const int trials = cfg.get_int_or("trials", 500);
    std::string ks_str;
    for (std::size_t i = 0; i < ks.size(); ++i) ks_str += (i ? "," : "") + std::to_string(ks[i]);
    record(ctx, "k_values", ks_str);
    record(ctx, "trials", trials);

    const ConvexProbeReport report = convex_probe(cp.network, ds, ks, trials, seed_of(cfg));
    CsvWriter csv({"k", "probability", "trials"});
    for (std::size_t i = 0; i < report.k_values.size(); ++i) {
        csv.cell(report.k_values[i]).cell(report.probability[i]).cell(report.trials[i]);
        csv.end_row();
    }
    ctx.emit("probe.csv", csv);
    json probs = json::array();
    for (double p : report.probability) probs.push_back(p);
    ctx.metrics["probabilities"] = probs;
}

// --------------------------------------------------------------- curvature

void run_curvature(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "points", "top_k",
                            "export_profiles"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int points = std::min(cfg.get_int_or("points", 20), ds.size());
    const int top_k = cfg.get_int_or("top_k", -1);
    const bool export_profiles = cfg.get_bool_or("export_profiles", true);
    record(ctx, "points", points);
    record(ctx, "top_k", top_k);

    std::vector<std::vector<double>> profiles;
    std::vector<double> means;
    int skipped = 0;
    for (int r = 0; r < points; ++r) {
        try {
            const Vec x = ds.sample(r);
            const PerturbationResult pert = minimal_perturbation(cp.network, x);
            if (!pert.succeeded) {
                ++skipped;
                continue;
            }
            const BoundaryPoint bp = refine_to_boundary(cp.network, x + pert.r,
                                                        pert.original_label, pert.new_label);
            const CurvatureProfile profile =
                principal_curvatures(cp.network, bp, top_k, EigenPath::Auto,
                                     Rng::derive(seed_of(cfg), "curvature", r));
            // Figure convention: ascending along the index axis.
            std::vector<double> ascending(profile.curvatures.rbegin(),
                                          profile.curvatures.rend());
            if (export_profiles) {
                CsvWriter pcsv({"index", "kappa"});
                for (std::size_t i = 0; i < ascending.size(); ++i) {
                    pcsv.cell(static_cast<int>(i)).cell(ascending[i]);
                    pcsv.end_row();
                }
                ctx.emit("profile_" + std::to_string(r) + ".csv", pcsv);
            }
            profiles.push_back(std::move(ascending));
            means.push_back(profile.mean_curvature);
        } catch (const Error&) {
            ++skipped;
        }
    }
    if (!profiles.empty()) {
        const std::size_t len = profiles.front().size();
        CsvWriter mcsv({"index", "kappa"});
        for (std::size_t i = 0; i < len; ++i) {
            double sum = 0.0;
            for (const auto& p : profiles) sum += p.at(i);
            mcsv.cell(static_cast<int>(i)).cell(sum / profiles.size());
            mcsv.end_row();
        }
        ctx.emit("mean_profile.csv", mcsv);
    }
    ctx.metrics["points_used"] = static_cast<int>(profiles.size());
    ctx.metrics["points_skipped"] = skipped;
    if (!means.empty())
        ctx.metrics["mean_curvature_avg"] =
            std::accumulate(means.begin(), means.end(), 0.0) / means.size();
}

// ------------------------------------------------------------- shared-dirs

void run_shared_dirs(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "train_file", "val_file", "samples",
                            "per_sample_top_p", "m", "rho_points", "denominator_samples"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset train_set = load_dataset_input(cfg, "train_file");
    const Dataset val_set = load_dataset_input(cfg, "val_file");

    SharedBasisOptions opts;
    const int samples = std::min(cfg.get_int_or("samples", 100), train_set.size());
    opts.per_sample_top_p = cfg.get_int_or("per_sample_top_p", 10);
    opts.m = cfg.get_int_or("m", 0);
    const int rho_points = std::min(cfg.get_int_or("rho_points", 100), val_set.size());
    const int denom_samples = cfg.get_int_or("denominator_samples", 1000);
    record(ctx, "samples", samples);
    record(ctx, "per_sample_top_p", opts.per_sample_top_p);
    record(ctx, "m", opts.m);
    record(ctx, "rho_points", rho_points);
    record(ctx, "denominator_samples", denom_samples);

    const std::uint64_t seed = seed_of(cfg);
    const SharedBasis basis =
        build_shared_basis(cp.network, train_set.X.topRows(samples), opts, seed);
    ctx.emit("basis.csv", csv_matrix(basis.U));
    CsvWriter scsv({"index", "sigma"});
    for (int i = 0; i < basis.singular_values.size(); ++i) {
        scsv.cell(i).cell(basis.singular_values[i]);
        scsv.end_row();
    }
    ctx.emit("singular_values.csv", scsv);

    // Mean rho per shared direction over unseen validation boundary points.
    const int eval_dirs = std::min<int>(static_cast<int>(basis.U.cols()), 20);
    std::vector<std::vector<double>> rho_per_dir(static_cast<std::size_t>(eval_dirs));
    int used = 0, skipped = 0;
    for (int r = 0; r < rho_points; ++r) {
        try {
            const Vec x = val_set.sample(r);
            const PerturbationResult pert = minimal_perturbation(cp.network, x);
            if (!pert.succeeded) {
                ++skipped;
                continue;
            }
            const BoundaryPoint bp = refine_to_boundary(cp.network, x + pert.r,
                                                        pert.original_label, pert.new_label);
            for (int i = 0; i < eval_dirs; ++i) {
                const RhoEstimate est =
                    rho_statistic(cp.network, bp, basis.U.col(i), denom_samples,
                                  Rng::derive(seed, "rho-eval", r));
                rho_per_dir[i].push_back(est.rho);
            }
            ++used;
        } catch (const Error&) {
            ++skipped;
        }
    }
    CsvWriter rcsv({"direction_index", "mean_rho", "stderr"});
    for (int i = 0; i < eval_dirs; ++i) {
        const auto& vals = rho_per_dir[i];
        double mean = 0.0, se = 0.0;
        if (!vals.empty()) {
            mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            if (vals.size() > 1) var /= (vals.size() - 1);
            se = std::sqrt(var / vals.size());
        }
        rcsv.cell(i).cell(mean).cell(se);
        rcsv.end_row();
    }
    ctx.emit("rho.csv", rcsv);
    ctx.metrics["basis_samples_used"] = basis.samples_used;
    ctx.metrics["basis_samples_skipped"] = basis.samples_skipped;
    ctx.metrics["rho_points_used"] = used;
    ctx.metrics["rho_points_skipped"] = skipped;
    if (!rho_per_dir.empty() && !rho_per_dir[0].empty())
        ctx.metrics["rho_leading_mean"] =
            std::accumulate(rho_per_dir[0].begin(), rho_per_dir[0].end(), 0.0) /
            rho_per_dir[0].size();
}

// ---------------------------------------------------------------- robustness

void run_robustness(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "basis_file",
                            "subspace_dim", "magnitudes", "trials", "image_side"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const fs::path basis_path = cfg.get("basis_file");
    if (!fs::exists(basis_path))
        throw IoError("basis file does not exist: " + basis_path.string());
    const Mat U = read_csv_matrix(basis_path);
    if (U.rows() != ds.d) throw DimensionMismatch("basis rows do not match dataset dimension");

    const int dim = cfg.get_int_or("subspace_dim", default_subspace_dim(ds.d));
    if (dim <= 0 || dim > U.cols()) throw ConfigError("subspace_dim out of range");
    const Subspace S{U.leftCols(dim)};
    const std::vector<double> magnitudes =
        cfg.has("magnitudes") ? cfg.get_double_list("magnitudes")
                              : std::vector<double>{0.05, 0.1, 0.2, 0.3, 0.5};
    const int trials = cfg.get_int_or("trials", 400);
    record(ctx, "subspace_dim", dim);
    record(ctx, "trials", trials);

    const NoiseRobustnessReport report =
        noise_robustness_split(cp.network, ds, S, magnitudes, trials, seed_of(cfg));
    CsvWriter ncsv({"magnitude", "rate_in_subspace", "stderr_in_subspace", "rate_orthogonal",
                    "stderr_orthogonal"});
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        ncsv.cell(magnitudes[i]).cell(report.in_subspace.rate[i])
            .cell(report.in_subspace.std_error[i]);
        if (report.orthogonal.present) {
            ncsv.cell(report.orthogonal.rate[i]).cell(report.orthogonal.std_error[i]);
        } else {
            ncsv.cell(std::string()).cell(std::string());
        }
        ncsv.end_row();
    }
    ctx.emit("noise_split.csv", ncsv);

    ProjectionTableOptions topts;
    if (cfg.has("image_side")) topts.image_side = cfg.get_int("image_side");
    const auto table = projection_norm_table(cp.network, S, ds, topts, seed_of(cfg));
    CsvWriter tcsv({"source", "present", "mean_norm", "stderr", "count", "note"});
    for (const auto& row : table) {
        tcsv.cell(row.source).cell(row.present).cell(row.mean).cell(row.std_error)
            .cell(row.count).cell(row.note);
        tcsv.end_row();
    }
    ctx.emit("projection_norms.csv", tcsv);

    ctx.metrics["typical_norm"] = report.typical_norm;
    for (const auto& row : table)
        if (row.present) ctx.metrics["projection_" + row.source] = row.mean;
}

// ------------------------------------------------------------------ detect

void run_detect(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "clean_count",
                            "perturbed_count", "probes", "threshold", "sign_probes"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int clean_count = std::min(cfg.get_int_or("clean_count", 200), ds.size());
    const int pert_count =
        std::min(cfg.get_int_or("perturbed_count", 200), ds.size() - clean_count);
    const int probes = cfg.get_int_or("probes", 100);
    const double threshold = cfg.get_double_or("threshold", 0.0);
    const int sign_probes = cfg.get_int_or("sign_probes", 50);
    record(ctx, "clean_count", clean_count);
    record(ctx, "perturbed_count", pert_count);
    record(ctx, "probes", probes);
    record(ctx, "threshold", threshold);
    record(ctx, "sign_probes", sign_probes);
    if (pert_count <= 0) throw ConfigError("dataset too small for the requested split");

    const std::uint64_t seed = seed_of(cfg);
    const PerturbedBatch batch =
        perturb_range(cp.network, ds, clean_count, pert_count, PerturbationOptions{});

    auto write_verdicts = [&](const std::string& name, const Mat& points,
                              const std::function<int(int)>& true_label,
                              const std::function<int(int)>& orig_label,
                              std::vector<double>* scores, int& flagged) {
        CsvWriter csv({"sample_id", "rho", "perturbed", "recovered_label", "true_label",
                       "orig_label"});
        for (int r = 0; r < points.rows(); ++r) {
            const DetectionVerdict v =
                detect(cp.network, points.row(r).transpose(), probes, threshold,
                       Rng::derive(seed, "detect-probes", r));
            csv.cell(r).cell(v.rho).cell(v.perturbed)
                .cell(v.recovered_label ? std::to_string(*v.recovered_label) : std::string())
                .cell(true_label(r)).cell(orig_label(r));
            csv.end_row();
            if (scores) scores->push_back(v.rho);
            if (v.perturbed) ++flagged;
        }
        ctx.emit(name, csv);
    };

    std::vector<double> clean_scores, pert_scores;
    int clean_flagged = 0, pert_flagged = 0;
    write_verdicts("verdicts_clean.csv", ds.X.topRows(clean_count),
                   [&](int r) { return ds.labels[r]; },
                   [&](int r) { return cp.network.predict(ds.sample(r)); }, &clean_scores,
                   clean_flagged);
    write_verdicts("verdicts_perturbed.csv", batch.points,
                   [&](int r) { return ds.labels[batch.rows[r]]; },
                   [&](int r) { return batch.orig_predicted[r]; }, &pert_scores, pert_flagged);

    const SignStatistics stats = sign_statistics(cp.network, ds.X.topRows(clean_count),
                                                 batch.points, sign_probes, seed);
    CsvWriter scsv({"set", "fraction_negative", "fraction_positive", "used", "skipped"});
    scsv.cell(std::string("clean")).cell(stats.clean_negative).cell(stats.clean_positive)
        .cell(stats.clean_used).cell(stats.clean_skipped);
    scsv.end_row();
    scsv.cell(std::string("perturbed")).cell(stats.perturbed_negative)
        .cell(stats.perturbed_positive).cell(stats.perturbed_used)
        .cell(stats.perturbed_skipped);
    scsv.end_row();
    ctx.emit("sign_stats.csv", scsv);

    const RocTable roc = roc_sweep(clean_scores, pert_scores);
    ctx.metrics["auc"] = roc.auc;
    ctx.metrics["clean_flagged"] = clean_flagged;
    ctx.metrics["perturbed_flagged"] = pert_flagged;
    ctx.metrics["perturb_failures"] = batch.failures;
    ctx.metrics["clean_negative_fraction"] = stats.clean_negative;
    ctx.metrics["perturbed_positive_fraction"] = stats.perturbed_positive;
}

// --------------------------------------------------------------------- roc

void run_roc(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "clean_count",
                            "perturbed_count", "probes", "thresholds", "alphas"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int clean_count = std::min(cfg.get_int_or("clean_count", 500), ds.size());
    const int pert_count =
        std::min(cfg.get_int_or("perturbed_count", 500), ds.size() - clean_count);
    const int probes = cfg.get_int_or("probes", 100);
    const int thresholds = cfg.get_int_or("thresholds", 101);
    const std::vector<double> alphas = cfg.has("alphas") ? cfg.get_double_list("alphas")
                                                         : std::vector<double>{1.0, 2.0, 5.0};
    record(ctx, "clean_count", clean_count);
    record(ctx, "perturbed_count", pert_count);
    record(ctx, "probes", probes);
    record(ctx, "thresholds", thresholds);
    if (pert_count <= 0) throw ConfigError("dataset too small for the requested split");

    const std::uint64_t seed = seed_of(cfg);
    const PerturbedBatch batch =
        perturb_range(cp.network, ds, clean_count, pert_count, PerturbationOptions{});
    const std::vector<double> clean_scores =
        detection_scores(cp.network, ds.X.topRows(clean_count), probes, seed);

    const RocTable base = roc_sweep(
        clean_scores, detection_scores(cp.network, batch.points, probes, seed), thresholds);
    CsvWriter rcsv({"t", "tpr_clean", "fpr_perturbed"});
    for (const auto& pt : base.points) {
        rcsv.cell(pt.threshold).cell(pt.tpr_clean).cell(pt.fpr_perturbed);
        rcsv.end_row();
    }
    ctx.emit("roc.csv", rcsv);
    ctx.metrics["auc"] = base.auc;

    CsvWriter acsv({"alpha", "t", "tpr_clean", "fpr_perturbed"});
    json alpha_aucs = json::object();
    for (double alpha : alphas) {
        Mat scaled(batch.points.rows(), ds.d);
        for (int r = 0; r < batch.points.rows(); ++r)
            scaled.row(r) = scale_perturbation(batch.originals.row(r).transpose(),
                                               batch.applied[r], alpha)
                                .transpose();
        const RocTable rt = roc_sweep(
            clean_scores, detection_scores(cp.network, scaled, probes, seed), thresholds);
        for (const auto& pt : rt.points) {
            acsv.cell(alpha).cell(pt.threshold).cell(pt.tpr_clean).cell(pt.fpr_perturbed);
            acsv.end_row();
        }
        alpha_aucs[format_double(alpha)] = rt.auc;
    }
    ctx.emit("alpha_roc.csv", acsv);
    ctx.metrics["alpha_auc"] = alpha_aucs;
    ctx.metrics["perturb_failures"] = batch.failures;
}

// ----------------------------------------------------------------- recover

void run_recover(const FlatConfig& cfg, RunContext& ctx) {
    cfg.require_known_keys({"seed", "out", "checkpoint", "data_file", "count", "probes",
                            "threshold"});
    const Checkpoint cp = load_checkpoint_input(cfg);
    const Dataset ds = load_dataset_input(cfg, "data_file");
    const int count = std::min(cfg.get_int_or("count", 200), ds.size());
    const int probes = cfg.get_int_or("probes", 100);
    const double threshold = cfg.get_double_or("threshold", 0.0);
    record(ctx, "count", count);
    record(ctx, "probes", probes);
    record(ctx, "threshold", threshold);

    const std::uint64_t seed = seed_of(cfg);
    const PerturbedBatch batch =
        perturb_range(cp.network, ds, 0, count, PerturbationOptions{});

    CsvWriter csv({"sample_id", "rho", "flagged", "recovered_label", "original_label",
                   "correct"});
    int flagged = 0, correct = 0;
    for (int r = 0; r < batch.points.rows(); ++r) {
        const DetectionVerdict v =
            detect(cp.network, batch.points.row(r).transpose(), probes, threshold,
                   Rng::derive(seed, "detect-probes", r));
        const bool hit =
            v.perturbed && v.recovered_label && *v.recovered_label == batch.orig_predicted[r];
        csv.cell(batch.rows[r]).cell(v.rho).cell(v.perturbed)
            .cell(v.recovered_label ? std::to_string(*v.recovered_label) : std::string())
            .cell(batch.orig_predicted[r]).cell(hit);
        csv.end_row();
        if (v.perturbed) ++flagged;
        if (hit) ++correct;
    }
    ctx.emit("recovery.csv", csv);
    ctx.metrics["perturbed_total"] = static_cast<int>(batch.points.rows());
    ctx.metrics["flagged"] = flagged;
    ctx.metrics["recovered_correct"] = correct;
    if (flagged > 0)
        ctx.metrics["recovery_accuracy"] = static_cast<double>(correct) / flagged;
    else
        ctx.metrics["recovery_accuracy"] = nullptr;
    ctx.metrics["perturb_failures"] = batch.failures;
}

}  // namespace

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "generate", "train",      "perturb",    "path",   "convex-probe",
        "curvature", "shared-dirs", "robustness", "detect", "roc",
        "recover"};
    return ids;
}

std::string run_experiment(const std::string& experiment, const FlatConfig& config,
                           const fs::path& out_dir) {
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), experiment) == ids.end())
        throw ConfigError("unknown experiment id: " + experiment);

    const auto start = std::chrono::steady_clock::now();
    RunContext ctx;
    ctx.out = out_dir;
    ctx.resolved = config;
    ctx.resolved.set("out", out_dir.string());
    if (!config.has("seed")) ctx.resolved.set("seed", "0");

    if (experiment == "generate") run_generate(config, ctx);
    else if (experiment == "train") run_train(config, ctx);
    else if (experiment == "perturb") run_perturb(config, ctx);
    else if (experiment == "path") run_path(config, ctx);
    else if (experiment == "convex-probe") run_convex_probe(config, ctx);
    else if (experiment == "curvature") run_curvature(config, ctx);
    else if (experiment == "shared-dirs") run_shared_dirs(config, ctx);
    else if (experiment == "robustness") run_robustness(config, ctx);
    else if (experiment == "detect") run_detect(config, ctx);
    else if (experiment == "roc") run_roc(config, ctx);
    else if (experiment == "recover") run_recover(config, ctx);

    const auto stop = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(stop - start).count();

    // All computation succeeded; only now touch the filesystem.
    fs::create_directories(out_dir);
    for (const auto& [name, content] : ctx.files) write_text_file(out_dir / name, content);
    write_text_file(out_dir / "config.resolved.txt",
                    "experiment = " + experiment + "\n" + ctx.resolved.serialize());

    json summary;
    summary["experiment"] = experiment;
    summary["parameters"] = json::object();
    for (const auto& [k, v] : ctx.resolved.values()) summary["parameters"][k] = v;
    summary["metrics"] = ctx.metrics;
    summary["wall_time_seconds"] = wall;
    const std::string text = summary.dump(2) + "\n";
    write_text_file(out_dir / "summary.json", text);
    return text;
}

}  // namespace curvlab
