#include "curvlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "curvlab/errors.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/textio.hpp"

namespace curvlab {

std::string serialize_dataset(const Dataset& ds) {
    std::string out = std::to_string(ds.d) + "," + std::to_string(ds.L) + "," +
                      std::to_string(ds.size()) + "\n";
    for (int r = 0; r < ds.size(); ++r) {
        out += std::to_string(ds.labels[r]);
        for (int c = 0; c < ds.d; ++c) {
            out.push_back(',');
            out += format_double(ds.X(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    write_text_file(path, serialize_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset file is empty: " + path.string());
    auto header = split(line, ',');
    if (header.size() != 3)
        throw IoError("dataset header must be 'd,L,n': " + path.string());
    Dataset ds;
    try {
        ds.d = std::stoi(header[0]);
        ds.L = std::stoi(header[1]);
    } catch (const std::exception&) {
        throw IoError("dataset header is not numeric: " + path.string());
    }
    int n = 0;
    try {
        n = std::stoi(header[2]);
    } catch (const std::exception&) {
        throw IoError("dataset header is not numeric: " + path.string());
    }
    if (ds.d <= 0 || ds.L < 2 || n < 0)
        throw IoError("dataset header values out of range: " + path.string());

    ds.X.resize(n, ds.d);
    ds.labels.reserve(n);
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= n) throw IoError("dataset has more rows than header declares");
        auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != ds.d + 1)
            throw IoError("dataset row " + std::to_string(row) + " has wrong field count");
        int label = 0;
        try {
            label = std::stoi(cells[0]);
        } catch (const std::exception&) {
            throw IoError("dataset row " + std::to_string(row) + " has non-integer label");
        }
        if (label < 0 || label >= ds.L)
            throw IoError("dataset row " + std::to_string(row) + " label out of range");
        ds.labels.push_back(label);
        for (int c = 0; c < ds.d; ++c) {
            double v = 0;
            try {
                v = std::stod(cells[c + 1]);
            } catch (const std::exception&) {
                throw IoError("dataset row " + std::to_string(row) + " has non-numeric value");
            }
            if (!std::isfinite(v))
                throw IoError("dataset row " + std::to_string(row) + " has non-finite value");
            ds.X(row, c) = v;
        }
        ++row;
    }
    if (row != n)
        throw IoError("dataset declares " + std::to_string(n) + " rows but contains " +
                      std::to_string(row));
    return ds;
}

double dataset_diameter(const Mat& X) {
    const int n = static_cast<int>(X.rows());
    double best = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            best = std::max(best, (X.row(a) - X.row(b)).norm());
    return best;
}

double median_sample_norm(const Mat& X) {
    std::vector<double> norms(X.rows());
    for (int r = 0; r < X.rows(); ++r) norms[r] = X.row(r).norm();
    std::sort(norms.begin(), norms.end());
    const std::size_t n = norms.size();
    if (n == 0) throw InvalidInput("median_sample_norm: empty set");
    return n % 2 ? norms[n / 2] : 0.5 * (norms[n / 2 - 1] + norms[n / 2]);
}

namespace {

// Balanced label sequence: counts differ by at most one, lower classes get
// the remainder.
std::vector<int> balanced_labels(int n, int L) {
    std::vector<int> labels;
    labels.reserve(n);
    for (int l = 0; l < L; ++l) {
        int count = n / L + (l < n % L ? 1 : 0);
        labels.insert(labels.end(), count, l);
    }
    return labels;
}

void fill_ambient_noise(Vec& x, int from_dim, double noise, Rng& rng) {
    for (int c = from_dim; c < x.size(); ++c) x[c] = noise * rng.normal();
}

Vec sample_blobs(int label, const DatasetSpec& spec, Rng& rng) {
    const double sep = 4.0;
    Vec x = Vec::Zero(spec.d);
    const double angle = 2.0 * M_PI * label / spec.L;
    x[0] = sep * std::cos(angle);
    if (spec.d > 1) x[1] = sep * std::sin(angle);
    for (int c = 0; c < spec.d; ++c) x[c] += spec.noise * rng.normal();
    return x;
}

Vec sample_circles(int label, const DatasetSpec& spec, Rng& rng) {
    if (spec.L != 2) throw InvalidInput("circles dataset requires L = 2");
    // class 0: disk of radius 0.8; class 1: annulus between 1.4 and 2.0.
    double radius;
    if (label == 0) {
        radius = 0.8 * std::sqrt(rng.uniform());
    } else {
        const double lo = 1.4, hi = 2.0;
        radius = std::sqrt(lo * lo + (hi * hi - lo * lo) * rng.uniform());
    }
    const double theta = 2.0 * M_PI * rng.uniform();
    Vec x = Vec::Zero(spec.d);
    x[0] = radius * std::cos(theta) + spec.noise * rng.normal();
    x[1] = radius * std::sin(theta) + spec.noise * rng.normal();
    fill_ambient_noise(x, 2, spec.noise, rng);
    return x;
}

Vec sample_moons(int label, const DatasetSpec& spec, Rng& rng) {
    if (spec.L != 2) throw InvalidInput("moons dataset requires L = 2");
    const double t = M_PI * rng.uniform();
    Vec x = Vec::Zero(spec.d);
    if (label == 0) {
        x[0] = std::cos(t);
        x[1] = std::sin(t);
    } else {
        x[0] = 1.0 - std::cos(t);
        x[1] = 0.5 - std::sin(t);
    }
    x[0] += spec.noise * rng.normal();
    x[1] += spec.noise * rng.normal();
    fill_ambient_noise(x, 2, spec.noise, rng);
    return x;
}

Vec sample_spirals(int label, const DatasetSpec& spec, Rng& rng) {
    const double t = rng.uniform(0.5, 3.0 * M_PI);
    const double radius = 1.5 * t / (3.0 * M_PI);
    const double theta = t + 2.0 * M_PI * label / spec.L;
    Vec x = Vec::Zero(spec.d);
    x[0] = radius * std::cos(theta) + spec.noise * rng.normal();
    x[1] = radius * std::sin(theta) + spec.noise * rng.normal();
    fill_ambient_noise(x, 2, spec.noise, rng);
    return x;
}

Vec sample_grid_image(int label, const DatasetSpec& spec, Rng& rng) {
    const int side = spec.image_side;
    // One bright blob whose location identifies the class; jittered by half
    // a pixel so samples within a class differ beyond additive noise.
    const double angle = 2.0 * M_PI * label / spec.L;
    const double cx = 0.5 * side + 0.28 * side * std::cos(angle) + 0.5 * rng.normal();
    const double cy = 0.5 * side + 0.28 * side * std::sin(angle) + 0.5 * rng.normal();
    const double sigma = 0.12 * side;
    Vec x(spec.d);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const double dr = r - cy;
            const double dc = c - cx;
            x[r * side + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma)) +
                              spec.noise * rng.normal();
        }
    }
    return x;
}

Dataset generate_split(const DatasetSpec& spec, int n, Rng& rng) {
    Dataset ds;
    ds.d = spec.d;
    ds.L = spec.L;
    ds.labels = balanced_labels(n, spec.L);
    rng.shuffle(ds.labels);
    ds.X.resize(n, spec.d);
    for (int r = 0; r < n; ++r) {
        Vec x;
        if (spec.kind == "blobs")
            x = sample_blobs(ds.labels[r], spec, rng);
        else if (spec.kind == "circles")
            x = sample_circles(ds.labels[r], spec, rng);
        else if (spec.kind == "moons")
            x = sample_moons(ds.labels[r], spec, rng);
        else if (spec.kind == "spirals")
            x = sample_spirals(ds.labels[r], spec, rng);
        else if (spec.kind == "grid-image")
            x = sample_grid_image(ds.labels[r], spec, rng);
        else
            throw InvalidInput("unknown dataset kind: " + spec.kind);
        ds.X.row(r) = x.transpose();
    }
    return ds;
}

}  // namespace

GeneratedDataset generate_dataset(const DatasetSpec& spec) {
    DatasetSpec s = spec;
    if (s.kind == "csv-file") {
        if (s.source_file.empty())
            throw InvalidInput("csv-file dataset requires a source file");
        GeneratedDataset out;
        Dataset full = load_dataset(s.source_file);
        if (s.n_train + s.n_val > full.size())
            throw InvalidInput("csv-file dataset smaller than requested splits");
        out.train.d = out.val.d = full.d;
        out.train.L = out.val.L = full.L;
        out.train.X = full.X.topRows(s.n_train);
        out.train.labels.assign(full.labels.begin(), full.labels.begin() + s.n_train);
        out.val.X = full.X.middleRows(s.n_train, s.n_val);
        out.val.labels.assign(full.labels.begin() + s.n_train,
                              full.labels.begin() + s.n_train + s.n_val);
        out.id = "csv-file:" + s.source_file;
        return out;
    }

    if (s.kind == "grid-image") {
        const int side = static_cast<int>(std::lround(std::sqrt(double(s.d))));
        if (side * side != s.d)
            throw InvalidInput("grid-image dataset requires d to be a perfect square");
        s.image_side = side;
    }
    if (s.d < 2) throw InvalidInput("generated datasets require d >= 2");
    if (s.L < 2) throw InvalidInput("datasets require L >= 2");

    GeneratedDataset out;
    Rng train_rng = Rng::for_purpose(s.seed, "dataset-train");
    Rng val_rng = Rng::for_purpose(s.seed, "dataset-val");
    out.train = generate_split(s, s.n_train, train_rng);
    out.val = generate_split(s, s.n_val, val_rng);
    out.id = s.kind + ":d=" + std::to_string(s.d) + ",L=" + std::to_string(s.L) +
             ",n=" + std::to_string(s.n_train) + "+" + std::to_string(s.n_val) +
             ",noise=" + format_double(s.noise) + ",seed=" + std::to_string(s.seed);
    return out;
}

}  // namespace curvlab
