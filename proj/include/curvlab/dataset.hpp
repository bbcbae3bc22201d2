#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "curvlab/classifier.hpp"

namespace curvlab {

// Labeled point set. File format: header line "d,L,n" followed by n rows
// "label,x_1,...,x_d".
struct Dataset {
    int d = 0;
    int L = 0;
    Mat X;                    // n x d, one sample per row
    std::vector<int> labels;  // values in [0, L)

    int size() const { return static_cast<int>(labels.size()); }
    Vec sample(int idx) const { return X.row(idx).transpose(); }
};

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
std::string serialize_dataset(const Dataset& ds);

// Largest pairwise distance; sets the path-validation sampling scale.
double dataset_diameter(const Mat& X);

double median_sample_norm(const Mat& X);

struct DatasetSpec {
    std::string kind;  // blobs | circles | moons | spirals | grid-image | csv-file
    int d = 2;
    int L = 2;
    int n_train = 1000;
    int n_val = 500;
    double noise = 0.1;
    std::uint64_t seed = 0;
    std::string source_file;  // csv-file kind only
    int image_side = 0;       // derived for grid-image
};

struct GeneratedDataset {
    Dataset train;
    Dataset val;
    std::string id;  // stable description embedded in checkpoints
};

GeneratedDataset generate_dataset(const DatasetSpec& spec);

}  // namespace curvlab
