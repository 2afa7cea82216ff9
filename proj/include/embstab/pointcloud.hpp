#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace embstab {

// Embedding of a graph: row i is the vector of node i.
struct PointCloud {
    Eigen::MatrixXd points;        // n x d
    std::string graph_id;
    std::string provenance_json = "{}";

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
    bool all_finite() const { return points.allFinite(); }
};

// Text form (versioned, lossy): a one-line JSON header
//   {"format":"embstab-cloud","version":1,"graph_id":...,"n":...,"d":...,
//    "provenance":{...}}
// followed by n lines of d decimal floats.
void save_cloud_text(const PointCloud& cloud, std::ostream& out);
PointCloud load_cloud_text(std::istream& in);

// Binary form (versioned, exact): magic "ESPC", little-endian u32 version,
// u64 header length, the same JSON header, then n*d little-endian doubles in
// row-major order.
void save_cloud_binary(const PointCloud& cloud, std::ostream& out);
PointCloud load_cloud_binary(std::istream& in);

void save_cloud_file(const PointCloud& cloud, const std::string& path, bool binary);
// Sniffs the magic bytes and dispatches to the right loader.
PointCloud load_cloud_file(const std::string& path);

}  // namespace embstab
