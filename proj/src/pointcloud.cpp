#include "embstab/pointcloud.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embstab/errors.hpp"

namespace embstab {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json make_header(const PointCloud& cloud) {
    nlohmann::json header;
    header["format"] = "embstab-cloud";
    header["version"] = kVersion;
    header["graph_id"] = cloud.graph_id;
    header["n"] = cloud.points.rows();
    header["d"] = cloud.points.cols();
    header["provenance"] = nlohmann::json::parse(cloud.provenance_json);
    return header;
}

nlohmann::json parse_header(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad cloud header: ") + e.what());
    }
}

PointCloud cloud_from_header(const nlohmann::json& header) {
    if (header.value("format", "") != "embstab-cloud")
        throw ParseError("not an embstab cloud header");
    if (header.value("version", 0u) != kVersion)
        throw ParseError("unsupported cloud format version");
    PointCloud cloud;
    cloud.graph_id = header.value("graph_id", "");
    cloud.provenance_json = header.value("provenance", nlohmann::json::object()).dump();
    cloud.points.resize(header.at("n").get<Eigen::Index>(),
                        header.at("d").get<Eigen::Index>());
    return cloud;
}

}  // namespace

void save_cloud_text(const PointCloud& cloud, std::ostream& out) {
    out << make_header(cloud).dump() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < cloud.points.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", cloud.points(i, j));
            if (j > 0) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

PointCloud load_cloud_text(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing cloud header");
    PointCloud cloud = cloud_from_header(parse_header(line));
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        if (!std::getline(in, line))
            throw ParseError("truncated cloud: expected more rows", i + 2);
        std::istringstream row(line);
        for (Eigen::Index j = 0; j < cloud.points.cols(); ++j) {
            if (!(row >> cloud.points(i, j)))
                throw ParseError("bad float in cloud row", i + 2);
        }
    }
    return cloud;
}

void save_cloud_binary(const PointCloud& cloud, std::ostream& out) {
    // Little-endian layout; this project targets little-endian hosts.
    const std::string header = make_header(cloud).dump();
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_len = header.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
        for (Eigen::Index j = 0; j < cloud.points.cols(); ++j) {
            const double v = cloud.points(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

PointCloud load_cloud_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("not an embstab binary cloud (bad magic)");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kVersion)
        throw ParseError("unsupported cloud format version");
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw ParseError("truncated cloud header");
    PointCloud cloud = cloud_from_header(parse_header(header_text));
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
        for (Eigen::Index j = 0; j < cloud.points.cols(); ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            cloud.points(i, j) = v;
        }
    if (!in) throw ParseError("truncated cloud data");
    return cloud;
}

void save_cloud_file(const PointCloud& cloud, const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open " + path + " for writing");
    if (binary)
        save_cloud_binary(cloud, out);
    else
        save_cloud_text(cloud, out);
    if (!out) throw IoError("write failed: " + path);
}

PointCloud load_cloud_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    in.seekg(0);
    if (std::memcmp(magic, kMagic, 4) == 0) return load_cloud_binary(in);
    return load_cloud_text(in);
}

}  // namespace embstab
