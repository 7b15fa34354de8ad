#include "pairpose/cloud_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace pairpose::io {
namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream f(path, mode);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

json read_json_file(const std::string& path) {
    auto f = open_in(path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

} // namespace

PointCloud read_ply(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line != "ply") throw IoError(path + ": not a PLY file");

    std::size_t n_vertices = 0;
    std::vector<std::string> props;
    bool in_vertex_element = false;
    bool saw_format = false;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "comment") continue;
        if (tok == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "ascii") throw IoError(path + ": only ascii PLY supported");
            saw_format = true;
        } else if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            ss >> name >> count;
            if (name == "vertex") {
                n_vertices = count;
                in_vertex_element = true;
            } else {
                throw IoError(path + ": unsupported element '" + name + "'");
            }
        } else if (tok == "property") {
            if (!in_vertex_element) throw IoError(path + ": property outside vertex element");
            std::string type, name;
            ss >> type >> name;
            if (type == "list") throw IoError(path + ": list properties unsupported");
            props.push_back(name);
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!saw_format) throw IoError(path + ": missing format line");
    if (n_vertices == 0) throw IoError(path + ": empty vertex element");

    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (int i = 0; i < static_cast<int>(props.size()); ++i) {
        if (props[i] == "x") ix = i;
        else if (props[i] == "y") iy = i;
        else if (props[i] == "z") iz = i;
        else if (props[i] == "nx") inx = i;
        else if (props[i] == "ny") iny = i;
        else if (props[i] == "nz") inz = i;
        else throw IoError(path + ": unsupported property '" + props[i] + "'");
    }
    if (ix < 0 || iy < 0 || iz < 0) throw IoError(path + ": missing x/y/z properties");
    const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

    PointCloud cloud;
    cloud.points.reserve(n_vertices);
    if (has_normals) cloud.normals.reserve(n_vertices);
    std::vector<double> row(props.size());
    for (std::size_t v = 0; v < n_vertices; ++v) {
        for (std::size_t c = 0; c < props.size(); ++c) {
            if (!(f >> row[c])) throw IoError(path + ": truncated vertex data");
        }
        cloud.points.emplace_back(row[ix], row[iy], row[iz]);
        if (has_normals) cloud.normals.emplace_back(row[inx], row[iny], row[inz]);
    }
    return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
    auto f = open_out(path);
    const bool with_normals = cloud.has_normals();
    f << "ply\nformat ascii 1.0\n";
    f << "element vertex " << cloud.size() << "\n";
    f << "property float x\nproperty float y\nproperty float z\n";
    if (with_normals) f << "property float nx\nproperty float ny\nproperty float nz\n";
    f << "end_header\n";
    char buf[256];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (with_normals) {
            const Vec3& n = cloud.normals[i];
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g\n",
                          p.x(), p.y(), p.z(), n.x(), n.y(), n.z());
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        }
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

void read_depth(const std::string& bin_path, const std::string& json_path,
                DepthMap& depth, CameraIntrinsics& k) {
    const json header = read_json_file(json_path);
    for (const char* key : {"width", "height", "fx", "fy", "cx", "cy"}) {
        if (!header.contains(key)) throw IoError(json_path + ": missing key '" + key + "'");
    }
    depth.width = header["width"].get<int>();
    depth.height = header["height"].get<int>();
    if (depth.width <= 0 || depth.height <= 0) throw IoError(json_path + ": bad dimensions");
    k.fx = header["fx"].get<double>();
    k.fy = header["fy"].get<double>();
    k.cx = header["cx"].get<double>();
    k.cy = header["cy"].get<double>();

    auto f = open_in(bin_path, std::ios::binary);
    const std::size_t n = static_cast<std::size_t>(depth.width) * depth.height;
    depth.values.resize(n);
    f.read(reinterpret_cast<char*>(depth.values.data()),
           static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::size_t>(f.gcount()) != n * sizeof(float)) {
        throw IoError(bin_path + ": truncated depth data");
    }
}

void write_depth(const std::string& bin_path, const std::string& json_path,
                 const DepthMap& depth, const CameraIntrinsics& k) {
    json header = {{"width", depth.width}, {"height", depth.height},
                   {"fx", k.fx},           {"fy", k.fy},
                   {"cx", k.cx},           {"cy", k.cy}};
    open_out(json_path) << header.dump(2) << "\n";
    auto f = open_out(bin_path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(depth.values.data()),
            static_cast<std::streamsize>(depth.values.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + bin_path);
}

BinaryMask read_pgm_mask(const std::string& path) {
    auto f = open_in(path, std::ios::binary);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw IoError(path + ": not a P5 PGM");
    auto next_int = [&](int& out) {
        // skip whitespace and '#' comments
        for (;;) {
            int c = f.peek();
            if (c == '#') {
                std::string junk;
                std::getline(f, junk);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        if (!(f >> out)) throw IoError(path + ": malformed PGM header");
    };
    int w = 0, h = 0, maxval = 0;
    next_int(w);
    next_int(h);
    next_int(maxval);
    if (w <= 0 || h <= 0) throw IoError(path + ": bad PGM dimensions");
    if (maxval <= 0 || maxval > 255) throw IoError(path + ": only 8-bit PGM supported");
    f.get(); // single whitespace after maxval

    BinaryMask mask;
    mask.width = w;
    mask.height = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::uint8_t> raw(n);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(f.gcount()) != n) throw IoError(path + ": truncated PGM data");
    mask.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) mask.bits[i] = raw[i] != 0 ? 1 : 0;
    return mask;
}

void write_pgm_mask(const std::string& path, const BinaryMask& mask) {
    auto f = open_out(path, std::ios::binary);
    f << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<std::uint8_t> raw(mask.bits.size());
    for (std::size_t i = 0; i < mask.bits.size(); ++i) raw[i] = mask.bits[i] ? 255 : 0;
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoError("write failed: " + path);
}

Eigen::MatrixXd read_matrix(const std::string& bin_path, const std::string& json_path) {
    const json header = read_json_file(json_path);
    if (!header.contains("rows") || !header.contains("cols")) {
        throw IoError(json_path + ": missing 'rows'/'cols'");
    }
    const auto rows = header["rows"].get<Eigen::Index>();
    const auto cols = header["cols"].get<Eigen::Index>();
    if (rows <= 0 || cols <= 0) throw IoError(json_path + ": bad matrix dimensions");

    auto f = open_in(bin_path, std::ios::binary);
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<float> raw(n);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::size_t>(f.gcount()) != n * sizeof(float)) {
        throw IoError(bin_path + ": truncated matrix data");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = raw[static_cast<std::size_t>(r) * cols + c];
    return m;
}

void write_matrix(const std::string& bin_path, const std::string& json_path,
                  const Eigen::MatrixXd& m) {
    nlohmann::json header = {{"rows", m.rows()}, {"cols", m.cols()}};
    open_out(json_path) << header.dump(2) << "\n";
    auto f = open_out(bin_path, std::ios::binary);
    std::vector<float> raw(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            raw[static_cast<std::size_t>(r) * m.cols() + c] = static_cast<float>(m(r, c));
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!f) throw IoError("write failed: " + bin_path);
}

} // namespace pairpose::io
