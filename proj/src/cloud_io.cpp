#include "gngwt/cloud_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "gngwt/error.h"
#include "gngwt/spatial_index.h"

namespace gngwt {

static_assert(std::endian::native == std::endian::little,
              "binary PLY support assumes a little-endian host");

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_scalar_type(std::string_view name) {
    if (name == "char" || name == "int8") return ScalarType::Int8;
    if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
    if (name == "short" || name == "int16") return ScalarType::Int16;
    if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
    if (name == "int" || name == "int32") return ScalarType::Int32;
    if (name == "uint" || name == "uint32") return ScalarType::UInt32;
    if (name == "float" || name == "float32") return ScalarType::Float32;
    if (name == "double" || name == "float64") return ScalarType::Float64;
    return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::Int8:
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Int32:
        case ScalarType::UInt32:
        case ScalarType::Float32: return 4;
        case ScalarType::Float64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    ScalarType type = ScalarType::Float32;
    bool is_list = false;
    ScalarType count_type = ScalarType::UInt8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;

    int find(std::string_view prop) const {
        for (std::size_t i = 0; i < properties.size(); ++i) {
            if (properties[i].name == prop) return static_cast<int>(i);
        }
        return -1;
    }
};

/// One element instance: scalar values and list values, indexed like the properties.
struct PlyRecord {
    std::vector<double> scalars;
    std::vector<std::vector<double>> lists;
};

class PlyReader {
public:
    explicit PlyReader(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open '" + path.string() + "' for reading");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        data_ = std::move(ss).str();
        parse_header();
    }

    const std::vector<PlyElement>& elements() const { return elements_; }

    /// Visits every instance of every element in file order.
    template <typename Visitor>
    void read(Visitor&& visit) {
        PlyRecord record;
        for (const PlyElement& element : elements_) {
            record.scalars.assign(element.properties.size(), 0.0);
            record.lists.assign(element.properties.size(), {});
            for (std::size_t i = 0; i < element.count; ++i) {
                if (binary_) {
                    read_binary_record(element, record);
                } else {
                    read_ascii_record(element, record);
                }
                visit(element, i, record);
            }
        }
    }

private:
    [[noreturn]] void fail_line(const std::string& what) const {
        throw ParseError(path_.string() + ": line " + std::to_string(line_) + ": " + what);
    }
    [[noreturn]] void fail_byte(const std::string& what) const {
        throw ParseError(path_.string() + ": byte offset " + std::to_string(pos_) + ": " + what);
    }

    bool next_line(std::string_view& line) {
        if (pos_ >= data_.size()) return false;
        const std::size_t end = data_.find('\n', pos_);
        const std::size_t stop = end == std::string::npos ? data_.size() : end;
        line = std::string_view(data_).substr(pos_, stop - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = end == std::string::npos ? data_.size() : end + 1;
        ++line_;
        return true;
    }

    static std::vector<std::string_view> split(std::string_view line) {
        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) tokens.push_back(line.substr(i, j - i));
            i = j;
        }
        return tokens;
    }

    void parse_header() {
        std::string_view line;
        if (!next_line(line) || line != "ply") {
            fail_line("missing 'ply' magic");
        }
        bool have_format = false;
        while (true) {
            if (!next_line(line)) fail_line("unexpected end of header");
            const auto tokens = split(line);
            if (tokens.empty()) continue;
            const std::string_view key = tokens[0];
            if (key == "comment" || key == "obj_info") continue;
            if (key == "end_header") break;
            if (key == "format") {
                if (tokens.size() != 3) fail_line("malformed format line");
                if (tokens[1] == "ascii") {
                    binary_ = false;
                } else if (tokens[1] == "binary_little_endian") {
                    binary_ = true;
                } else {
                    fail_line("unsupported format '" + std::string(tokens[1]) + "'");
                }
                have_format = true;
            } else if (key == "element") {
                if (tokens.size() != 3) fail_line("malformed element line");
                PlyElement element;
                element.name = std::string(tokens[1]);
                try {
                    std::size_t used = 0;
                    element.count = std::stoull(std::string(tokens[2]), &used);
                    if (used != tokens[2].size()) throw std::invalid_argument("count");
                } catch (const std::exception&) {
                    fail_line("invalid element count");
                }
                elements_.push_back(std::move(element));
            } else if (key == "property") {
                if (elements_.empty()) fail_line("property before any element");
                PlyProperty prop;
                if (tokens.size() == 5 && tokens[1] == "list") {
                    const auto count_type = parse_scalar_type(tokens[2]);
                    const auto item_type = parse_scalar_type(tokens[3]);
                    if (!count_type || !item_type) fail_line("unknown list property type");
                    prop.is_list = true;
                    prop.count_type = *count_type;
                    prop.type = *item_type;
                    prop.name = std::string(tokens[4]);
                } else if (tokens.size() == 3) {
                    const auto type = parse_scalar_type(tokens[1]);
                    if (!type) fail_line("unknown property type '" + std::string(tokens[1]) + "'");
                    prop.type = *type;
                    prop.name = std::string(tokens[2]);
                } else {
                    fail_line("malformed property line");
                }
                elements_.back().properties.push_back(std::move(prop));
            } else {
                fail_line("unexpected header keyword '" + std::string(key) + "'");
            }
        }
        if (!have_format) fail_line("header has no format line");
    }

    double parse_number(std::string_view token) const {
        double value = 0.0;
        // std::from_chars for double is not universally available; strtod needs a terminator.
        std::string tmp(token);
        char* end = nullptr;
        value = std::strtod(tmp.c_str(), &end);
        if (end != tmp.c_str() + tmp.size()) {
            fail_line("invalid number '" + tmp + "'");
        }
        return value;
    }

    void read_ascii_record(const PlyElement& element, PlyRecord& record) {
        std::string_view line;
        std::vector<std::string_view> tokens;
        do {
            if (!next_line(line)) {
                fail_line("unexpected end of file in element '" + element.name + "'");
            }
            tokens = split(line);
        } while (tokens.empty());
        std::size_t t = 0;
        auto take = [&]() {
            if (t >= tokens.size()) fail_line("too few values for element '" + element.name + "'");
            return parse_number(tokens[t++]);
        };
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
            const PlyProperty& prop = element.properties[p];
            if (prop.is_list) {
                const double n = take();
                if (n < 0 || n != std::floor(n)) fail_line("invalid list length");
                auto& list = record.lists[p];
                list.resize(static_cast<std::size_t>(n));
                for (double& v : list) v = take();
            } else {
                record.scalars[p] = take();
            }
        }
        if (t != tokens.size()) fail_line("too many values for element '" + element.name + "'");
    }

    double read_binary_scalar(ScalarType type) {
        const std::size_t n = scalar_size(type);
        if (pos_ + n > data_.size()) fail_byte("unexpected end of file");
        const char* p = data_.data() + pos_;
        pos_ += n;
        auto load = [p]<typename T>(T) {
            T v;
            std::memcpy(&v, p, sizeof(T));
            return static_cast<double>(v);
        };
        switch (type) {
            case ScalarType::Int8: return load(std::int8_t{});
            case ScalarType::UInt8: return load(std::uint8_t{});
            case ScalarType::Int16: return load(std::int16_t{});
            case ScalarType::UInt16: return load(std::uint16_t{});
            case ScalarType::Int32: return load(std::int32_t{});
            case ScalarType::UInt32: return load(std::uint32_t{});
            case ScalarType::Float32: return load(float{});
            case ScalarType::Float64: return load(double{});
        }
        return 0.0;
    }

    void read_binary_record(const PlyElement& element, PlyRecord& record) {
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
            const PlyProperty& prop = element.properties[p];
            if (prop.is_list) {
                const double n = read_binary_scalar(prop.count_type);
                if (n < 0) fail_byte("negative list length");
                auto& list = record.lists[p];
                list.resize(static_cast<std::size_t>(n));
                for (double& v : list) v = read_binary_scalar(prop.type);
            } else {
                record.scalars[p] = read_binary_scalar(prop.type);
            }
        }
    }

public:
    std::string location() const {
        return binary_ ? "byte offset " + std::to_string(pos_) : "line " + std::to_string(line_);
    }

private:
    std::filesystem::path path_;
    std::string data_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
    bool binary_ = false;
    std::vector<PlyElement> elements_;
};

struct VertexLayout {
    int x = -1, y = -1, z = -1;
    int red = -1, green = -1, blue = -1;
    bool colored() const { return red >= 0 && green >= 0 && blue >= 0; }
};

VertexLayout vertex_layout(const PlyElement& element, const std::filesystem::path& path) {
    VertexLayout layout{element.find("x"), element.find("y"), element.find("z"),
                        element.find("red"), element.find("green"), element.find("blue")};
    if (layout.x < 0 || layout.y < 0 || layout.z < 0) {
        throw ParseError(path.string() + ": vertex element lacks x/y/z properties");
    }
    for (int idx : {layout.x, layout.y, layout.z}) {
        if (element.properties[idx].is_list) {
            throw ParseError(path.string() + ": vertex coordinate declared as list");
        }
    }
    return layout;
}

std::uint8_t to_channel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

template <typename Sink>
void read_vertices_and_faces(const std::filesystem::path& path, Sink& sink) {
    PlyReader reader(path);
    const PlyElement* vertex = nullptr;
    for (const auto& e : reader.elements()) {
        if (e.name == "vertex") vertex = &e;
    }
    if (vertex == nullptr) {
        throw ParseError(path.string() + ": no 'vertex' element");
    }
    const VertexLayout layout = vertex_layout(*vertex, path);
    sink.begin(vertex->count, layout.colored());
    reader.read([&](const PlyElement& element, std::size_t i, const PlyRecord& rec) {
        if (element.name == "vertex") {
            const Vec3 p(rec.scalars[layout.x], rec.scalars[layout.y], rec.scalars[layout.z]);
            if (!p.allFinite()) {
                throw ParseError(path.string() + ": " + reader.location() + ": vertex " +
                                 std::to_string(i) + " has a non-finite coordinate");
            }
            std::optional<Rgb> color;
            if (layout.colored()) {
                color = Rgb{to_channel(rec.scalars[layout.red]), to_channel(rec.scalars[layout.green]),
                            to_channel(rec.scalars[layout.blue])};
            }
            sink.vertex(p, color);
        } else if (element.name == "face") {
            int list = element.find("vertex_indices");
            if (list < 0) list = element.find("vertex_index");
            if (list < 0 || !element.properties[list].is_list) {
                throw ParseError(path.string() + ": face element lacks a vertex_indices list");
            }
            sink.face(rec.lists[list], reader.location());
        }
    });
}

struct CloudSink {
    PointCloud cloud;
    void begin(std::size_t n, bool colored) {
        cloud.points.reserve(n);
        if (colored) cloud.colors.reserve(n);
    }
    void vertex(const Vec3& p, const std::optional<Rgb>& c) {
        cloud.points.push_back(p);
        if (c) cloud.colors.push_back(*c);
    }
    void face(const std::vector<double>&, const std::string&) {}
};

struct MeshSink {
    std::filesystem::path path;
    TriangleMesh mesh;
    void begin(std::size_t n, bool colored) {
        mesh.vertices.reserve(n);
        if (colored) mesh.colors.reserve(n);
    }
    void vertex(const Vec3& p, const std::optional<Rgb>& c) {
        mesh.vertices.push_back(p);
        if (c) mesh.colors.push_back(*c);
    }
    void face(const std::vector<double>& idx, const std::string& where) {
        if (idx.size() < 3) {
            throw ParseError(path.string() + ": " + where + ": face with fewer than 3 vertices");
        }
        std::vector<int> corners;
        for (double v : idx) {
            if (v < 0 || v >= static_cast<double>(mesh.vertices.size())) {
                throw ParseError(path.string() + ": " + where + ": face index out of range");
            }
            corners.push_back(static_cast<int>(v));
        }
        for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
            mesh.faces.push_back({corners[0], corners[k], corners[k + 1]});
        }
    }
};

std::ofstream open_for_writing(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_ply(const std::vector<Vec3>& points, const std::vector<Rgb>& colors,
               const std::vector<Face>* faces, const std::filesystem::path& path, PlyFormat format) {
    std::ofstream out = open_for_writing(path);
    const bool binary = format == PlyFormat::BinaryLittleEndian;
    const bool colored = !colors.empty();
    out << "ply\n"
        << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
        << "element vertex " << points.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n";
    if (colored) {
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    }
    if (faces != nullptr) {
        out << "element face " << faces->size() << "\n"
            << "property list uchar int vertex_indices\n";
    }
    out << "end_header\n";

    if (binary) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (int k = 0; k < 3; ++k) put(out, static_cast<float>(points[i][k]));
            if (colored) {
                put(out, colors[i].r);
                put(out, colors[i].g);
                put(out, colors[i].b);
            }
        }
        if (faces != nullptr) {
            for (const Face& f : *faces) {
                put(out, std::uint8_t{3});
                for (int v : f) put(out, static_cast<std::int32_t>(v));
            }
        }
    } else {
        char buf[128];
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", static_cast<double>(static_cast<float>(points[i].x())),
                          static_cast<double>(static_cast<float>(points[i].y())),
                          static_cast<double>(static_cast<float>(points[i].z())));
            out << buf;
            if (colored) {
                out << ' ' << int(colors[i].r) << ' ' << int(colors[i].g) << ' ' << int(colors[i].b);
            }
            out << '\n';
        }
        if (faces != nullptr) {
            for (const Face& f : *faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

}  // namespace

void validate(const PointCloud& cloud) {
    if (cloud.has_colors() && cloud.colors.size() != cloud.points.size()) {
        throw InvalidArgument("point cloud has " + std::to_string(cloud.colors.size()) + " colors for " +
                              std::to_string(cloud.points.size()) + " points");
    }
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (!cloud.points[i].allFinite()) {
            throw InvalidArgument("point " + std::to_string(i) + " has a non-finite coordinate");
        }
    }
}

PointCloud load_ply(const std::filesystem::path& path) {
    CloudSink sink;
    read_vertices_and_faces(path, sink);
    return std::move(sink.cloud);
}

TriangleMesh load_mesh_ply(const std::filesystem::path& path) {
    MeshSink sink{path, {}};
    read_vertices_and_faces(path, sink);
    return std::move(sink.mesh);
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
    validate(cloud);
    write_ply(cloud.points, cloud.colors, nullptr, path, format);
}

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyFormat format) {
    write_ply(mesh.vertices, mesh.colors, &mesh.faces, path, format);
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out = open_for_writing(path);
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const Face& f : mesh.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") {
        save_obj(mesh, path);
    } else if (ext == ".ply") {
        save_ply(mesh, path);
    } else {
        throw InvalidArgument("unsupported mesh extension '" + ext + "' (expected .ply or .obj)");
    }
}

double bounding_box_diagonal(const std::vector<Vec3>& points) {
    if (points.empty()) return 0.0;
    Vec3 lo = points.front();
    Vec3 hi = lo;
    for (const Vec3& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

double median_nn_spacing(const PointCloud& cloud) {
    if (cloud.size() < 2) {
        throw InvalidArgument("median_nn_spacing needs at least two points");
    }
    const SpatialIndex index(cloud);
    std::vector<double> dist(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        dist[i] = index.nearest_excluding(cloud.points[i], static_cast<int>(i)).distance();
    }
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
    if (dist.size() % 2 == 1) return dist[mid];
    const double upper = dist[mid];
    const double lower = *std::max_element(dist.begin(), dist.begin() + mid);
    return 0.5 * (lower + upper);
}

}  // namespace gngwt
