#include "aniso/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "aniso/errors.hpp"

namespace aniso {

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("rename to " + path + " failed: " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void dump_rec(const nlohmann::json& j, int indent, std::string& out) {
    const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + nlohmann::json(it.key()).dump() + ": ";
            dump_rec(it.value(), indent + 1, out);
        }
        out += "\n" + close + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump_rec(j[i], indent + 1, out);
        }
        out += "\n" + close + "]";
    } else if (j.is_number_float()) {
        const double x = j.get<double>();
        out += std::isfinite(x) ? fmt17(x) : "null";
    } else {
        out += j.dump();
    }
}

} // namespace

std::string dump_json(const nlohmann::json& j) {
    std::string out;
    dump_rec(j, 0, out);
    out += '\n';
    return out;
}

std::string obj_string(const std::vector<Eigen::Vector3d>& vertices,
                       const std::vector<std::array<int, 3>>& faces) {
    std::string s;
    s.reserve(vertices.size() * 60 + faces.size() * 24);
    for (const auto& v : vertices) {
        s += "v " + fmt17(v.x()) + ' ' + fmt17(v.y()) + ' ' + fmt17(v.z()) + '\n';
    }
    for (const auto& f : faces) {
        s += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
             std::to_string(f[2] + 1) + '\n';
    }
    return s;
}

ObjData parse_obj(const std::string& text) {
    ObjData d;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw ValidationError("bad vertex record at line " + std::to_string(lineno));
            d.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                int k = std::stoi(tok.substr(0, tok.find('/')));
                if (k < 0) k = static_cast<int>(d.vertices.size()) + k + 1;
                idx.push_back(k - 1);
            }
            if (idx.size() < 3) throw ValidationError("face with fewer than 3 vertices at line " + std::to_string(lineno));
            for (size_t i = 1; i + 1 < idx.size(); ++i) d.faces.push_back({idx[0], idx[i], idx[i + 1]});
        }
    }
    for (const auto& f : d.faces)
        for (int k : f)
            if (k < 0 || k >= static_cast<int>(d.vertices.size()))
                throw ValidationError("face index out of range");
    return d;
}

} // namespace aniso
