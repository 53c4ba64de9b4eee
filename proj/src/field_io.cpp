#include "field_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace conevortex {

static_assert(std::endian::native == std::endian::little,
              "CVF1 writer assumes a little-endian host");

namespace {

using nlohmann::json;

void write_header(std::ofstream& os, const TorusGrid& g, const char* kind) {
    json h;
    h["magic"] = "CVF1";
    h["nx"] = g.nx;
    h["ny"] = g.ny;
    h["lx"] = g.lx;
    h["ly"] = g.ly;
    h["kind"] = kind;
    os << h.dump() << '\n';
}

void write_doubles(std::ofstream& os, const double* data, std::size_t count) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

struct Header {
    TorusGrid grid;
    std::string kind;
};

Header read_header(std::ifstream& is, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("CVF1: missing header in " + path.string());
    json h = json::parse(line);
    if (h.value("magic", "") != std::string("CVF1"))
        throw std::runtime_error("CVF1: bad magic in " + path.string());
    Header out;
    out.grid = TorusGrid(h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("lx").get<double>(),
                         h.at("ly").get<double>());
    out.kind = h.at("kind").get<std::string>();
    return out;
}

void read_doubles(std::ifstream& is, double* data, std::size_t count, const std::filesystem::path& path) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double))
        throw std::runtime_error("CVF1: truncated payload in " + path.string());
}

}  // namespace

void write_cvf1(const std::filesystem::path& path, const RealField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(os, f.grid, "real");
    write_doubles(os, f.v.data(), f.v.size());
}

void write_cvf1(const std::filesystem::path& path, const ComplexField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(os, f.grid, "complex");
    write_doubles(os, reinterpret_cast<const double*>(f.v.data()), 2 * f.v.size());
}

void write_cvf1_section_values(const std::filesystem::path& path, const ComplexSection& s) {
    ComplexField cf(s.bundle.grid);
    cf.v = s.v;
    write_cvf1(path, cf);
}

Cvf1Payload read_cvf1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const Header h = read_header(is, path);
    if (h.kind == "real") {
        RealField f(h.grid);
        read_doubles(is, f.v.data(), f.v.size(), path);
        return f;
    }
    if (h.kind == "complex") {
        ComplexField f(h.grid);
        read_doubles(is, reinterpret_cast<double*>(f.v.data()), 2 * f.v.size(), path);
        return f;
    }
    throw std::runtime_error("CVF1: unknown kind '" + h.kind + "' in " + path.string());
}

RealField read_cvf1_real(const std::filesystem::path& path) {
    Cvf1Payload p = read_cvf1(path);
    if (auto* f = std::get_if<RealField>(&p)) return std::move(*f);
    throw std::runtime_error("CVF1: expected a real field in " + path.string());
}

ComplexField read_cvf1_complex(const std::filesystem::path& path) {
    Cvf1Payload p = read_cvf1(path);
    if (auto* f = std::get_if<ComplexField>(&p)) return std::move(*f);
    throw std::runtime_error("CVF1: expected a complex field in " + path.string());
}

std::string divisor_to_json(const Divisor& d) {
    json j;
    j["points"] = json::array();
    for (const auto& p : d.points) j["points"].push_back({p[0], p[1]});
    j["multiplicities"] = d.multiplicities;
    j["degree"] = d.degree();
    return j.dump(2) + "\n";
}

Divisor divisor_from_json(const std::string& text) {
    json j = json::parse(text);
    Divisor d;
    for (const auto& p : j.at("points")) d.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    d.multiplicities = j.at("multiplicities").get<std::vector<int>>();
    if (j.contains("degree") && j.at("degree").get<int>() != d.degree())
        throw std::runtime_error("divisor JSON: degree does not match multiplicities");
    return d;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

}  // namespace conevortex
