#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "spintomo/harmonics.hpp"
#include "spintomo/sinogram.hpp"
#include "spintomo/volume.hpp"

namespace spintomo {

class io_error : public std::runtime_error {
public:
    enum class Kind { open_failure, magic_mismatch, malformed_header, truncated_payload };

    io_error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

// All multi-byte numeric payload is little-endian on disk regardless of host.
inline void put_f64(std::ostream& os, double v) {
    auto u = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline double get_f64(std::istream& is, const char* what) {
    char b[8];
    if (!is.read(b, 8))
        throw io_error(io_error::Kind::truncated_payload, std::string("truncated payload: ") + what);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(u);
}

inline void put_f64_block(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) put_f64(os, x);
}

inline void get_f64_block(std::istream& is, std::vector<double>& v, const char* what) {
    for (double& x : v) x = get_f64(is, what);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error(io_error::Kind::open_failure, "cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error(io_error::Kind::open_failure, "cannot open for reading: " + path);
    return is;
}

inline void expect_magic(std::istream& is, const std::string& magic, const std::string& path) {
    std::string line;
    if (!std::getline(is, line) || line != magic.substr(0, magic.size() - 1))
        throw io_error(io_error::Kind::magic_mismatch, "bad magic in " + path);
}

inline std::string header_line(std::istream& is, const std::string& path) {
    std::string line;
    if (!std::getline(is, line))
        throw io_error(io_error::Kind::malformed_header, "missing header line in " + path);
    return line;
}

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

// --- volume format: "SPNVOL1\n" + "nx ny nz ox oy oz spacing\n" + f64 payload

inline void write_volume(const Volume& v, const std::string& path) {
    auto os = detail::open_out(path);
    os << "SPNVOL1\n";
    os << v.nx << ' ' << v.ny << ' ' << v.nz << ' ' << detail::fmt_double(v.origin.x) << ' '
       << detail::fmt_double(v.origin.y) << ' ' << detail::fmt_double(v.origin.z) << ' '
       << detail::fmt_double(v.spacing) << '\n';
    detail::put_f64_block(os, v.values);
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

inline Volume read_volume(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "SPNVOL1\n", path);
    std::istringstream hdr(detail::header_line(is, path));
    int nx, ny, nz;
    Vec3 o;
    double spacing;
    if (!(hdr >> nx >> ny >> nz >> o.x >> o.y >> o.z >> spacing) || nx < 1 || ny < 1 || nz < 1 ||
        !(spacing > 0.0))
        throw io_error(io_error::Kind::malformed_header, "malformed volume header in " + path);
    Volume v(nx, ny, nz, o, spacing);
    detail::get_f64_block(is, v.values, "volume payload");
    return v;
}

// --- sinogram format: "SPNSIN1\n" + "ns nlat nlon\n" + s values + colatitudes
// + latitude weights + longitudes + payload (s-major, then lat, then lon)

inline void write_sinogram(const Sinogram& g, const std::string& path) {
    auto os = detail::open_out(path);
    os << "SPNSIN1\n";
    os << g.n_s() << ' ' << g.grid.n_lat << ' ' << g.grid.n_lon << '\n';
    detail::put_f64_block(os, g.s_values);
    detail::put_f64_block(os, g.grid.colat);
    detail::put_f64_block(os, g.grid.lat_weight);
    detail::put_f64_block(os, g.grid.lon);
    detail::put_f64_block(os, g.values);
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

inline Sinogram read_sinogram(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "SPNSIN1\n", path);
    std::istringstream hdr(detail::header_line(is, path));
    std::size_t ns;
    int nlat, nlon;
    if (!(hdr >> ns >> nlat >> nlon) || ns < 1 || nlat < 1 || nlon < 1)
        throw io_error(io_error::Kind::malformed_header, "malformed sinogram header in " + path);
    Sinogram g;
    g.s_values.resize(ns);
    g.grid.n_lat = nlat;
    g.grid.n_lon = nlon;
    g.grid.colat.resize(nlat);
    g.grid.lat_weight.resize(nlat);
    g.grid.lon.resize(nlon);
    detail::get_f64_block(is, g.s_values, "s values");
    detail::get_f64_block(is, g.grid.colat, "colatitudes");
    detail::get_f64_block(is, g.grid.lat_weight, "latitude weights");
    detail::get_f64_block(is, g.grid.lon, "longitudes");
    g.grid.rebuild_units();
    g.ds = ns > 1 ? g.s_values[1] - g.s_values[0] : 1.0;
    g.values.resize(ns * g.grid.size());
    detail::get_f64_block(is, g.values, "sinogram payload");
    return g;
}

// --- harmonic stack format: "SPNHRM1\n" + "ns L\n" + per-slice packed
// (l, m >= 0) complex pairs; m < 0 entries are implied by the real-data
// symmetry c[l][-m] = (-1)^m conj(c[l][m])

inline void write_harmonic_stack(const HarmonicStack& h, const std::string& path) {
    auto os = detail::open_out(path);
    os << "SPNHRM1\n";
    os << h.slices.size() << ' ' << h.L << '\n';
    for (const auto& slice : h.slices) {
        if (slice.L != h.L)
            throw std::invalid_argument("write_harmonic_stack: slice band limit mismatch");
        for (int l = 0; l <= h.L; ++l)
            for (int m = 0; m <= l; ++m) {
                detail::put_f64(os, slice.at(l, m).real());
                detail::put_f64(os, slice.at(l, m).imag());
            }
    }
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

inline HarmonicStack read_harmonic_stack(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "SPNHRM1\n", path);
    std::istringstream hdr(detail::header_line(is, path));
    std::size_t ns;
    int L;
    if (!(hdr >> ns >> L) || L < 0)
        throw io_error(io_error::Kind::malformed_header, "malformed harmonic header in " + path);
    HarmonicStack h;
    h.L = L;
    h.slices.reserve(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        HarmonicCoeffs c(L);
        for (int l = 0; l <= L; ++l)
            for (int m = 0; m <= l; ++m) {
                double re = detail::get_f64(is, "harmonic payload");
                double im = detail::get_f64(is, "harmonic payload");
                c.at(l, m) = Complex(re, im);
                if (m > 0) {
                    double ph = (m % 2 == 0) ? 1.0 : -1.0;
                    c.at(l, -m) = ph * Complex(re, -im);
                }
            }
        h.slices.push_back(std::move(c));
    }
    return h;
}

// --- maximum-intensity projection as binary 16-bit PGM (P5, maxval 65535,
// big-endian samples), min-max normalized

enum class Axis { x, y, z };

inline Axis parse_axis(const std::string& s) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw std::invalid_argument("axis must be x, y or z");
}

inline void write_mip(const Volume& v, Axis axis, const std::string& path) {
    int w, h;
    switch (axis) {
        case Axis::x: w = v.ny; h = v.nz; break;
        case Axis::y: w = v.nx; h = v.nz; break;
        default: w = v.nx; h = v.ny; break;
    }
    std::vector<double> img(static_cast<std::size_t>(w) * h,
                            -std::numeric_limits<double>::infinity());
    for (int k = 0; k < v.nz; ++k)
        for (int j = 0; j < v.ny; ++j)
            for (int i = 0; i < v.nx; ++i) {
                std::size_t p;
                switch (axis) {
                    case Axis::x: p = static_cast<std::size_t>(k) * w + j; break;
                    case Axis::y: p = static_cast<std::size_t>(k) * w + i; break;
                    default: p = static_cast<std::size_t>(j) * w + i; break;
                }
                img[p] = std::max(img[p], v.at(i, j, k));
            }
    double lo = *std::min_element(img.begin(), img.end());
    double hi = *std::max_element(img.begin(), img.end());
    double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;  // constant image -> zeros
    auto os = detail::open_out(path);
    os << "P5\n" << w << ' ' << h << "\n65535\n";
    for (double p : img) {
        auto q = static_cast<std::uint16_t>(std::lround((p - lo) * scale));
        char b[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};  // big-endian
        os.write(b, 2);
    }
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

// --- line profile as CSV, max-normalized

struct LineSpec {
    Vec3 a{};
    Vec3 b{};
    int samples = 64;
};

inline void write_profile(const Volume& v, const LineSpec& line, const std::string& path) {
    if (line.samples < 2) throw std::invalid_argument("write_profile: need at least 2 samples");
    std::vector<double> vals(line.samples);
    for (int i = 0; i < line.samples; ++i) {
        double t = static_cast<double>(i) / (line.samples - 1);
        Vec3 p = line.a + t * (line.b - line.a);
        if (!trilinear_stencil(v, p).inside)
            throw std::invalid_argument("write_profile: line leaves the grid");
        vals[i] = sample_trilinear(v, p);
    }
    double peak = 0.0;
    for (double x : vals) peak = std::max(peak, std::abs(x));
    auto os = detail::open_out(path);
    os << "parameter,value\n";
    os.precision(17);
    for (int i = 0; i < line.samples; ++i) {
        double t = static_cast<double>(i) / (line.samples - 1);
        os << t << ',' << (peak > 0.0 ? vals[i] / peak : 0.0) << '\n';
    }
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

// --- flat "key = value" config text, '#' comments

inline std::map<std::string, std::string> parse_config(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
        while (!s.empty() && issp(s.front())) s.erase(s.begin());
        while (!s.empty() && issp(s.back())) s.pop_back();
        return s;
    };
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw io_error(io_error::Kind::malformed_header, "config line missing '=': " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> read_config(const std::string& path) {
    auto is = detail::open_in(path);
    return parse_config(is);
}

inline void write_config(const std::map<std::string, std::string>& kv, const std::string& path) {
    auto os = detail::open_out(path);
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    if (!os) throw io_error(io_error::Kind::open_failure, "write failed: " + path);
}

}  // namespace spintomo
