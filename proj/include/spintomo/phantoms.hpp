#pragma once

#include <map>
#include <sstream>
#include <string>

#include "spintomo/harmonics.hpp"
#include "spintomo/volume.hpp"

namespace spintomo {

/// Declarative description of a test density; serializable as key = value
/// text so runs can be reproduced from a small config file.
struct PhantomSpec {
    enum class Kind { bead, spherical_shells, layered_planes, custom_radial, random_bandlimited };

    Kind kind = Kind::bead;

    // bead
    Vec3 center{0.45, 0.0, 0.0};
    double radius = 0.072;
    double value = 1.0;

    // spherical_shells / layered_planes
    double r0 = 0.36, r1 = 0.72;
    int n_layers = 6;
    double v_low = 1.0, v_high = 2.0;
    Vec3 cap_direction{1.0, 0.0, 0.0};
    double cap_halfangle = 40.0 * pi / 180.0;
    Vec3 normal{1.0, 0.0, 0.0};
    double spacing = 0.06;
    Vec3 box_center{0.48, 0.0, 0.0};
    Vec3 box_half{0.18, 0.3, 0.3};

    // custom_radial
    double profile_center = 0.5;
    double profile_width = 0.1;

    // random_bandlimited
    int band_limit = 6;
    unsigned long long seed = 0;
    double amplitude = 1.0;

    static Kind parse_kind(const std::string& s) {
        if (s == "bead") return Kind::bead;
        if (s == "spherical_shells") return Kind::spherical_shells;
        if (s == "layered_planes") return Kind::layered_planes;
        if (s == "custom_radial") return Kind::custom_radial;
        if (s == "random_bandlimited") return Kind::random_bandlimited;
        throw std::invalid_argument("unknown phantom kind: " + s);
    }

    static std::string kind_name(Kind k) {
        switch (k) {
            case Kind::bead: return "bead";
            case Kind::spherical_shells: return "spherical_shells";
            case Kind::layered_planes: return "layered_planes";
            case Kind::custom_radial: return "custom_radial";
            case Kind::random_bandlimited: return "random_bandlimited";
        }
        return "?";
    }

    std::map<std::string, std::string> to_config() const;
    static PhantomSpec from_config(const std::map<std::string, std::string>& kv);
};

namespace detail {

inline std::string vec_to_string(const Vec3& v) {
    std::ostringstream os;
    os.precision(17);
    os << v.x << ' ' << v.y << ' ' << v.z;
    return os.str();
}

inline Vec3 vec_from_string(const std::string& s) {
    std::istringstream is(s);
    Vec3 v;
    if (!(is >> v.x >> v.y >> v.z)) throw std::invalid_argument("bad vector value: " + s);
    return v;
}

template <typename T>
std::string num_to_string(T v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline std::map<std::string, std::string> PhantomSpec::to_config() const {
    using detail::num_to_string;
    using detail::vec_to_string;
    std::map<std::string, std::string> kv;
    kv["kind"] = kind_name(kind);
    kv["center"] = vec_to_string(center);
    kv["radius"] = num_to_string(radius);
    kv["value"] = num_to_string(value);
    kv["r0"] = num_to_string(r0);
    kv["r1"] = num_to_string(r1);
    kv["n_layers"] = num_to_string(n_layers);
    kv["v_low"] = num_to_string(v_low);
    kv["v_high"] = num_to_string(v_high);
    kv["cap_direction"] = vec_to_string(cap_direction);
    kv["cap_halfangle"] = num_to_string(cap_halfangle);
    kv["normal"] = vec_to_string(normal);
    kv["spacing"] = num_to_string(spacing);
    kv["box_center"] = vec_to_string(box_center);
    kv["box_half"] = vec_to_string(box_half);
    kv["profile_center"] = num_to_string(profile_center);
    kv["profile_width"] = num_to_string(profile_width);
    kv["band_limit"] = num_to_string(band_limit);
    kv["seed"] = num_to_string(seed);
    kv["amplitude"] = num_to_string(amplitude);
    return kv;
}

inline PhantomSpec PhantomSpec::from_config(const std::map<std::string, std::string>& kv) {
    PhantomSpec s;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("kind")) s.kind = parse_kind(*v);
    if (auto* v = get("center")) s.center = detail::vec_from_string(*v);
    if (auto* v = get("radius")) s.radius = std::stod(*v);
    if (auto* v = get("value")) s.value = std::stod(*v);
    if (auto* v = get("r0")) s.r0 = std::stod(*v);
    if (auto* v = get("r1")) s.r1 = std::stod(*v);
    if (auto* v = get("n_layers")) s.n_layers = std::stoi(*v);
    if (auto* v = get("v_low")) s.v_low = std::stod(*v);
    if (auto* v = get("v_high")) s.v_high = std::stod(*v);
    if (auto* v = get("cap_direction")) s.cap_direction = detail::vec_from_string(*v);
    if (auto* v = get("cap_halfangle")) s.cap_halfangle = std::stod(*v);
    if (auto* v = get("normal")) s.normal = detail::vec_from_string(*v);
    if (auto* v = get("spacing")) s.spacing = std::stod(*v);
    if (auto* v = get("box_center")) s.box_center = detail::vec_from_string(*v);
    if (auto* v = get("box_half")) s.box_half = detail::vec_from_string(*v);
    if (auto* v = get("profile_center")) s.profile_center = std::stod(*v);
    if (auto* v = get("profile_width")) s.profile_width = std::stod(*v);
    if (auto* v = get("band_limit")) s.band_limit = std::stoi(*v);
    if (auto* v = get("seed")) s.seed = std::stoull(*v);
    if (auto* v = get("amplitude")) s.amplitude = std::stod(*v);
    return s;
}

/// Indicator of a ball, sampled at voxel centres.  The ball must sit inside
/// the hollow-ball support shell.
inline Volume bead(const Vec3& center, double radius, double value, const Volume& tmpl,
                   const HollowBall& domain) {
    if (!(radius > 0.0)) throw std::invalid_argument("bead: radius must be > 0");
    double rc = norm(center);
    if (rc - radius <= domain.inner || rc + radius >= domain.outer)
        throw std::invalid_argument("bead: ball not inside the hollow-ball support");
    Volume out = tmpl;
    out.values.assign(out.size(), 0.0);
    double r2 = radius * radius;
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i)
                if (norm2(out.center(i, j, k) - center) <= r2) out.at(i, j, k) = value;
    return out;
}

/// Concentric equal-thickness shells with alternating values, restricted to
/// the spherical cap about cap_direction.
inline Volume spherical_shells(double r0, double r1, int n_layers, double v_low, double v_high,
                               const Vec3& cap_direction, double cap_halfangle, const Volume& tmpl,
                               const HollowBall& domain) {
    if (!(domain.inner < r0 && r0 < r1 && r1 < domain.outer))
        throw std::invalid_argument("spherical_shells: radii not inside the support shell");
    if (n_layers < 2) throw std::invalid_argument("spherical_shells: n_layers must be >= 2");
    Vec3 axis = normalized(cap_direction);
    double cos_cap = std::cos(cap_halfangle);
    double thickness = (r1 - r0) / n_layers;
    Volume out = tmpl;
    out.values.assign(out.size(), 0.0);
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i) {
                Vec3 p = out.center(i, j, k);
                double rho = norm(p);
                if (rho < r0 || rho >= r1) continue;
                if (dot(p, axis) < cos_cap * rho) continue;
                int layer = static_cast<int>((rho - r0) / thickness);
                if (layer >= n_layers) layer = n_layers - 1;
                out.at(i, j, k) = (layer % 2 == 0) ? v_low : v_high;
            }
    return out;
}

/// Alternating-value slabs orthogonal to `normal`, clipped to an axis-aligned
/// box that must lie inside the support shell.
inline Volume layered_planes(const Vec3& normal, double spacing, int n_layers, double v_low,
                             double v_high, const Vec3& box_center, const Vec3& box_half,
                             const Volume& tmpl, const HollowBall& domain) {
    if (n_layers < 2) throw std::invalid_argument("layered_planes: n_layers must be >= 2");
    if (!(spacing > 0.0)) throw std::invalid_argument("layered_planes: spacing must be > 0");
    // farthest corner and closest point of the box decide the shell fit
    double far2 = 0.0;
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1}) {
                Vec3 c{box_center.x + sx * box_half.x, box_center.y + sy * box_half.y,
                       box_center.z + sz * box_half.z};
                far2 = std::max(far2, norm2(c));
            }
    Vec3 closest{std::clamp(0.0, box_center.x - box_half.x, box_center.x + box_half.x),
                 std::clamp(0.0, box_center.y - box_half.y, box_center.y + box_half.y),
                 std::clamp(0.0, box_center.z - box_half.z, box_center.z + box_half.z)};
    if (std::sqrt(far2) >= domain.outer || norm(closest) <= domain.inner)
        throw std::invalid_argument("layered_planes: box not inside the support shell");

    Vec3 n = normalized(normal);
    double span = n_layers * spacing;
    Volume out = tmpl;
    out.values.assign(out.size(), 0.0);
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i) {
                Vec3 p = out.center(i, j, k);
                Vec3 d = p - box_center;
                if (std::abs(d.x) > box_half.x || std::abs(d.y) > box_half.y ||
                    std::abs(d.z) > box_half.z)
                    continue;
                double t = dot(d, n) + 0.5 * span;
                if (t < 0.0 || t >= span) continue;
                int layer = static_cast<int>(t / spacing);
                if (layer >= n_layers) layer = n_layers - 1;
                out.at(i, j, k) = (layer % 2 == 0) ? v_low : v_high;
            }
    return out;
}

/// Radially symmetric Gaussian bump exp(-(rho - c)^2 / (2 w^2)), clipped to
/// the support shell.
inline Volume custom_radial(double profile_center, double profile_width, double value,
                            const Volume& tmpl, const HollowBall& domain) {
    if (!(profile_width > 0.0)) throw std::invalid_argument("custom_radial: width must be > 0");
    Volume out = tmpl;
    out.values.assign(out.size(), 0.0);
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i) {
                double rho = norm(out.center(i, j, k));
                if (!domain.contains(rho)) continue;
                double d = (rho - profile_center) / profile_width;
                out.at(i, j, k) = value * std::exp(-0.5 * d * d);
            }
    return out;
}

/// Seeded smooth band-limited density: a random degree-<=L angular expansion
/// under a radial envelope vanishing at the shell boundaries.
inline Volume random_bandlimited(int band_limit, unsigned long long seed, double amplitude,
                                 const Volume& tmpl, const HollowBall& domain) {
    if (band_limit < 0) throw std::invalid_argument("random_bandlimited: band_limit >= 0");
    detail::Rng rng(seed);
    HarmonicCoeffs coeffs(band_limit);
    for (int l = 0; l <= band_limit; ++l) {
        double scale = 1.0 / (1.0 + l);
        coeffs.at(l, 0) = Complex(scale * rng.normal(), 0.0);
        for (int m = 1; m <= l; ++m) {
            Complex a(scale * rng.normal(), scale * rng.normal());
            coeffs.at(l, m) = a;
            double ph = (m % 2 == 0) ? 1.0 : -1.0;
            coeffs.at(l, -m) = ph * std::conj(a);
        }
    }
    Volume out = tmpl;
    out.values.assign(out.size(), 0.0);
    double w = domain.outer - domain.inner;
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i) {
                Vec3 p = out.center(i, j, k);
                double rho = norm(p);
                if (!domain.contains(rho)) continue;
                double env = std::sin(pi * (rho - domain.inner) / w);
                env *= env;
                double colat = std::acos(std::clamp(p.z / rho, -1.0, 1.0));
                double lon = std::atan2(p.y, p.x);
                out.at(i, j, k) =
                    amplitude * env * evaluate_expansion(coeffs, colat, lon).real();
            }
    return out;
}

inline Volume make_phantom(const PhantomSpec& s, const Volume& tmpl, const HollowBall& domain) {
    switch (s.kind) {
        case PhantomSpec::Kind::bead:
            return bead(s.center, s.radius, s.value, tmpl, domain);
        case PhantomSpec::Kind::spherical_shells:
            return spherical_shells(s.r0, s.r1, s.n_layers, s.v_low, s.v_high, s.cap_direction,
                                    s.cap_halfangle, tmpl, domain);
        case PhantomSpec::Kind::layered_planes:
            return layered_planes(s.normal, s.spacing, s.n_layers, s.v_low, s.v_high, s.box_center,
                                  s.box_half, tmpl, domain);
        case PhantomSpec::Kind::custom_radial:
            return custom_radial(s.profile_center, s.profile_width, s.value, tmpl, domain);
        case PhantomSpec::Kind::random_bandlimited:
            return random_bandlimited(s.band_limit, s.seed, s.amplitude, tmpl, domain);
    }
    throw std::logic_error("make_phantom: unreachable");
}

/// Splits f into even and odd parts about the origin; the grid must be
/// symmetric under x -> -x.  The halves 0.5 a +- 0.5 b each round once, so
/// the even part is bitwise symmetric, the odd part bitwise antisymmetric,
/// and the parts recombine to f within one ulp per voxel.
inline std::pair<Volume, Volume> odd_even_split(const Volume& f) {
    if (!f.symmetric_about_origin())
        throw std::invalid_argument("odd_even_split: grid not symmetric about the origin");
    Volume even = f, odd = f;
    for (int k = 0; k < f.nz; ++k)
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i) {
                double a = f.at(i, j, k);
                double b = f.at(f.nx - 1 - i, f.ny - 1 - j, f.nz - 1 - k);
                even.at(i, j, k) = 0.5 * a + 0.5 * b;
                odd.at(i, j, k) = 0.5 * a - 0.5 * b;
            }
    return {even, odd};
}

}  // namespace spintomo
