#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace spintomo {

inline constexpr double pi = std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
};

inline Vec3 operator*(double a, const Vec3& v) { return v * a; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n == 0.0) throw std::domain_error("normalized: zero vector");
    return v * (1.0 / n);
}

/// Unit direction with its (alpha, beta) chart angles.  The chart is the
/// latitude-style one: unit = (cos a cos b, sin a cos b, sin b), so beta is a
/// latitude in (-pi/2, pi/2) and cos(beta) != 0 keeps the chart valid.
struct Direction {
    double alpha = 0.0;
    double beta = 0.0;
    Vec3 unit{1.0, 0.0, 0.0};

    static Direction from_angles(double alpha, double beta) {
        Direction d;
        d.alpha = alpha;
        d.beta = beta;
        d.unit = {std::cos(alpha) * std::cos(beta), std::sin(alpha) * std::cos(beta),
                  std::sin(beta)};
        return d;
    }

    static Direction from_unit(const Vec3& u) {
        Direction d;
        d.unit = normalized(u);
        d.beta = std::asin(std::clamp(d.unit.z, -1.0, 1.0));
        d.alpha = std::atan2(d.unit.y, d.unit.x);
        return d;
    }
};

// Chart derivatives of theta(alpha, beta); |theta_alpha| = cos(beta), |theta_beta| = 1.
inline Vec3 theta_alpha(const Direction& d) {
    return {-std::sin(d.alpha) * std::cos(d.beta), std::cos(d.alpha) * std::cos(d.beta), 0.0};
}
inline Vec3 theta_beta(const Direction& d) {
    return {-std::cos(d.alpha) * std::sin(d.beta), -std::sin(d.alpha) * std::sin(d.beta),
            std::cos(d.beta)};
}

/// Hollow-ball support shell.  The spindle-side shell (inner, outer) with
/// outer < 1 corresponds to the cylinder-side shell with radii
/// 2 r / (1 - r^2); the two flavors are linked by that map.
struct HollowBall {
    enum class Flavor { spindle_domain, cylinder_domain };

    double inner = 0.0;
    double outer = 0.0;
    Flavor flavor = Flavor::spindle_domain;

    static double link_radius(double eps) { return 2.0 * eps / (1.0 - eps * eps); }

    static HollowBall spindle(double inner, double outer) {
        if (!(0.0 < inner && inner < outer && outer < 1.0))
            throw std::invalid_argument("HollowBall::spindle: need 0 < inner < outer < 1");
        return {inner, outer, Flavor::spindle_domain};
    }

    static HollowBall cylinder(double inner, double outer) {
        if (!(0.0 < inner && inner < outer))
            throw std::invalid_argument("HollowBall::cylinder: need 0 < inner < outer");
        return {inner, outer, Flavor::cylinder_domain};
    }

    /// Cylinder-domain shell whose image under the radial map is this shell.
    HollowBall linked_cylinder() const {
        if (flavor != Flavor::spindle_domain)
            throw std::invalid_argument("linked_cylinder: expects a spindle-domain shell");
        return cylinder(link_radius(inner), link_radius(outer));
    }

    bool contains(double r) const { return inner < r && r < outer; }
};

namespace detail {

/// Reproducible uniforms/normals independent of the standard library's
/// distribution implementations: 53-bit uniforms from mt19937_64 plus
/// Box-Muller.  Seeded draws are bitwise repeatable across platforms.
class Rng {
public:
    explicit Rng(unsigned long long seed) : eng_(seed) {}

    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace detail

/// Runs fn(i) for i in [0, n).  Work is split into fixed-size blocks whose
/// boundaries do not depend on the thread count, so any per-block output is
/// reproducible across thread counts.  threads == 0 means hardware concurrency.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    unsigned t = threads > 0 ? static_cast<unsigned>(threads) : (hw > 0 ? hw : 1u);
    if (t <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    t = std::min<std::size_t>(t, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (unsigned k = 0; k < t; ++k) {
        std::size_t lo = k * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace spintomo
