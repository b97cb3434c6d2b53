#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mbvp {

inline constexpr double pi = std::numbers::pi;

// Every library error carries the process exit code the CLI maps it to.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config error: " + w, 2) {}
};

// Bad geometric input (point outside the ball, layer too thick, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain error: " + w, 2) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error("precondition failed: " + w, 2) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error("numerical failure: " + w, 3) {}
};

struct InvariantBreach : Error {
    explicit InvariantBreach(const std::string& w) : Error("invariant breach: " + w, 4) {}
};

// Points live in R^3; planar problems leave z = 0.
struct Point {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Point a) { return std::sqrt(dot(a, a)); }
inline double dist(Point a, Point b) { return norm(a - b); }

inline Point polar_point(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta), 0.0}; }

// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
    a = std::fmod(a + pi, 2.0 * pi);
    if (a < 0) a += 2.0 * pi;
    return a - pi;
}

inline double sqr(double v) { return v * v; }

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown on the calling thread (first one wins).
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(m);
                    if (!err) err = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

inline int default_workers() {
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

}  // namespace mbvp
