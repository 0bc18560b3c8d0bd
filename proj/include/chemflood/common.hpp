#pragma once

#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace chemflood {

inline constexpr const char* version_string = "0.1.0";

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arguments outside the admissible domain (bad saturations, kappa <= 0, ...).
struct domain_error : error {
    using error::error;
};

/// The model violates the structural assumptions the solvers rely on.
struct model_error : error {
    using error::error;
};

/// A solver could not produce a result (no bracketing, geometry breakdown, ...).
struct solver_error : error {
    using error::error;
};

/// Global tolerance bundle. All thresholds scale with the CHEMFLOOD_TOL
/// environment variable (a multiplier, default 1).
struct Tolerances {
    double root = 1e-12;           // bisection width for scalar roots
    double bisect_rel = 1e-10;     // relative width for parameter bisections
    double ode_rel = 1e-11;        // adaptive RK relative tolerance
    double ode_abs = 1e-13;        // adaptive RK absolute tolerance
    double connect = 1e-8;         // accepted manifold mismatch at the solution
    double saddle_node = 1e-8;     // |f_s - v| below this at a double root
    double fd_step = 1e-6;         // finite-difference step for model partials
    double launch_offset = 1e-7;   // eigenvector offset when leaving a saddle
    double collar_frac = 1e-6;     // c-collar fraction near the boundary lines
    double validate_margin = 1e-12;// strict-inequality margin for validation
    double eval = 1e-9;            // generic evaluation tolerance (boundary values)

    Tolerances scaled(double m) const {
        Tolerances t = *this;
        t.root *= m;
        t.bisect_rel *= m;
        t.ode_rel *= m;
        t.ode_abs *= m;
        t.connect *= m;
        t.saddle_node *= m;
        t.validate_margin *= m;
        t.eval *= m;
        return t;
    }
};

/// Process-wide tolerances, honoring CHEMFLOOD_TOL once at first use.
inline const Tolerances& tols() {
    static const Tolerances t = [] {
        Tolerances base;
        if (const char* env = std::getenv("CHEMFLOOD_TOL")) {
            char* end = nullptr;
            double m = std::strtod(env, &end);
            if (end != env && m > 0) return base.scaled(m);
        }
        return base;
    }();
    return t;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    if (n == 1) {
        x[0] = a;
        return x;
    }
    for (std::size_t i = 0; i < n; ++i)
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Jobs <= 1 runs inline.
/// Partitioning is static, so results are deterministic for a given `jobs`.
/// The first worker exception is rethrown on the calling thread.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace chemflood
