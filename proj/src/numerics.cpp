#include "aniso/numerics.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace aniso {

namespace {

GaussRule compute_gauss(int n) {
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess for the i-th positive root.
        Real x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        Real pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence: p1 = P_n(x), p2 = P_{n-1}(x).
            Real p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const Real dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.points[i] = -x;
        rule.points[n - 1 - i] = x;
        const Real w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n == 1) {
        rule.points[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1 || order > 64)
        throw std::invalid_argument("gauss_legendre: order must be in [1, 64]");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
    return it->second;
}

GaussRule gauss_legendre_on(int order, Real a, Real b) {
    const GaussRule& base = gauss_legendre(order);
    GaussRule rule;
    rule.points.resize(base.points.size());
    rule.weights.resize(base.weights.size());
    const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        rule.points[i] = mid + half * base.points[i];
        rule.weights[i] = half * base.weights[i];
    }
    return rule;
}

namespace {

// Snap the step so that t + h and t - h differ by an exactly representable
// amount; the unsnapped step contributes a ~1e-11 relative bias.
inline Real snapped_half_step(Real t, Real h) {
    volatile Real tp = t + h;
    volatile Real tm = t - h;
    return 0.5 * (tp - tm);
}

}  // namespace

Real fd_derivative(const std::function<Real(Real)>& f, Real t, const FdSpec& spec) {
    auto central = [&](Real h0) {
        const Real h = snapped_half_step(t, h0);
        return (f(t + h) - f(t - h)) / (2.0 * h);
    };
    const Real d1 = central(spec.step);
    if (spec.richardson <= 0) return d1;
    const Real d2 = central(0.5 * spec.step);
    return (4.0 * d2 - d1) / 3.0;
}

Vec fd_directional(const std::function<Vec(const Vec&)>& g, const Vec& u, const Vec& e,
                   const FdSpec& spec) {
    // Axis-aligned directions get the snapped step; generic directions keep
    // the nominal one.
    int axis = -1, nonzero = 0;
    for (int i = 0; i < e.size(); ++i)
        if (e(i) != 0.0) {
            ++nonzero;
            axis = i;
        }
    auto central = [&](Real h0) -> Vec {
        Real h = h0;
        if (nonzero == 1) h = snapped_half_step(u(axis), h0 * std::abs(e(axis))) / std::abs(e(axis));
        return (g(u + h * e) - g(u - h * e)) / (2.0 * h);
    };
    Vec d1 = central(spec.step);
    if (spec.richardson <= 0) return d1;
    Vec d2 = central(0.5 * spec.step);
    return (4.0 * d2 - d1) / 3.0;
}

Vec fd_gradient(const std::function<Real(const Vec&)>& f, const Vec& x, const FdSpec& spec) {
    Vec grad(x.size());
    for (int i = 0; i < x.size(); ++i) {
        auto fi = [&](Real t) {
            Vec y = x;
            y(i) = t;
            return f(y);
        };
        grad(i) = fd_derivative(fi, x(i), spec);
    }
    return grad;
}

Mat fd_hessian(const std::function<Real(const Vec&)>& f, const Vec& x, Real step, int richardson) {
    const int d = static_cast<int>(x.size());
    auto hess_at = [&](Real h) {
        Mat hess(d, d);
        const Real f0 = f(x);
        for (int i = 0; i < d; ++i) {
            Vec ei = Vec::Zero(d);
            ei(i) = h;
            hess(i, i) = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h);
            for (int j = i + 1; j < d; ++j) {
                Vec ej = Vec::Zero(d);
                ej(j) = h;
                const Real v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) /
                               (4.0 * h * h);
                hess(i, j) = v;
                hess(j, i) = v;
            }
        }
        return hess;
    };
    Mat h1 = hess_at(step);
    if (richardson <= 0) return 0.5 * (h1 + h1.transpose());
    Mat h2 = hess_at(0.5 * step);
    Mat r = (4.0 * h2 - h1) / 3.0;
    return 0.5 * (r + r.transpose());
}

Real solve_monotone(const std::function<Real(Real)>& f, Real a, Real b,
                    const std::function<Real(Real)>& df, Real tol, int max_iter) {
    if (a > b) std::swap(a, b);
    Real fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) {
        // Tolerate a bracket that only grazes zero at one end.
        const Real scale = std::max(std::abs(fa), std::abs(fb));
        if (std::abs(fa) < 1e-11 * scale || std::abs(fa) < 1e-13) return a;
        if (std::abs(fb) < 1e-11 * scale || std::abs(fb) < 1e-13) return b;
        throw OptimizerNotConverged("solve_monotone: no sign change on the bracket");
    }
    Real x = 0.5 * (a + b);
    for (int iter = 0; iter < max_iter; ++iter) {
        Real fx = f(x);
        if (std::abs(fx) < tol || 0.5 * (b - a) < tol * (1.0 + std::abs(x))) return x;
        if (fa * fx <= 0.0) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        Real next = 0.5 * (a + b);
        if (df) {
            const Real d = df(x);
            if (d != 0.0) {
                const Real newton = x - fx / d;
                if (newton > a && newton < b) next = newton;
            }
        }
        x = next;
    }
    return x;  // bracket is tight enough for all practical tolerances
}

std::pair<Real, Real> minimize_unimodal(const std::function<Real(Real)>& f, Real a, Real b,
                                        Real tol, int max_iter) {
    const Real phi = 0.5 * (std::sqrt(5.0) - 1.0);
    Real x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    Real f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    // Parabolic polish; the probe step stays large enough that the value
    // differences are above roundoff.
    const Real xm = 0.5 * (a + b);
    const Real h = std::max(0.25 * (b - a), 1e-5 * (1.0 + std::abs(xm)));
    const Real fl = f(xm - h), fc = f(xm), fr = f(xm + h);
    const Real denom = fl - 2.0 * fc + fr;
    Real xstar = xm;
    if (denom > 0.0) xstar = xm - 0.5 * h * (fr - fl) / denom;
    const Real fstar = f(xstar);
    if (fstar <= fc) return {xstar, fstar};
    return {xm, fc};
}

namespace {

Real simpson_step(const std::function<Real(Real)>& f, Real a, Real b, Real fa, Real fm, Real fb,
                  Real whole, Real tol, int depth, int max_depth) {
    const Real m = 0.5 * (a + b);
    const Real lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Real flm = f(lm), frm = f(rm);
    const Real left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Real right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Real delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

Real adaptive_simpson(const std::function<Real(Real)>& f, Real a, Real b, Real tol,
                      int max_depth) {
    const Real fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const Real whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, max_depth);
}

Real convergence_rate(Real coarse, Real fine, Real floor_value) {
    if (std::abs(fine) <= floor_value || std::abs(coarse) <= floor_value)
        return std::numeric_limits<Real>::quiet_NaN();
    return std::log2(std::abs(coarse) / std::abs(fine));
}

}  // namespace aniso
