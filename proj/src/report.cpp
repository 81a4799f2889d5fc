#include "aniso/report.hpp"

#include <algorithm>
#include <cmath>

namespace aniso {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::Fail: return "Fail";
        default: return "Inconclusive";
    }
}

bool Report::ok(bool strict) const {
    for (const auto& c : checks) {
        if (c.expected_fail) {
            if (c.verdict != Verdict::Fail) return false;
        } else if (c.verdict == Verdict::Fail) {
            return false;
        } else if (c.verdict == Verdict::Inconclusive && strict) {
            return false;
        }
    }
    return true;
}

Verdict Report::verdict() const {
    bool inconclusive = false;
    for (const auto& c : checks) {
        if (c.expected_fail) {
            if (c.verdict != Verdict::Fail) return Verdict::Fail;
            continue;
        }
        if (c.verdict == Verdict::Fail) return Verdict::Fail;
        if (c.verdict == Verdict::Inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

CheckRecord convergence_check(const std::string& name, const std::vector<Real>& lhs_by_level,
                              const std::vector<Real>& rhs_by_level, Real rel_tol,
                              Real floor_scale) {
    CheckRecord rec;
    rec.name = name;
    const std::size_t n = lhs_by_level.size();
    rec.level = static_cast<int>(n) - 1;
    rec.lhs = lhs_by_level.back();
    rec.rhs = rhs_by_level.back();

    std::vector<Real> res(n), scale(n);
    for (std::size_t i = 0; i < n; ++i) {
        res[i] = std::abs(lhs_by_level[i] - rhs_by_level[i]);
        scale[i] = std::max({std::abs(lhs_by_level[i]), std::abs(rhs_by_level[i]), Real(1e-30)});
    }
    rec.residual_abs = res.back();
    rec.residual_rel = res.back() / scale.back();

    // Below the accuracy floor of the pointwise oracles the residuals
    // jitter; those levels count as converged and carry no rate. The rate
    // comes from the finest pair still above the floor.
    const Real floor_abs = floor_scale * scale.back();
    if (n >= 2) {
        rec.rate = std::numeric_limits<Real>::infinity();
        for (std::size_t i = n - 1; i >= 1; --i) {
            if (res[i] > floor_abs && res[i - 1] > floor_abs) {
                rec.rate = std::log2(res[i - 1] / res[i]);
                break;
            }
        }
        const Real coarse = res[n - 2], fine = res[n - 1];
        const bool non_increasing = fine <= coarse * 1.01 + floor_abs || fine <= floor_abs;
        rec.verdict = (rec.residual_rel <= rel_tol && non_increasing) ? Verdict::Pass
                                                                      : Verdict::Fail;
    } else {
        rec.verdict = rec.residual_rel <= rel_tol ? Verdict::Pass : Verdict::Fail;
    }
    return rec;
}

CheckRecord identity_check(const std::string& name, Real lhs, Real rhs, Real rel_tol) {
    CheckRecord rec;
    rec.name = name;
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.residual_abs = std::abs(lhs - rhs);
    const Real scale = std::max({std::abs(lhs), std::abs(rhs), Real(1.0)});
    rec.residual_rel = rec.residual_abs / scale;
    rec.verdict = rec.residual_rel <= rel_tol ? Verdict::Pass : Verdict::Fail;
    return rec;
}

CheckRecord bound_check(const std::string& name, Real value, Real bound, Real tol) {
    CheckRecord rec;
    rec.name = name;
    rec.lhs = value;
    rec.rhs = bound;
    rec.residual_abs = value - bound;  // signed slack, negative = satisfied
    const Real scale = std::max({std::abs(value), std::abs(bound), Real(1.0)});
    rec.residual_rel = rec.residual_abs / scale;
    rec.verdict = value <= bound + tol ? Verdict::Pass : Verdict::Fail;
    return rec;
}

}  // namespace aniso
