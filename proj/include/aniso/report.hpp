#pragma once

#include "aniso/types.hpp"

#include <limits>
#include <string>
#include <vector>

namespace aniso {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct CheckRecord {
    std::string name;
    Real lhs = 0.0;
    Real rhs = 0.0;
    Real residual_abs = 0.0;
    Real residual_rel = 0.0;
    int level = -1;  // finest quadrature level used, -1 when not level-based
    Real rate = std::numeric_limits<Real>::quiet_NaN();  // observed order
    Verdict verdict = Verdict::Inconclusive;
    bool expected_fail = false;
    std::string note;
};

struct Report {
    std::string suite;
    std::vector<CheckRecord> checks;

    // A suite is healthy when every check behaves as intended: regular checks
    // Pass, expected-fail checks Fail. Inconclusive tolerated unless strict.
    bool ok(bool strict = false) const;
    Verdict verdict() const;

    CheckRecord& add(CheckRecord rec) {
        checks.push_back(std::move(rec));
        return checks.back();
    }
};

// Assemble a check from per-level (lhs, rhs) pairs of a refinement study.
// Pass requires the finest relative residual below tol and residuals
// non-increasing across the last two refinements (up to a roundoff floor).
CheckRecord convergence_check(const std::string& name, const std::vector<Real>& lhs_by_level,
                              const std::vector<Real>& rhs_by_level, Real rel_tol,
                              Real floor_scale = 5e-12);

// Single-level identity check: |lhs - rhs| against rel_tol * scale.
CheckRecord identity_check(const std::string& name, Real lhs, Real rhs, Real rel_tol);

// Bound check: value <= bound + tol (Pass), used for inequality slack records.
CheckRecord bound_check(const std::string& name, Real value, Real bound, Real tol);

}  // namespace aniso
