#pragma once

#include "aniso/errors.hpp"
#include "aniso/numerics.hpp"
#include "aniso/report.hpp"
#include "aniso/types.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace aniso {

// A Minkowski integrand F on the unit sphere, handled through its positive
// one-homogeneous extension to the ambient space. The extension keeps every
// derived quantity (Cahn-Hoffman map, spherical Hessian form, duals) a plain
// Euclidean derivative computation:
//
//   Phi(xi)  = grad F~(xi)                     (Cahn-Hoffman map on S^n)
//   A_F(xi)  = Hess F~(xi) restricted to xi^perp
//
// All families may carry a linear shift: F(xi) -> F(xi) - <shift, xi>, which
// leaves A_F unchanged and translates the Wulff shape.
enum class NormFamily { Isotropic, Shifted, Ellipsoidal, SuperquadricBlend, Custom };

const char* to_string(NormFamily f);

// Deterministic quasi-uniform sphere sample (Fibonacci lattice on S^2,
// uniform angles on S^1).
std::vector<Vec> sphere_grid(int ambient_dim, int count);

struct DerivativeMode {
    enum class Kind { ClosedForm, FiniteDifference };
    Kind kind = Kind::ClosedForm;
    Real step = 1e-5;
    int richardson = 1;
};

struct NormValidation {
    int sphere_samples = 1500;
    Real positivity_tol = 1e-8;
};

class NormSpec {
public:
    NormSpec() : shift_(Vec::Zero(3)) {}  // isotropic in R^3

    static NormSpec isotropic(int ambient_dim);
    static NormSpec shifted(const Vec& k0);  // |x| - <k0, x>, requires |k0| < 1
    static NormSpec ellipsoidal(const Mat& A);  // sqrt(x^T A x), A SPD
    static NormSpec superquadric_blend(int ambient_dim, Real eps);
    static NormSpec custom(int ambient_dim, std::function<Real(const Vec&)> sphere_eval,
                           DerivativeMode mode = {DerivativeMode::Kind::FiniteDifference});

    int ambient_dim() const { return dim_; }
    int surface_dim() const { return dim_ - 1; }
    NormFamily family() const;
    NormFamily base_family() const { return base_; }
    const DerivativeMode& derivative_mode() const { return dmode_; }
    void set_derivative_mode(const DerivativeMode& m) { dmode_ = m; }

    const Vec& shift() const { return shift_; }
    const Mat& ellipsoid_matrix() const { return ellip_A_; }
    Real blend_eps() const { return blend_eps_; }

    // One-homogeneous extension F~ and its Euclidean derivatives.
    Real value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    bool has_closed_derivatives() const { return base_ != NormFamily::Custom; }

    // Dense positivity / convexity sweep; throws PositivityViolation.
    void validate(const NormValidation& v = {}) const;

private:
    Real base_value(const Vec& x) const;
    Vec base_gradient(const Vec& x) const;
    Mat base_hessian(const Vec& x) const;

    int dim_ = 3;
    NormFamily base_ = NormFamily::Isotropic;
    Vec shift_;
    Mat ellip_A_, ellip_Ainv_;
    Real blend_eps_ = 0.0;
    std::function<Real(const Vec&)> custom_eval_;
    DerivativeMode dmode_;

    friend NormSpec shift_norm(const NormSpec& norm, const Vec& k);
};

// --- operations on the sphere ------------------------------------------------

// F(xi) for unit xi. Throws NonUnitInput / PositivityViolation.
Real evaluate(const NormSpec& norm, const Vec& xi);

// Cahn-Hoffman map Phi(xi) = grad F~(xi); image lies on the unit Wulff shape.
Vec cahn_hoffman(const NormSpec& norm, const Vec& xi);

struct SphereHessianForm {
    Mat basis;  // (d x d-1), orthonormal tangent basis at xi
    Mat form;   // (d-1 x d-1), symmetric positive definite
    Real min_eigenvalue = 0.0;
};

// A_F(xi) in an orthonormal basis of the tangent space at xi.
SphereHessianForm sphere_hessian_form(const NormSpec& norm, const Vec& xi,
                                      Real positivity_tol = 1e-8);

// F -> F - <., k>. Requires dual(norm)(k) < 1 so the result stays positive.
NormSpec shift_norm(const NormSpec& norm, const Vec& k);

// --- dual norm ---------------------------------------------------------------

struct DualSettings {
    int grid_seeds = 32;
    int random_starts = 20;
    int ascent_iters = 3;
    int polish_starts = 3;
    int newton_iters = 40;
    Real sup_tol = 1e-10;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

class DualNorm {
public:
    enum class Mode { ClosedForm, NumericalSup };

    explicit DualNorm(NormSpec source, std::optional<Mode> mode = std::nullopt,
                      DualSettings settings = {});

    const NormSpec& source() const { return src_; }
    Mode mode() const { return mode_; }

    Real operator()(const Vec& x) const { return eval(x); }
    Real eval(const Vec& x) const;
    Vec gradient(const Vec& x) const;

    // Direction xi with Phi(xi) = x / F_dual(x); the inverse of the
    // Cahn-Hoffman map up to scaling.
    Vec support_direction(const Vec& x) const;

    // Value, envelope gradient and maximizer in one pass. A warm-start
    // direction (from a neighboring query) skips the global seeding of the
    // numerical sup; the unique maximizer makes the local polish safe.
    struct Result {
        Real value;
        Vec gradient;
        Vec xi;
    };
    Result eval_full(const Vec& x, const Vec* warm = nullptr) const;

private:
    struct SupResult {
        Real value;
        Vec xi;
        Real stationarity;
    };
    SupResult numerical_sup(const Vec& x) const;
    SupResult polish(const Vec& xn, Vec xi, int iters) const;
    Real shifted_root(const Vec& x) const;

    NormSpec src_;
    Mode mode_;
    DualSettings settings_;
    Mat base_Ainv_;
    bool base_closed_ = false;
};

Real dual_eval(const DualNorm& dual, const Vec& x);

// All four norm/dual identities on random samples; returns max residuals.
Report verify_duality(const NormSpec& norm, int samples, std::uint64_t seed = 2024,
                      Real tol_override = -1.0);

}  // namespace aniso
