// Structured energy densities F(x,z): registry of closed-form kinds with
// analytic derivatives, eigenvalue access, ellipticity ratios and the
// structural exponent table.
#ifndef ELLIPTLAB_INTEGRAND_HPP
#define ELLIPTLAB_INTEGRAND_HPP

#include "elliptlab/core.hpp"
#include "elliptlab/geometry.hpp"

#include <functional>
#include <span>
#include <string>

namespace elliptlab {

enum class IntegrandKind {
    PPower,                // H_mu(z)^{p/2}
    MinimalSurface,        // (1 + |z|^2)^{1/2}
    DoublePhase,           // |z|^p + a(x) |z|^q
    PerturbedDoublePhase,  // H_mu(z)^{p/2} + a(x) H_mu(z)^{q/2}
    CoefficientTimesG,     // c(x) (H_mu(z)^{p/2} + H_mu(z)^{q/2})
};

inline const char* to_string(IntegrandKind k) {
    switch (k) {
        case IntegrandKind::PPower: return "p-power";
        case IntegrandKind::MinimalSurface: return "minimal-surface";
        case IntegrandKind::DoublePhase: return "double-phase";
        case IntegrandKind::PerturbedDoublePhase: return "perturbed-double-phase";
        case IntegrandKind::CoefficientTimesG: return "coefficient-times-G";
    }
    return "?";
}

// Spatial coefficient: a(x) >= 0 modulating the q-term, or c(x) in [1,L]
// multiplying the whole density. Immutable after construction.
class Coefficient {
public:
    static Coefficient zero() { return Coefficient("zero", [](Vec2) { return 0.0; }); }

    static Coefficient constant(double c) {
        return Coefficient("constant", [c](Vec2) { return c; }, c);
    }

    // |x|^alpha, optionally scaled
    static Coefficient radial_power(double alpha, double scale = 1.0) {
        Coefficient c("radial-power", [alpha, scale](Vec2 x) { return scale * std::pow(x.norm(), alpha); });
        c.exponent_ = alpha;
        c.scale_ = scale;
        return c;
    }

    // Zhikov cone coefficient |x|^{alpha-2} (x2^2 - x1^2)_+ ; exactly zero on
    // the closed p-zone {x2^2 <= x1^2}.
    static Coefficient zhikov_cone(double alpha, double scale = 1.0) {
        Coefficient c("zhikov-cone", [alpha, scale](Vec2 x) {
            const double d = x.y() * x.y() - x.x() * x.x();
            if (d <= 0.0) return 0.0;
            const double r2 = x.squaredNorm();
            return scale * std::pow(r2, 0.5 * (alpha - 2.0)) * d;
        });
        c.exponent_ = alpha;
        c.scale_ = scale;
        return c;
    }

    static Coefficient custom(std::string name, std::function<double(Vec2)> fn) {
        return Coefficient(std::move(name), std::move(fn));
    }

    double operator()(Vec2 x) const { return fn_(x); }
    const std::string& name() const { return name_; }
    double scale() const { return scale_; }
    double exponent() const { return exponent_; }

private:
    Coefficient(std::string name, std::function<double(Vec2)> fn, double scale = 1.0)
        : name_(std::move(name)), fn_(std::move(fn)), scale_(scale) {}

    std::string name_;
    std::function<double(Vec2)> fn_;
    double scale_ = 1.0;
    double exponent_ = 0.0;
};

struct EigenPair {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

class Integrand {
public:
    IntegrandKind kind = IntegrandKind::PPower;
    double p = 2.0;
    double q = 2.0;
    double mu = 0.0;
    double L = 1.0;
    double alpha = 1.0;
    Coefficient coefficient = Coefficient::zero();

    static Integrand p_power(double p, double mu, double L = 1.0, double alpha = 1.0) {
        check_exponents(p, p);
        Integrand I;
        I.kind = IntegrandKind::PPower;
        I.p = I.q = p;
        I.mu = check_mu(mu);
        I.L = L;
        I.alpha = alpha;
        return I;
    }

    static Integrand minimal_surface() {
        Integrand I;
        I.kind = IntegrandKind::MinimalSurface;
        I.p = I.q = 1.0;  // linear growth; eval/ratio support only
        I.mu = 1.0;
        I.L = 1.0;
        return I;
    }

    static Integrand double_phase(double p, double q, Coefficient a, double L = 1.0,
                                  double alpha = 1.0) {
        check_exponents(p, q);
        Integrand I;
        I.kind = IntegrandKind::DoublePhase;
        I.p = p;
        I.q = q;
        I.mu = 0.0;  // degenerate by definition
        I.L = L;
        I.alpha = alpha;
        I.coefficient = std::move(a);
        return I;
    }

    static Integrand perturbed_double_phase(double p, double q, double mu, Coefficient a,
                                            double L = 1.0, double alpha = 1.0) {
        check_exponents(p, q);
        Integrand I;
        I.kind = IntegrandKind::PerturbedDoublePhase;
        I.p = p;
        I.q = q;
        I.mu = check_mu(mu);
        I.L = L;
        I.alpha = alpha;
        I.coefficient = std::move(a);
        return I;
    }

    static Integrand coefficient_times_G(double p, double q, double mu, Coefficient c,
                                         double L = 1.0, double alpha = 1.0) {
        check_exponents(p, q);
        Integrand I;
        I.kind = IntegrandKind::CoefficientTimesG;
        I.p = p;
        I.q = q;
        I.mu = check_mu(mu);
        I.L = L;
        I.alpha = alpha;
        I.coefficient = std::move(c);
        return I;
    }

    bool autonomous() const {
        switch (kind) {
            case IntegrandKind::PPower:
            case IntegrandKind::MinimalSurface: return true;
            default: return coefficient.name() == "zero" || coefficient.name() == "constant";
        }
    }

    bool degenerate() const { return mu == 0.0 && kind != IntegrandKind::MinimalSurface; }

    // Copy with the regularization parameter replaced; the degenerate
    // double-phase kind regularizes to the perturbed one.
    Integrand with_mu(double new_mu) const {
        Integrand I = *this;
        I.mu = check_mu(new_mu);
        if (kind == IntegrandKind::DoublePhase && new_mu > 0.0)
            I.kind = IntegrandKind::PerturbedDoublePhase;
        if (kind == IntegrandKind::MinimalSurface) I.mu = 1.0;
        return I;
    }

    double eval(Vec2 x, Vec2 z) const {
        const double h = z.squaredNorm() + mu * mu;
        switch (kind) {
            case IntegrandKind::PPower: return term_value(1.0, p, h);
            case IntegrandKind::MinimalSurface: return std::sqrt(1.0 + z.squaredNorm());
            case IntegrandKind::DoublePhase:
                return term_value(1.0, p, z.squaredNorm()) +
                       term_value(coefficient(x), q, z.squaredNorm());
            case IntegrandKind::PerturbedDoublePhase:
                return term_value(1.0, p, h) + term_value(coefficient(x), q, h);
            case IntegrandKind::CoefficientTimesG:
                return coefficient(x) * (term_value(1.0, p, h) + term_value(1.0, q, h));
        }
        return 0.0;
    }

    struct Derivs {
        Vec2 grad;
        Mat2 hess;
    };

    // Analytic z-derivatives. Refuses the degeneracy point z = 0, mu = 0 for
    // exponents below 2 rather than returning one-sided values.
    Derivs derivatives(Vec2 x, Vec2 z) const {
        Derivs d;
        d.grad.setZero();
        d.hess.setZero();
        switch (kind) {
            case IntegrandKind::PPower: add_term(d, 1.0, p, z, mu); break;
            case IntegrandKind::MinimalSurface: add_term(d, 1.0, 1.0, z, 1.0); break;
            case IntegrandKind::DoublePhase:
                add_term(d, 1.0, p, z, 0.0);
                add_term(d, coefficient(x), q, z, 0.0);
                break;
            case IntegrandKind::PerturbedDoublePhase:
                add_term(d, 1.0, p, z, mu);
                add_term(d, coefficient(x), q, z, mu);
                break;
            case IntegrandKind::CoefficientTimesG: {
                const double c = coefficient(x);
                add_term(d, c, p, z, mu);
                add_term(d, c, q, z, mu);
                break;
            }
        }
        return d;
    }

    EigenPair eigenvalues(Vec2 x, Vec2 z) const {
        const Mat2 H = derivatives(x, z).hess;
        const double tr = H.trace();
        const double det = H.determinant();
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        return {0.5 * (tr - disc), 0.5 * (tr + disc)};
    }

private:
    static void check_exponents(double p, double q) {
        if (!(p > 1.0)) throw std::invalid_argument("integrand: requires p > 1");
        if (!(q >= p)) throw std::invalid_argument("integrand: requires q >= p");
    }
    static double check_mu(double mu) {
        if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("integrand: mu must lie in [0,1]");
        return mu;
    }

    static double term_value(double c, double t, double h) {
        if (c == 0.0) return 0.0;
        return c * std::pow(h, 0.5 * t);
    }

    // c * H_mu(z)^{t/2} contribution to gradient and hessian.
    static void add_term(Derivs& d, double c, double t, Vec2 z, double mu) {
        if (c == 0.0) return;
        const double h = z.squaredNorm() + mu * mu;
        if (h == 0.0) {
            if (t == 2.0) {
                d.hess += (2.0 * c) * Mat2::Identity();
                return;  // grad = 2cz = 0
            }
            if (t > 2.0) return;  // grad and hess vanish in the limit
            throw std::domain_error(
                "integrand: derivatives undefined at the degeneracy point z = 0 with mu = 0 "
                "(exponent below 2); use mu-continuation");
        }
        const double hp = std::pow(h, 0.5 * t - 1.0);  // h^{(t-2)/2}
        d.grad += (c * t * hp) * z;
        const double iso = c * t * hp;
        const double rad = c * t * (t - 2.0) * hp / h;
        d.hess(0, 0) += iso + rad * z.x() * z.x();
        d.hess(1, 1) += iso + rad * z.y() * z.y();
        const double off = rad * z.x() * z.y();  // keep the hessian exactly symmetric
        d.hess(0, 1) += off;
        d.hess(1, 0) += off;
    }
};

// Lambda/lambda at one point; >= 1, equals 1 only for isotropic hessians.
inline double ellipticity_ratio(const Integrand& I, Vec2 x, Vec2 z) {
    if (z.squaredNorm() == 0.0 && I.degenerate())
        throw std::domain_error("ellipticity_ratio: degenerate at z = 0 with mu = 0");
    const EigenPair e = I.eigenvalues(x, z);
    if (!(e.lambda_min > 0.0)) return infinity_marker();
    return e.lambda_max / e.lambda_min;
}

// sup_B Lambda / inf_B lambda over explicit sample points; infinity marker
// when the denominator vanishes.
inline double nonlocal_ratio(const Integrand& I, std::span<const Vec2> samples, Vec2 z) {
    if (samples.empty()) throw std::invalid_argument("nonlocal_ratio: needs at least one sample point");
    if (z.squaredNorm() == 0.0 && I.degenerate())
        throw std::domain_error("nonlocal_ratio: degenerate at z = 0 with mu = 0");
    double sup = 0.0, inf = infinity_marker();
    for (const Vec2& x : samples) {
        const EigenPair e = I.eigenvalues(x, z);
        sup = std::max(sup, e.lambda_max);
        inf = std::min(inf, e.lambda_min);
    }
    if (!(inf > 0.0)) return infinity_marker();
    return sup / inf;
}

// Centroids plus vertices of the ball's elements; the vertices matter because
// coefficient minima (and hence the inf of lambda) sit at mesh nodes.
inline std::vector<Vec2> ball_sample_points(const Mesh& m, const DiscreteBall& b) {
    std::vector<Vec2> pts;
    pts.reserve(4 * b.elements.size());
    for (int t : b.elements) {
        pts.push_back(m.centroid(t));
        for (int k = 0; k < 3; ++k) pts.push_back(m.vertex(t, k));
    }
    return pts;
}

// Exponent table for the autonomous gradient bound; dimension-dependent.
inline double structural_exponent_s(int n, double p, double q, double eps = 1e-3) {
    if (n < 2) throw std::invalid_argument("structural_exponent_s: requires n >= 2");
    if (!(p > 1.0) || !(q >= p))
        throw std::invalid_argument("structural_exponent_s: requires 1 < p <= q");
    if (!(eps > 0.0)) throw std::invalid_argument("structural_exponent_s: eps must be positive");
    if (!(q / p < 1.0 + 2.0 / double(n - 1)))
        throw std::invalid_argument(
            "structural_exponent_s: hypothesis q/p < 1 + 2/(n-1) violated");
    if (n == 3) {
        if (q == p) return 1.0;
        return (1.0 + eps) * q / (2.0 * p - q);
    }
    return 2.0 * q / (double(n + 1) * p - double(n - 1) * q);
}

// ---------------------------------------------------------------------------
// Assumption audit: deterministic low-discrepancy sweep over (x, z, y, xi)
// checking the growth bounds, the hessian two-sided bounds and the
// Hoelder-in-x bound. Violations become negative margins in the report, never
// exceptions.

struct AuditReport {
    int samples = 0;
    // worst (most negative) relative margins; >= 0 means the line held
    double growth_lower = infinity_marker();
    double growth_upper = infinity_marker();
    double hessian_lower = infinity_marker();
    double hessian_upper = infinity_marker();
    double holder_margin = infinity_marker();
    double holder_constant = 0.0;  // empirical best constant for the x-Hoelder line
    bool flag_pq_alpha = false;      // q/p < 1 + alpha/n
    bool flag_pq_dimension = false;  // q/p < 1 + 2/(n-1)

    bool growth_ok(double tol = 1e-12) const {
        return growth_lower >= -tol && growth_upper >= -tol;
    }
};

inline AuditReport assumption_audit(const Integrand& I, int sample_count, int n = 2) {
    if (sample_count < 1) throw std::invalid_argument("assumption_audit: sample_count must be >= 1");
    AuditReport r;
    r.samples = sample_count;
    r.flag_pq_alpha = I.q / I.p < 1.0 + I.alpha / double(n);
    r.flag_pq_dimension = I.q / I.p < 1.0 + 2.0 / double(n - 1);

    for (int i = 0; i < sample_count; ++i) {
        const auto k = std::uint64_t(i);
        const Vec2 x = halton_disc_point(2 * k, 1.0);
        const Vec2 y = halton_disc_point(2 * k + 1, 1.0);
        const double zmag = std::pow(10.0, -3.0 + 6.0 * halton(k, 5));
        const double zang = 2.0 * pi * halton(k, 7);
        const Vec2 z{zmag * std::cos(zang), zmag * std::sin(zang)};
        const double xang = 2.0 * pi * halton(k, 11);
        const Vec2 xi{std::cos(xang), std::sin(xang)};

        const double h = z.squaredNorm() + I.mu * I.mu;
        const double hp = std::pow(h, 0.5 * I.p), hq = std::pow(h, 0.5 * I.q);
        const double F = I.eval(x, z);

        // (assf)_2 two-sided growth
        r.growth_lower = std::min(r.growth_lower, (F - hp) / std::max(1.0, hp));
        const double upper = I.L * hq + I.L * hp;
        r.growth_upper = std::min(r.growth_upper, (upper - F) / std::max(1.0, upper));

        const auto dx = I.derivatives(x, z);
        // (assf)_3 hessian lower bound H^{(p-2)/2} |xi|^2
        const double quad = xi.dot(dx.hess * xi);
        const double lower_ref = std::pow(h, 0.5 * I.p - 1.0);
        r.hessian_lower = std::min(r.hessian_lower, (quad - lower_ref) / std::max(1.0, lower_ref));
        // (assf)_4 hessian upper bound (spectral norm, exact for symmetric 2x2)
        const EigenPair ev = I.eigenvalues(x, z);
        const double norm = std::max(std::abs(ev.lambda_min), std::abs(ev.lambda_max));
        const double upper_ref = I.L * std::pow(h, 0.5 * I.q - 1.0) + I.L * std::pow(h, 0.5 * I.p - 1.0);
        r.hessian_upper = std::min(r.hessian_upper, (upper_ref - norm) / std::max(1.0, upper_ref));

        // (assf)_5 Hoelder continuity in x of the gradient
        const auto dy = I.derivatives(y, z);
        const double num = (dx.grad - dy.grad).norm();
        const double den = std::pow((x - y).norm(), I.alpha) *
                           (std::pow(h, 0.5 * (I.q - 1.0)) + std::pow(h, 0.5 * (I.p - 1.0)));
        if (den > 0.0) {
            r.holder_constant = std::max(r.holder_constant, num / den);
            r.holder_margin = std::min(r.holder_margin, (I.L * den - num) / std::max(1.0, I.L * den));
        }
    }
    return r;
}

}  // namespace elliptlab

#endif
