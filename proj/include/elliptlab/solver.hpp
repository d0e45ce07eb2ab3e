// Minimization of discrete energies  sum_T int_T F(x, Dw) + f w  over P1
// functions with Dirichlet data: exact assembly of energy/gradient/hessian,
// damped Newton with Armijo backtracking, and mu-continuation for degenerate
// integrands.
#ifndef ELLIPTLAB_SOLVER_HPP
#define ELLIPTLAB_SOLVER_HPP

#include "elliptlab/geometry.hpp"
#include "elliptlab/integrand.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <optional>

namespace elliptlab {

struct Problem {
    const Mesh* mesh = nullptr;
    Integrand integrand;
    std::vector<double> boundary_values;  // ordered like mesh->boundary_nodes()
    std::optional<FeFunction> source;     // f; zero if absent

    Problem(const Mesh& m, Integrand I, std::vector<double> bv,
            std::optional<FeFunction> f = std::nullopt)
        : mesh(&m), integrand(std::move(I)), boundary_values(std::move(bv)), source(std::move(f)) {
        if (boundary_values.size() != m.boundary_nodes().size())
            throw std::invalid_argument("Problem: boundary value count mismatch");
        for (double v : boundary_values)
            if (!std::isfinite(v)) throw std::invalid_argument("Problem: boundary values must be finite");
        if (source && source->mesh != &m)
            throw std::invalid_argument("Problem: source must live on the same mesh");
    }

    static Problem from_functions(const Mesh& m, Integrand I,
                                  const std::function<double(Vec2)>& boundary,
                                  const std::function<double(Vec2)>* f = nullptr) {
        std::vector<double> bv;
        bv.reserve(m.boundary_nodes().size());
        for (int i : m.boundary_nodes()) bv.push_back(boundary(m.nodes()[std::size_t(i)]));
        std::optional<FeFunction> src;
        if (f) src = FeFunction::interpolate(m, *f);
        return Problem(m, std::move(I), std::move(bv), std::move(src));
    }
};

// interior-node numbering
struct DofMap {
    std::vector<int> node_of_dof;
    std::vector<int> dof_of_node;  // -1 on boundary
    int n_free = 0;

    explicit DofMap(const Mesh& m) {
        dof_of_node.assign(std::size_t(m.node_count()), -1);
        for (int i = 0; i < m.node_count(); ++i) {
            if (!m.is_boundary(i)) {
                dof_of_node[std::size_t(i)] = n_free++;
                node_of_dof.push_back(i);
            }
        }
    }
};

struct IterationRecord {
    double mu;
    int iteration;
    double energy;
    double grad_norm;
    double step;
    bool gradient_fallback;
};

struct Solution {
    FeFunction u;
    double energy = 0.0;              // energy of the problem integrand at u
    double energy_regularized = 0.0;  // energy at the final continuation stage
    double grad_norm = infinity_marker();
    int iterations = 0;
    std::vector<double> mu_path;
    bool converged = false;
    std::vector<IterationRecord> log;
};

namespace detail {

inline double energy_of(const Problem& P, const Integrand& I, const std::vector<double>& values) {
    const Mesh& m = *P.mesh;
    const QuadRule& qr = quad_rule(2);
    double e = 0.0;
    for (int t = 0; t < m.triangle_count(); ++t) {
        const Vec2 g = triangle_gradient(m, values, t);
        const auto& v = m.triangles()[std::size_t(t)].v;
        double acc = 0.0;
        for (std::size_t k = 0; k < qr.bary.size(); ++k) {
            const Vec2 xq = m.quad_point(t, qr.bary[k]);
            acc += qr.weights[k] * I.eval(xq, g);
            if (P.source) {
                const auto& b = qr.bary[k];
                const double wq = b[0] * values[std::size_t(v[0])] + b[1] * values[std::size_t(v[1])] +
                                  b[2] * values[std::size_t(v[2])];
                const double fq = b[0] * P.source->values[std::size_t(v[0])] +
                                  b[1] * P.source->values[std::size_t(v[1])] +
                                  b[2] * P.source->values[std::size_t(v[2])];
                acc += qr.weights[k] * fq * wq;
            }
        }
        e += m.area(t) * acc;
    }
    return e;
}

}  // namespace detail

struct Assembled {
    double energy = 0.0;
    Eigen::VectorXd gradient;             // over free dofs
    Eigen::SparseMatrix<double> hessian;  // over free dofs, symmetric
};

// Exact derivatives of the quadrature-discretized energy in the nodal values.
inline Assembled assemble(const Problem& P, const FeFunction& w,
                          const Integrand* integrand_override = nullptr) {
    const Mesh& m = *P.mesh;
    const Integrand& I = integrand_override ? *integrand_override : P.integrand;
    const DofMap dofs(m);
    const QuadRule& qr = quad_rule(2);

    Assembled out;
    out.gradient = Eigen::VectorXd::Zero(dofs.n_free);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(m.triangle_count()) * 9);

    for (int t = 0; t < m.triangle_count(); ++t) {
        const Vec2 g = triangle_gradient(m, w.values, t);
        const auto& v = m.triangles()[std::size_t(t)].v;
        const auto lg = barycentric_gradients(m, t);
        const double at = m.area(t);

        Vec2 flux = Vec2::Zero();  // quadrature average of dF/dz
        Mat2 hz = Mat2::Zero();
        double eacc = 0.0;
        std::array<double, 3> fsrc{0.0, 0.0, 0.0};  // source load on the three hats
        for (std::size_t k = 0; k < qr.bary.size(); ++k) {
            const Vec2 xq = m.quad_point(t, qr.bary[k]);
            eacc += qr.weights[k] * I.eval(xq, g);
            const auto d = I.derivatives(xq, g);
            flux += qr.weights[k] * d.grad;
            hz += qr.weights[k] * d.hess;
            if (P.source) {
                const auto& b = qr.bary[k];
                const double fq = b[0] * P.source->values[std::size_t(v[0])] +
                                  b[1] * P.source->values[std::size_t(v[1])] +
                                  b[2] * P.source->values[std::size_t(v[2])];
                const double wq = b[0] * w.values[std::size_t(v[0])] + b[1] * w.values[std::size_t(v[1])] +
                                  b[2] * w.values[std::size_t(v[2])];
                eacc += qr.weights[k] * fq * wq;
                for (int i = 0; i < 3; ++i) fsrc[std::size_t(i)] += qr.weights[k] * fq * qr.bary[k][std::size_t(i)];
            }
        }
        out.energy += at * eacc;

        for (int i = 0; i < 3; ++i) {
            const int di = dofs.dof_of_node[std::size_t(v[std::size_t(i)])];
            if (di < 0) continue;
            out.gradient[di] += at * (flux.dot(lg[std::size_t(i)]) + fsrc[std::size_t(i)]);
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.dof_of_node[std::size_t(v[std::size_t(j)])];
                if (dj < 0) continue;
                trip.emplace_back(di, dj, at * lg[std::size_t(i)].dot(hz * lg[std::size_t(j)]));
            }
        }
    }
    out.hessian.resize(dofs.n_free, dofs.n_free);
    out.hessian.setFromTriplets(trip.begin(), trip.end());
    return out;
}

struct MinimizeOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double mu_floor = 1e-6;
    enum class Start { Harmonic, ZeroInterior, Custom } start = Start::Harmonic;
    std::vector<double> initial;  // full nodal vector, Start::Custom only
};

// Discrete-harmonic extension of the boundary data (single p = 2 solve);
// the default initial iterate.
inline std::vector<double> harmonic_extension(const Problem& P) {
    const Mesh& m = *P.mesh;
    std::vector<double> values(std::size_t(m.node_count()), 0.0);
    const auto& bn = m.boundary_nodes();
    for (std::size_t k = 0; k < bn.size(); ++k) values[std::size_t(bn[k])] = P.boundary_values[k];

    Problem lap(m, Integrand::p_power(2.0, 0.0), P.boundary_values);
    FeFunction w(m, values);
    const Assembled a = assemble(lap, w);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a.hessian);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("harmonic_extension: factorization failed");
    const Eigen::VectorXd delta = ldlt.solve(-a.gradient);
    const DofMap dofs(m);
    for (int d = 0; d < dofs.n_free; ++d) values[std::size_t(dofs.node_of_dof[std::size_t(d)])] += delta[d];
    return values;
}

// Damped Newton on the strictly convex discrete energy. Degenerate integrands
// (mu = 0) are solved through the continuation schedule mu_k = max(mu_floor,
// 2^{-k}); estimates feed forward as warm starts.
inline Solution minimize(const Problem& P, const MinimizeOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("minimize: tol must be positive");
    if (!(opts.mu_floor > 0.0)) throw std::invalid_argument("minimize: mu_floor must be positive");
    const Mesh& m = *P.mesh;
    const DofMap dofs(m);

    std::vector<double> values;
    switch (opts.start) {
        case MinimizeOptions::Start::Harmonic: values = harmonic_extension(P); break;
        case MinimizeOptions::Start::ZeroInterior: {
            values.assign(std::size_t(m.node_count()), 0.0);
            const auto& bn = m.boundary_nodes();
            for (std::size_t k = 0; k < bn.size(); ++k) values[std::size_t(bn[k])] = P.boundary_values[k];
            break;
        }
        case MinimizeOptions::Start::Custom:
            if (opts.initial.size() != std::size_t(m.node_count()))
                throw std::invalid_argument("minimize: initial vector has wrong length");
            values = opts.initial;
            break;
    }

    std::vector<double> mu_stages;
    if (P.integrand.degenerate()) {
        double mu = 1.0;
        while (mu > opts.mu_floor) {
            mu_stages.push_back(mu);
            mu *= 0.5;
        }
        mu_stages.push_back(opts.mu_floor);
    } else {
        mu_stages.push_back(P.integrand.mu);
    }

    Solution sol;
    sol.mu_path = mu_stages;
    int total_iter = 0;
    bool ok = true;

    for (double mu : mu_stages) {
        const Integrand I = P.integrand.with_mu(mu);
        bool stage_done = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            if (total_iter >= 100 * opts.max_iter) break;
            FeFunction w(m, values);
            Assembled a = assemble(P, w, &I);
            const double gn = a.gradient.norm();
            if (gn <= opts.tol) {
                sol.log.push_back({mu, total_iter, a.energy, gn, 0.0, false});
                stage_done = true;
                break;
            }

            Eigen::VectorXd delta;
            bool fallback = false;
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a.hessian);
            if (ldlt.info() == Eigen::Success) {
                delta = ldlt.solve(-a.gradient);
                // SPD solve contract: relative residual <= 1e-10, else retry
                const double res = (a.hessian * delta + a.gradient).norm();
                if (!(res <= 1e-10 * std::max(1.0, gn)) || !delta.allFinite()) fallback = true;
                if (!fallback && a.gradient.dot(delta) >= 0.0) fallback = true;  // not a descent direction
            } else {
                fallback = true;
            }
            if (fallback) delta = -a.gradient / (1.0 + a.hessian.coeffs().abs().maxCoeff());

            // Armijo backtracking, halving. The decrease test carries a noise
            // floor: near the optimum the true decrease sits below the
            // round-off of the energy sum.
            const double slope = a.gradient.dot(delta);
            const double noise = 1e-14 * (std::abs(a.energy) + 1.0);
            double step = 1.0;
            std::vector<double> trial = values;
            auto apply = [&](double s) {
                for (int d = 0; d < dofs.n_free; ++d)
                    trial[std::size_t(dofs.node_of_dof[std::size_t(d)])] =
                        values[std::size_t(dofs.node_of_dof[std::size_t(d)])] + s * delta[d];
            };
            double new_energy = 0.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                apply(step);
                new_energy = detail::energy_of(P, I, trial);
                if (std::isfinite(new_energy) && new_energy <= a.energy + 1e-4 * step * slope + noise) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                // energy is flat at round-off level; accept a full step iff it
                // still shrinks the gradient (quadratic convergence regime)
                apply(step = 1.0);
                FeFunction tw(m, trial);
                const Assembled ta = assemble(P, tw, &I);
                if (ta.gradient.norm() < gn) {
                    new_energy = ta.energy;
                    accepted = true;
                }
            }
            if (!accepted) break;  // stagnation; stage left unconverged
            values = trial;
            ++total_iter;
            sol.log.push_back({mu, total_iter, new_energy, gn, step, fallback});
        }
        if (!stage_done) {
            // re-measure; the last accepted step may already satisfy the tolerance
            FeFunction w(m, values);
            const Assembled a = assemble(P, w, &I);
            stage_done = a.gradient.norm() <= opts.tol;
        }
        ok = ok && stage_done;
    }

    sol.u = FeFunction(m, values);
    sol.iterations = total_iter;
    const Integrand I_final = P.integrand.with_mu(mu_stages.back());
    {
        const Assembled a = assemble(P, sol.u, &I_final);
        sol.grad_norm = a.gradient.norm();
        sol.energy_regularized = a.energy;
    }
    sol.energy = detail::energy_of(P, P.integrand, values);
    sol.converged = ok && sol.grad_norm <= opts.tol;
    return sol;
}

// Weak-form residual against random interior hat-function combinations,
// normalized by the Euclidean norm of the combination. Walks the elements
// directly rather than reusing the assembled gradient.
inline double verify_first_order(const Problem& P, const Solution& S, int probe_count,
                                 std::uint64_t seed = 7) {
    const Mesh& m = *P.mesh;
    const DofMap dofs(m);
    const QuadRule& qr = quad_rule(2);
    const Integrand I = P.integrand.with_mu(S.mu_path.empty() ? P.integrand.mu : S.mu_path.back());
    Rng rng(seed);

    double worst = 0.0;
    for (int probe = 0; probe < probe_count; ++probe) {
        std::vector<double> phi(std::size_t(m.node_count()), 0.0);
        double norm2 = 0.0;
        for (int d = 0; d < dofs.n_free; ++d) {
            const double c = rng.uniform(-1.0, 1.0);
            phi[std::size_t(dofs.node_of_dof[std::size_t(d)])] = c;
            norm2 += c * c;
        }
        double r = 0.0;
        for (int t = 0; t < m.triangle_count(); ++t) {
            const Vec2 du = triangle_gradient(m, S.u.values, t);
            const Vec2 dphi = triangle_gradient(m, phi, t);
            const auto& v = m.triangles()[std::size_t(t)].v;
            double acc = 0.0;
            for (std::size_t k = 0; k < qr.bary.size(); ++k) {
                const Vec2 xq = m.quad_point(t, qr.bary[k]);
                acc += qr.weights[k] * I.derivatives(xq, du).grad.dot(dphi);
                if (P.source) {
                    const auto& b = qr.bary[k];
                    const double fq = b[0] * P.source->values[std::size_t(v[0])] +
                                      b[1] * P.source->values[std::size_t(v[1])] +
                                      b[2] * P.source->values[std::size_t(v[2])];
                    const double pq = b[0] * phi[std::size_t(v[0])] + b[1] * phi[std::size_t(v[1])] +
                                      b[2] * phi[std::size_t(v[2])];
                    acc += qr.weights[k] * fq * pq;
                }
            }
            r += m.area(t) * acc;
        }
        worst = std::max(worst, std::abs(r) / std::sqrt(norm2));
    }
    return worst;
}

}  // namespace elliptlab

#endif
