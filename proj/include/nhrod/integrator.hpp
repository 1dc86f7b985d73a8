#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nhrod/core.hpp"
#include "nhrod/stencils.hpp"

namespace nhrod {

/// Per-node reaction strengths of the two rolling constraints.
struct Multipliers {
    std::vector<double> lambda, mu;
};

struct StepResult {
    FieldLevel next;
    Multipliers multipliers;
    /// max over nodes and both constraints of the absolute discrete residual
    double constraint_residual_max = 0.0;
};

/**
 * Components of the discrete constraint generators at one time level:
 * a_i = R (y_{i+1} - y_{i-1}) / 2k and b_i = R (x_{i+1} - x_{i-1}) / 2k.
 *
 * The rolling constraints read dx + a dtheta = 0 and dy - b dtheta = 0.
 */
struct ConstraintCoefficients {
    std::vector<double> a, b;
};

/// Elastic accelerations at one level: -(K/rho) x'''', -(K/rho) y'''', (beta/alpha) theta''.
struct ElasticAcceleration {
    std::vector<double> x, y, theta;
};

inline ElasticAcceleration elastic_acceleration(const FieldLevel& level, const RodParameters& params,
                                                const Grid& grid)
{
    const std::size_t n = grid.size();
    const double k = grid.spacing();
    const double bend = params.bend_k / (params.rho * k * k * k * k);
    const double twist = params.beta / (params.alpha * k * k);
    ElasticAcceleration acc{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        acc.x[i] = -bend * delta4(level.x, i, grid, FieldKind::Centerline);
        acc.y[i] = -bend * delta4(level.y, i, grid, FieldKind::Centerline);
        acc.theta[i] = twist * delta2(level.theta, i, grid, FieldKind::Torsion);
    }
    return acc;
}

/**
 * Unconstrained leapfrog update: the next level with both multipliers set to zero.
 *
 *   X = 2x_n - x_{n-1} - (h^2 K / rho k^4) D4 x_n
 *   Theta = 2theta_n - theta_{n-1} + (beta h^2 / alpha k^2) D2 theta_n
 */
inline FieldLevel free_predictor(const StatePair& state, const RodParameters& params, const Grid& grid)
{
    state.validate(grid);
    const std::size_t n = grid.size();
    const double h2 = state.dt * state.dt;
    const auto acc = elastic_acceleration(state.curr, params, grid);

    FieldLevel out(n, state.curr.time_index + 1);
    for (std::size_t i = 0; i < n; ++i) {
        out.x[i] = 2 * state.curr.x[i] - state.prev.x[i] + h2 * acc.x[i];
        out.y[i] = 2 * state.curr.y[i] - state.prev.y[i] + h2 * acc.y[i];
        out.theta[i] = 2 * state.curr.theta[i] - state.prev.theta[i] + h2 * acc.theta[i];
    }
    return out;
}

inline ConstraintCoefficients constraint_coefficients(const FieldLevel& level, const RodParameters& params,
                                                      const Grid& grid)
{
    detail::expects(level.well_formed(grid.size()), "constraint_coefficients: malformed level");
    const std::size_t n = grid.size();
    ConstraintCoefficients c{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        c.a[i] = params.radius * diff1_central(level.y, i, grid, FieldKind::Centerline);
        c.b[i] = params.radius * diff1_central(level.x, i, grid, FieldKind::Centerline);
    }
    return c;
}

/**
 * Closes the update equations with the discrete rolling constraints.
 *
 * At every node the unknowns (lambda_i, mu_i) enter linearly and only through
 * node i of the new level, so each node is an independent 2x2 SPD system:
 *
 *   [ h2/rho + h2/alpha a^2   -h2/alpha a b         ] [lambda]   [ -(X - x_{n-1}) - a (Theta - theta_{n-1}) ]
 *   [ -h2/alpha a b           h2/rho + h2/alpha b^2 ] [mu    ] = [ -(Y - y_{n-1}) + b (Theta - theta_{n-1}) ]
 */
inline Multipliers solve_multipliers(const FieldLevel& predictor, const StatePair& state,
                                     const ConstraintCoefficients& coeffs, const RodParameters& params)
{
    const std::size_t n = predictor.size();
    detail::expects(predictor.well_formed(n) && state.prev.well_formed(n), "solve_multipliers: malformed input");
    detail::expects(coeffs.a.size() == n && coeffs.b.size() == n && detail::all_finite(coeffs.a) &&
                        detail::all_finite(coeffs.b),
                    "solve_multipliers: malformed coefficients");

    const double h2 = state.dt * state.dt;
    const double m_lin = h2 / params.rho;
    const double m_rot = h2 / params.alpha;
    const auto& prev = state.prev;

    Multipliers out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = coeffs.a[i], b = coeffs.b[i];
        const double dth = predictor.theta[i] - prev.theta[i];
        const double r1 = -(predictor.x[i] - prev.x[i]) - a * dth;
        const double r2 = -(predictor.y[i] - prev.y[i]) + b * dth;

        const double m11 = m_lin + m_rot * a * a;
        const double m22 = m_lin + m_rot * b * b;
        const double m12 = -m_rot * a * b;
        const double det = m11 * m22 - m12 * m12;

        out.lambda[i] = (r1 * m22 - m12 * r2) / det;
        out.mu[i] = (m11 * r2 - m12 * r1) / det;
    }
    return out;
}

/// max over nodes of |x_{n+1} - x_{n-1} + a_n (theta_{n+1} - theta_{n-1})| and the y analogue.
struct ConstraintResiduals {
    double c1_max = 0.0;
    double c2_max = 0.0;
};

inline ConstraintResiduals discrete_constraint_residuals(const FieldLevel& prev, const FieldLevel& curr,
                                                         const FieldLevel& next, const RodParameters& params,
                                                         const Grid& grid)
{
    const auto coeffs = constraint_coefficients(curr, params, grid);
    ConstraintResiduals r;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double dth = next.theta[i] - prev.theta[i];
        r.c1_max = std::max(r.c1_max, std::abs(next.x[i] - prev.x[i] + coeffs.a[i] * dth));
        r.c2_max = std::max(r.c2_max, std::abs(next.y[i] - prev.y[i] - coeffs.b[i] * dth));
    }
    return r;
}

namespace detail {
inline double level_magnitude(const FieldLevel& level, double radius)
{
    double m = 0.0;
    for (std::size_t i = 0; i < level.size(); ++i)
        m = std::max({m, std::abs(level.x[i]), std::abs(level.y[i]), radius * std::abs(level.theta[i])});
    return m;
}
} // namespace detail

/// Relative tolerance the constrained stepper guarantees on its residuals.
inline constexpr double constraint_tolerance = 1e-10;

/**
 * One step of the discrete nonholonomic scheme.
 *
 * theta is corrected with the reaction torque R(lambda y' - mu x'); x and y are
 * then read off the constraints themselves, which is algebraically the same as
 * X + (h^2/rho) lambda but keeps the discrete constraints satisfied to roundoff
 * (and leaves x, y bit-identical when R = 0).
 */
inline StepResult constrained_step(const StatePair& state, const RodParameters& params, const Grid& grid)
{
    const auto predictor = free_predictor(state, params, grid);
    const auto coeffs = constraint_coefficients(state.curr, params, grid);
    auto mult = solve_multipliers(predictor, state, coeffs, params);

    const std::size_t n = grid.size();
    const double m_rot = state.dt * state.dt / params.alpha;
    const auto& prev = state.prev;

    StepResult res{FieldLevel(n, state.curr.time_index + 1), std::move(mult), 0.0};
    auto& next = res.next;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = coeffs.a[i], b = coeffs.b[i];
        next.theta[i] = predictor.theta[i] + m_rot * (a * res.multipliers.lambda[i] - b * res.multipliers.mu[i]);
        const double dth = next.theta[i] - prev.theta[i];
        next.x[i] = prev.x[i] - a * dth;
        next.y[i] = prev.y[i] + b * dth;
    }

    const auto r = discrete_constraint_residuals(prev, state.curr, next, params, grid);
    res.constraint_residual_max = std::max(r.c1_max, r.c2_max);

    const double scale = std::max({1.0, detail::level_magnitude(prev, params.radius),
                                   detail::level_magnitude(next, params.radius)});
    if (!(res.constraint_residual_max <= constraint_tolerance * scale)) {
        std::ostringstream msg;
        msg << "constrained_step: constraint residual " << res.constraint_residual_max << " at step "
            << next.time_index << " exceeds tolerance";
        throw consistency_failure(msg.str());
    }
    return res;
}

/// Unconstrained free-rod step (discrete Euler-Lagrange equations).
inline FieldLevel free_step(const StatePair& state, const RodParameters& params, const Grid& grid)
{
    return free_predictor(state, params, grid);
}

/// Advance a pair by one level.
inline StatePair advance(const StatePair& state, FieldLevel next)
{
    return StatePair{state.curr, std::move(next), state.dt};
}

/**
 * Explicit time step bound of the Euler-Bernoulli leapfrog, k^2 sqrt(rho/K) / 2.
 * Infinite when there is no bending stiffness.
 */
inline double stability_limit(const RodParameters& params, const Grid& grid)
{
    if (params.bend_k <= 0) return std::numeric_limits<double>::infinity();
    const double k = grid.spacing();
    return k * k * std::sqrt(params.rho / params.bend_k) / 2;
}

} // namespace nhrod
