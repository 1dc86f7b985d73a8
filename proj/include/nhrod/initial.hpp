#pragma once

#include "nhrod/integrator.hpp"

namespace nhrod {

struct NodalVelocity {
    std::vector<double> x, y, theta;
};

/**
 * Project velocities onto the rolling constraints of `level`, orthogonally in
 * the kinetic metric diag(rho, rho, alpha). Admissible velocities satisfy
 * v_x = -a v_theta and v_y = b v_theta, so only v_theta is free:
 *
 *   v_theta = (alpha u_theta - rho a u_x + rho b u_y) / (alpha + rho (a^2 + b^2))
 */
inline NodalVelocity project_velocity(const FieldLevel& level, const NodalVelocity& u, const RodParameters& params,
                                      const Grid& grid)
{
    const auto c = constraint_coefficients(level, params, grid);
    const std::size_t n = grid.size();
    NodalVelocity v{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = c.a[i], b = c.b[i];
        v.theta[i] = (params.alpha * u.theta[i] - params.rho * a * u.x[i] + params.rho * b * u.y[i]) /
                     (params.alpha + params.rho * (a * a + b * b));
        v.x[i] = -a * v.theta[i];
        v.y[i] = b * v.theta[i];
    }
    return v;
}

/**
 * Continuous-time acceleration of the constrained, spatially discrete rod:
 * each node is a rolling disc driven by the elastic forces of its neighbours.
 * `velocity` must already be admissible (see project_velocity).
 *
 * Differentiating the constraints gives a_x = -a a_theta - a' v_theta and
 * a_y = b a_theta + b' v_theta, where a', b' are the time derivatives of the
 * coefficients. Eliminating the multipliers leaves
 *
 *   (alpha + rho(a^2+b^2)) a_theta = F_theta - a F_x + b F_y - rho v_theta (a a' + b b').
 */
inline NodalVelocity constrained_acceleration(const FieldLevel& level, const NodalVelocity& velocity,
                                              const RodParameters& params, const Grid& grid)
{
    const std::size_t n = grid.size();
    const auto c = constraint_coefficients(level, params, grid);
    const auto elastic = elastic_acceleration(level, params, grid);

    std::vector<double> a_dot(n), b_dot(n);
    for (std::size_t i = 0; i < n; ++i) {
        a_dot[i] = params.radius * diff1_central(velocity.y, i, grid, FieldKind::Centerline);
        b_dot[i] = params.radius * diff1_central(velocity.x, i, grid, FieldKind::Centerline);
    }

    NodalVelocity acc{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = c.a[i], b = c.b[i], vth = velocity.theta[i];
        const double fx = params.rho * elastic.x[i];
        const double fy = params.rho * elastic.y[i];
        const double fth = params.alpha * elastic.theta[i];
        acc.theta[i] = (fth - a * fx + b * fy - params.rho * vth * (a * a_dot[i] + b * b_dot[i])) /
                       (params.alpha + params.rho * (a * a + b * b));
        acc.x[i] = -a * acc.theta[i] - a_dot[i] * vth;
        acc.y[i] = b * acc.theta[i] + b_dot[i] * vth;
    }
    return acc;
}

/**
 * Seeds the three-level scheme from t = 0 data.
 *
 * With `constrained`, velocities are first projected onto the rolling
 * constraints and level 1 is the second-order Taylor step
 * phi_0 + h v_0 + (h^2/2) a_0 with a_0 the constrained acceleration.
 * Otherwise v_0 is used as given and a_0 is the free elastic acceleration.
 */
inline StatePair build_initial_pair(const InitialData& data, const RodParameters& params, const Grid& grid,
                                    double dt, bool constrained = true)
{
    params.validate();
    data.validate(grid.size());
    detail::expects(dt > 0 && std::isfinite(dt), "build_initial_pair: dt must be positive");

    const std::size_t n = grid.size();
    FieldLevel level0(n, 0);
    level0.x = data.x0;
    level0.y = data.y0;
    level0.theta = data.theta0;

    NodalVelocity v{data.vx0, data.vy0, data.vtheta0};
    NodalVelocity acc;
    if (constrained) {
        v = project_velocity(level0, v, params, grid);
        acc = constrained_acceleration(level0, v, params, grid);
    } else {
        auto e = elastic_acceleration(level0, params, grid);
        acc = NodalVelocity{std::move(e.x), std::move(e.y), std::move(e.theta)};
    }

    const double half_h2 = dt * dt / 2;
    FieldLevel level1(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        level1.x[i] = level0.x[i] + dt * v.x[i] + half_h2 * acc.x[i];
        level1.y[i] = level0.y[i] + dt * v.y[i] + half_h2 * acc.y[i];
        level1.theta[i] = level0.theta[i] + dt * v.theta[i] + half_h2 * acc.theta[i];
    }
    return StatePair{std::move(level0), std::move(level1), dt};
}

} // namespace nhrod
