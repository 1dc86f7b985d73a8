#pragma once

#include <functional>
#include <utility>

#include "nhrod/integrator.hpp"

namespace nhrod {

struct DiagnosticsRecord {
    long step = 0;
    double t = 0.0;
    double energy = 0.0;
    double px = 0.0, py = 0.0;
    double ptheta = 0.0;
    double jz = 0.0;
    double c1_max = 0.0, c2_max = 0.0;
    double stretch_min = 0.0, stretch_max = 0.0;
};

namespace detail {
/// Trapezoidal weights on free meshes, uniform k on periodic ones.
inline double quadrature_weight(std::size_t i, const Grid& grid)
{
    const double k = grid.spacing();
    if (!grid.periodic() && (i == 0 || i + 1 == grid.size())) return k / 2;
    return k;
}

/// Bending plus twisting energy of one level. The twist term is summed over
/// the bonds where the forward difference lives.
inline double potential_energy(const FieldLevel& level, const RodParameters& p, const Grid& grid)
{
    const std::size_t n = grid.size();
    const double k = grid.spacing();
    double bend = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = diff2(level.x, i, grid, FieldKind::Centerline);
        const double cy = diff2(level.y, i, grid, FieldKind::Centerline);
        bend += quadrature_weight(i, grid) * (cx * cx + cy * cy);
    }
    const std::size_t bonds = grid.periodic() ? n : n - 1;
    double twist = 0.0;
    for (std::size_t j = 0; j < bonds; ++j) {
        const double tp = diff1_forward(level.theta, j, grid, FieldKind::Torsion);
        twist += k * tp * tp;
    }
    return 0.5 * p.bend_k * bend + 0.5 * p.beta * twist;
}
} // namespace detail

/**
 * Discrete total energy of a pair of levels: kinetic energy of the forward
 * difference velocity plus the average of the two levels' elastic energies.
 * The inextensibility term is omitted (p = 0).
 */
inline double total_energy(const StatePair& state, const RodParameters& p, const Grid& grid)
{
    state.validate(grid);
    const double h = state.dt;
    double kinetic = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double vx = (state.curr.x[i] - state.prev.x[i]) / h;
        const double vy = (state.curr.y[i] - state.prev.y[i]) / h;
        const double vt = (state.curr.theta[i] - state.prev.theta[i]) / h;
        kinetic += detail::quadrature_weight(i, grid) * (p.rho * (vx * vx + vy * vy) + p.alpha * vt * vt);
    }
    return 0.5 * kinetic +
           0.5 * (detail::potential_energy(state.prev, p, grid) + detail::potential_energy(state.curr, p, grid));
}

inline std::pair<double, double> linear_momentum(const StatePair& state, const RodParameters& p, const Grid& grid)
{
    state.validate(grid);
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = detail::quadrature_weight(i, grid) * p.rho / state.dt;
        px += w * (state.curr.x[i] - state.prev.x[i]);
        py += w * (state.curr.y[i] - state.prev.y[i]);
    }
    return {px, py};
}

/// Integral of rho (x ydot - y xdot), positions taken at the midpoint of the pair.
inline double angular_momentum(const StatePair& state, const RodParameters& p, const Grid& grid)
{
    state.validate(grid);
    double jz = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xm = 0.5 * (state.curr.x[i] + state.prev.x[i]);
        const double ym = 0.5 * (state.curr.y[i] + state.prev.y[i]);
        const double vx = (state.curr.x[i] - state.prev.x[i]) / state.dt;
        const double vy = (state.curr.y[i] - state.prev.y[i]) / state.dt;
        jz += detail::quadrature_weight(i, grid) * p.rho * (xm * vy - ym * vx);
    }
    return jz;
}

inline double torsional_momentum(const StatePair& state, const RodParameters& p, const Grid& grid)
{
    state.validate(grid);
    double pt = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        pt += detail::quadrature_weight(i, grid) * p.alpha * (state.curr.theta[i] - state.prev.theta[i]) / state.dt;
    return pt;
}

/// Residuals of the discrete rolling constraints over three consecutive levels.
inline ConstraintResiduals constraint_residuals(const StatePair& state, const FieldLevel& next, const RodParameters& p,
                                                const Grid& grid)
{
    state.validate(grid);
    detail::expects(next.well_formed(grid.size()), "constraint_residuals: malformed next level");
    return discrete_constraint_residuals(state.prev, state.curr, next, p, grid);
}

/// (min, max) over nodes of |r'| with centred differences; 1 for an unstretched rod.
inline std::pair<double, double> stretch_extrema(const FieldLevel& level, const Grid& grid)
{
    detail::expects(level.well_formed(grid.size()), "stretch_extrema: malformed level");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xp = diff1_central(level.x, i, grid, FieldKind::Centerline);
        const double yp = diff1_central(level.y, i, grid, FieldKind::Centerline);
        const double s = std::sqrt(xp * xp + yp * yp);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

/// Analytic derivatives of a smooth candidate solution at one point (s, t).
struct JetSample {
    double x_s = 0, y_s = 0;
    double x_t = 0, y_t = 0, theta_t = 0;
    double x_tt = 0, y_tt = 0, theta_tt = 0;
    double x_ssss = 0, y_ssss = 0, theta_ss = 0;
};

using JetSampler = std::function<JetSample(double s, double t)>;

struct ContinuumResidual {
    double x = 0, y = 0, theta = 0; ///< field equations
    double c1 = 0, c2 = 0;          ///< rolling constraints
};

/**
 * Continuum nonholonomic field equations, with the reaction torque
 * R(lambda y' - mu x') used by the discrete scheme:
 *
 *   rho x_tt + K x'''' - lambda
 *   rho y_tt + K y'''' - mu
 *   alpha theta_tt - beta theta'' - R(lambda y' - mu x')
 *
 * and the constraints x_t + R theta_t y', y_t - R theta_t x'.
 */
inline ContinuumResidual continuum_nh_residual(const JetSampler& sampler, const RodParameters& p, double s, double t,
                                               double lambda, double mu)
{
    const JetSample j = sampler(s, t);
    ContinuumResidual r;
    r.x = p.rho * j.x_tt + p.bend_k * j.x_ssss - lambda;
    r.y = p.rho * j.y_tt + p.bend_k * j.y_ssss - mu;
    r.theta = p.alpha * j.theta_tt - p.beta * j.theta_ss - p.radius * (lambda * j.y_s - mu * j.x_s);
    r.c1 = j.x_t + p.radius * j.theta_t * j.y_s;
    r.c2 = j.y_t - p.radius * j.theta_t * j.x_s;
    return r;
}

/**
 * Full diagnostics row for the pair (n, n+1). `residuals` are those of the
 * step that produced level n+1.
 */
inline DiagnosticsRecord make_record(long step, const StatePair& state, const ConstraintResiduals& residuals,
                                     const RodParameters& p, const Grid& grid)
{
    DiagnosticsRecord r;
    r.step = step;
    r.t = double(step) * state.dt;
    r.energy = total_energy(state, p, grid);
    std::tie(r.px, r.py) = linear_momentum(state, p, grid);
    r.ptheta = torsional_momentum(state, p, grid);
    r.jz = angular_momentum(state, p, grid);
    r.c1_max = residuals.c1_max;
    r.c2_max = residuals.c2_max;
    std::tie(r.stretch_min, r.stretch_max) = stretch_extrema(state.prev, grid);
    return r;
}

} // namespace nhrod
