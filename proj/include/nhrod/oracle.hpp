#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "nhrod/integrator.hpp"

namespace nhrod::oracle {

/**
 * Field values on a 6-cell anchored at (n, i). Slot order:
 * 0 (n,i-1)  1 (n,i)  2 (n,i+1)  3 (n+1,i-1)  4 (n+1,i)  5 (n+1,i+1)
 */
struct Cell6 {
    std::array<double, 6> x{}, y{}, theta{};
};

/// d L_d / d(cell value), same layout as Cell6.
struct CellGradient {
    std::array<double, 6> x{}, y{}, theta{};
};

enum class Differentiation { Analytic, Numeric };

struct MeshSteps {
    double h; ///< time step
    double k; ///< space step
};

/**
 * Discrete Lagrangian density on one cell: forward time differences for the
 * kinetic terms, a forward space difference for the twist and the centred
 * second difference of the lower row for bending. Only slots 0, 1, 2 and 4
 * contribute.
 */
inline double discrete_lagrangian(const Cell6& c, const RodParameters& p, MeshSteps m)
{
    const double h2 = m.h * m.h, k2 = m.k * m.k;
    const double dx = c.x[4] - c.x[1], dy = c.y[4] - c.y[1], dth = c.theta[4] - c.theta[1];
    const double twist = c.theta[2] - c.theta[1];
    const double cx = c.x[0] - 2 * c.x[1] + c.x[2];
    const double cy = c.y[0] - 2 * c.y[1] + c.y[2];
    return p.rho / (2 * h2) * (dx * dx + dy * dy) + p.alpha / (2 * h2) * dth * dth -
           p.beta / (2 * k2) * twist * twist - p.bend_k / (2 * k2 * k2) * (cx * cx + cy * cy);
}

inline CellGradient cell_gradient_analytic(const Cell6& c, const RodParameters& p, MeshSteps m)
{
    const double h2 = m.h * m.h, k2 = m.k * m.k, k4 = k2 * k2;
    CellGradient g;

    const double vx = p.rho / h2 * (c.x[4] - c.x[1]);
    const double vy = p.rho / h2 * (c.y[4] - c.y[1]);
    const double vth = p.alpha / h2 * (c.theta[4] - c.theta[1]);
    const double bx = p.bend_k / k4 * (c.x[0] - 2 * c.x[1] + c.x[2]);
    const double by = p.bend_k / k4 * (c.y[0] - 2 * c.y[1] + c.y[2]);
    const double tw = p.beta / k2 * (c.theta[2] - c.theta[1]);

    g.x[0] = -bx;
    g.x[1] = -vx + 2 * bx;
    g.x[2] = -bx;
    g.x[4] = vx;

    g.y[0] = -by;
    g.y[1] = -vy + 2 * by;
    g.y[2] = -by;
    g.y[4] = vy;

    g.theta[1] = -vth + tw;
    g.theta[2] = -tw;
    g.theta[4] = vth;
    return g;
}

/// Central differences with step 1e-6 max(1, |value|).
inline CellGradient cell_gradient_numeric(const Cell6& c, const RodParameters& p, MeshSteps m)
{
    CellGradient g;
    auto differentiate = [&](std::array<double, 6> Cell6::*field, std::array<double, 6>& out) {
        for (std::size_t s = 0; s < 6; ++s) {
            Cell6 plus = c, minus = c;
            const double step = 1e-6 * std::max(1.0, std::abs((c.*field)[s]));
            (plus.*field)[s] += step;
            (minus.*field)[s] -= step;
            out[s] = (discrete_lagrangian(plus, p, m) - discrete_lagrangian(minus, p, m)) / (2 * step);
        }
    };
    differentiate(&Cell6::x, g.x);
    differentiate(&Cell6::y, g.y);
    differentiate(&Cell6::theta, g.theta);
    return g;
}

inline CellGradient cell_gradient(const Cell6& c, const RodParameters& p, MeshSteps m, Differentiation mode)
{
    return mode == Differentiation::Analytic ? cell_gradient_analytic(c, p, m) : cell_gradient_numeric(c, p, m);
}

/**
 * Values on rows (n-1, n, n+1) x columns (i-2 .. i+2) around a centre node;
 * every cell that contains (n, i) fits inside.
 */
struct Patch {
    std::array<std::array<double, 5>, 3> x{}, y{}, theta{};
};

using Triple = std::array<double, 3>;

/**
 * Discrete Euler-Lagrange residual at the patch centre:
 *
 *   -h^2 [ D1 L(n,i+1) + D2 L(n,i) + D3 L(n,i-1) + D4 L(n-1,i+1) + D5 L(n-1,i) + D6 L(n-1,i-1) ]
 *
 * normalised so that for x it equals rho (x_{n+1} - 2x_n + x_{n-1}) + (h^2 K / k^4) D4 x_n.
 * Components are ordered (x, y, theta).
 */
inline Triple discrete_el_residual(const Patch& patch, const RodParameters& p, MeshSteps m,
                                   Differentiation mode = Differentiation::Analytic)
{
    // cell anchored at (row, col) in patch coordinates; col is the cell's middle column
    auto cell_at = [&](int row, int col) {
        Cell6 c;
        for (int s = 0; s < 3; ++s) {
            c.x[s] = patch.x[row][col - 1 + s];
            c.y[s] = patch.y[row][col - 1 + s];
            c.theta[s] = patch.theta[row][col - 1 + s];
            c.x[3 + s] = patch.x[row + 1][col - 1 + s];
            c.y[3 + s] = patch.y[row + 1][col - 1 + s];
            c.theta[3 + s] = patch.theta[row + 1][col - 1 + s];
        }
        return c;
    };

    // (row, col, slot): the centre node (row 1, col 2) sits in slot `slot` of that cell
    struct Term {
        int row, col, slot;
    };
    static constexpr std::array<Term, 6> terms{{
        {1, 3, 0}, {1, 2, 1}, {1, 1, 2}, {0, 3, 3}, {0, 2, 4}, {0, 1, 5},
    }};

    Triple sum{};
    for (const auto& t : terms) {
        const auto g = cell_gradient(cell_at(t.row, t.col), p, m, mode);
        sum[0] += g.x[std::size_t(t.slot)];
        sum[1] += g.y[std::size_t(t.slot)];
        sum[2] += g.theta[std::size_t(t.slot)];
    }
    const double h2 = m.h * m.h;
    return {-h2 * sum[0], -h2 * sum[1], -h2 * sum[2]};
}

/// Patch around node i of a pair plus a candidate next level, ghosts by grid rule.
inline Patch make_patch(const FieldLevel& prev, const FieldLevel& curr, const FieldLevel& next, std::size_t i,
                        const Grid& grid)
{
    Patch patch;
    const std::array<const FieldLevel*, 3> rows{&prev, &curr, &next};
    const auto rule_c = ghost_rule(grid, FieldKind::Centerline);
    const auto rule_t = ghost_rule(grid, FieldKind::Torsion);
    for (std::size_t r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
            const long j = long(i) - 2 + c;
            patch.x[r][std::size_t(c)] = extended_value(rows[r]->x, j, rule_c);
            patch.y[r][std::size_t(c)] = extended_value(rows[r]->y, j, rule_c);
            patch.theta[r][std::size_t(c)] = extended_value(rows[r]->theta, j, rule_t);
        }
    }
    return patch;
}

using Covector = std::array<double, 3>; ///< components on (dx, dy, dtheta)

/**
 * Generators of the discrete reaction forces at node i:
 * Phi1 = dx + (R/2k)(y_{i+1} - y_{i-1}) dtheta, Phi2 = dy - (R/2k)(x_{i+1} - x_{i-1}) dtheta.
 */
inline std::array<Covector, 2> chetaev_oneform(const FieldLevel& level, std::size_t i, const RodParameters& p,
                                               const Grid& grid)
{
    const double yp = diff1_central(level.y, i, grid, FieldKind::Centerline);
    const double xp = diff1_central(level.x, i, grid, FieldKind::Centerline);
    return {Covector{1.0, 0.0, p.radius * yp}, Covector{0.0, 1.0, -p.radius * xp}};
}

/**
 * Semi-discretized rolling constraints at node i: spatial derivatives by
 * central differences, time derivatives kept as the velocity (vx, vy, vtheta).
 */
inline std::array<double, 2> semi_discrete_constraints(const FieldLevel& level, std::size_t i, const Triple& v,
                                                       const RodParameters& p, const Grid& grid)
{
    const double yp = diff1_central(level.y, i, grid, FieldKind::Centerline);
    const double xp = diff1_central(level.x, i, grid, FieldKind::Centerline);
    return {v[0] + p.radius * v[2] * yp, v[1] - p.radius * v[2] * xp};
}

/**
 * Chetaev construction for an arbitrary semi-discrete constraint: the vertical
 * endomorphism turns d(phi) into its velocity part, i.e. the covector
 * d phi / d v. Computed by central differences (exact for constraints affine in v).
 */
template <std::size_t Dim>
std::array<double, Dim> chetaev_from_constraint(const std::function<double(const std::array<double, Dim>&)>& phi,
                                                const std::array<double, Dim>& at_velocity)
{
    std::array<double, Dim> out{};
    for (std::size_t a = 0; a < Dim; ++a) {
        auto plus = at_velocity, minus = at_velocity;
        const double step = 1e-6 * std::max(1.0, std::abs(at_velocity[a]));
        plus[a] += step;
        minus[a] -= step;
        out[a] = (phi(plus) - phi(minus)) / (2 * step);
    }
    return out;
}

class oracle_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force solution of the discrete nonholonomic equations at one node.
struct NodeSolution {
    double x, y, theta, lambda, mu;
    int iterations;
};

/**
 * Solves {discrete NH field equations at (n,i), both discrete constraints} for
 * the five unknowns (x, y, theta)_{n+1,i}, lambda_i, mu_i by Newton iteration
 * with a finite-difference Jacobian, starting from the current level.
 *
 * Free ends: i must satisfy 2 <= i <= N-3 so the stencil needs no ghosts.
 */
inline NodeSolution solve_node(const StatePair& state, const RodParameters& p, const Grid& grid, std::size_t i)
{
    state.validate(grid);
    const std::size_t n = grid.size();
    detail::expects(i < n, "solve_node: node out of range");
    detail::expects(grid.periodic() || (i >= 2 && i + 2 < n), "solve_node: node must be interior");

    const MeshSteps m{state.dt, grid.spacing()};
    const double h2 = m.h * m.h;
    const auto phi = chetaev_oneform(state.curr, i, p, grid);
    const auto& prev = state.prev;
    const auto& curr = state.curr;

    using Vec5 = Eigen::Matrix<double, 5, 1>;
    using Mat5 = Eigen::Matrix<double, 5, 5>;

    // next-row values other than node i do not enter the equations at (n, i);
    // fill them with the current level
    FieldLevel next = curr;
    auto residual = [&](const Vec5& u) {
        next.x[i] = u[0];
        next.y[i] = u[1];
        next.theta[i] = u[2];
        const auto el = discrete_el_residual(make_patch(prev, curr, next, i, grid), p, m);
        Vec5 f;
        for (int c = 0; c < 3; ++c) f[c] = el[std::size_t(c)] - h2 * (u[3] * phi[0][std::size_t(c)] + u[4] * phi[1][std::size_t(c)]);
        const double dth = u[2] - prev.theta[i];
        f[3] = u[0] - prev.x[i] + phi[0][2] * dth;
        f[4] = u[1] - prev.y[i] + phi[1][2] * dth;
        return f;
    };

    Vec5 u;
    u << curr.x[i], curr.y[i], curr.theta[i], 0.0, 0.0;
    for (int it = 1; it <= 100; ++it) {
        const Vec5 f = residual(u);
        Mat5 jac;
        for (int c = 0; c < 5; ++c) {
            const double step = 1e-6 * std::max(1.0, std::abs(u[c]));
            Vec5 up = u, um = u;
            up[c] += step;
            um[c] -= step;
            jac.col(c) = (residual(up) - residual(um)) / (2 * step);
        }
        const Vec5 delta = jac.fullPivLu().solve(-f);
        u += delta;
        const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
        if (delta.cwiseAbs().maxCoeff() <= 1e-12 * scale)
            return {u[0], u[1], u[2], u[3], u[4], it};
    }
    throw oracle_failure("solve_node: Newton iteration did not converge in 100 steps");
}

/// max |brute-force - closed form| over (x, y, theta, lambda, mu) at node i.
inline double verify_step_equivalence(const StatePair& state, const RodParameters& p, const Grid& grid, std::size_t i)
{
    const auto brute = solve_node(state, p, grid, i);
    const auto step = constrained_step(state, p, grid);
    return std::max({std::abs(brute.x - step.next.x[i]), std::abs(brute.y - step.next.y[i]),
                     std::abs(brute.theta - step.next.theta[i]), std::abs(brute.lambda - step.multipliers.lambda[i]),
                     std::abs(brute.mu - step.multipliers.mu[i])});
}

} // namespace nhrod::oracle
