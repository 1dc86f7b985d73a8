#pragma once

#include <algorithm>
#include <span>

#include "nhrod/core.hpp"

namespace nhrod {

/// How values beyond the mesh are manufactured.
enum class GhostRule {
    CenterlineFree, ///< f'' = 0 and f''' = 0 at a free end
    TorsionFree,    ///< f' = 0 at a free end (even reflection)
    Periodic,       ///< wrap modulo N
};

/// Which field a stencil is applied to; selects the free-end ghost rule.
enum class FieldKind { Centerline, Torsion };

inline GhostRule ghost_rule(const Grid& grid, FieldKind kind)
{
    if (grid.periodic()) return GhostRule::Periodic;
    return kind == FieldKind::Centerline ? GhostRule::CenterlineFree : GhostRule::TorsionFree;
}

/**
 * Value of `field` at a virtual node just outside the mesh.
 *
 * Only the two ghost layers used by the stencils are defined:
 * virtual_index in {-2, -1, N, N+1}.
 *
 * CenterlineFree: f_{-1} = 2f_0 - f_1 makes the centered f'' vanish at node 0,
 * f_{-2} = f_2 - 4f_1 + 4f_0 then makes the centered f''' vanish there too.
 * TorsionFree: f_{-1} = f_1, f_{-2} = f_2. Both are mirrored at the right end.
 */
inline double ghost_value(std::span<const double> field, long virtual_index, GhostRule rule)
{
    const long n = long(field.size());
    detail::expects(n >= long(Grid::min_nodes), "ghost_value: field too short");
    detail::expects(virtual_index == -2 || virtual_index == -1 || virtual_index == n || virtual_index == n + 1,
                    "ghost_value: virtual index must be -2, -1, N or N+1");

    auto f = [&](long i) { return field[std::size_t(std::clamp(i, 0L, n - 1))]; };

    switch (rule) {
    case GhostRule::Periodic:
        return virtual_index < 0 ? f(virtual_index + n) : f(virtual_index - n);
    case GhostRule::TorsionFree:
        if (virtual_index < 0) return f(-virtual_index);
        return f(2 * (n - 1) - virtual_index);
    case GhostRule::CenterlineFree:
        switch (virtual_index - (virtual_index < 0 ? 0 : n)) {
        case -1: return 2 * f(0) - f(1);
        case -2: return f(2) - 4 * f(1) + 4 * f(0);
        case 0: return 2 * f(n - 1) - f(n - 2);
        default: return f(n - 3) - 4 * f(n - 2) + 4 * f(n - 1);
        }
    }
    return 0.0; // unreachable
}

/// Field value at any index in [-2, N+1], resolving ghosts by `rule`.
inline double extended_value(std::span<const double> field, long i, GhostRule rule)
{
    if (i >= 0 && i < long(field.size())) return field[std::size_t(i)];
    return ghost_value(field, i, rule);
}

namespace detail {
inline void check_node(std::span<const double> field, std::size_t i, const Grid& grid)
{
    expects(field.size() == grid.size(), "stencil: field size does not match grid");
    expects(i < grid.size(), "stencil: node index out of range");
}
} // namespace detail

/// (f_{i+1} - f_{i-1}) / 2k
inline double diff1_central(std::span<const double> field, std::size_t i, const Grid& grid,
                            FieldKind kind = FieldKind::Centerline)
{
    detail::check_node(field, i, grid);
    const auto rule = ghost_rule(grid, kind);
    const long j = long(i);
    return (extended_value(field, j + 1, rule) - extended_value(field, j - 1, rule)) / (2 * grid.spacing());
}

/// (f_{i+1} - f_i) / k
inline double diff1_forward(std::span<const double> field, std::size_t i, const Grid& grid,
                            FieldKind kind = FieldKind::Torsion)
{
    detail::check_node(field, i, grid);
    const auto rule = ghost_rule(grid, kind);
    const long j = long(i);
    return (extended_value(field, j + 1, rule) - field[i]) / grid.spacing();
}

/// Undivided second difference f_{i+1} - 2f_i + f_{i-1}.
inline double delta2(std::span<const double> field, std::size_t i, const Grid& grid,
                     FieldKind kind = FieldKind::Centerline)
{
    detail::check_node(field, i, grid);
    const auto rule = ghost_rule(grid, kind);
    const long j = long(i);
    return extended_value(field, j + 1, rule) - 2 * field[i] + extended_value(field, j - 1, rule);
}

/// Undivided fourth difference f_{i+2} - 4f_{i+1} + 6f_i - 4f_{i-1} + f_{i-2}.
inline double delta4(std::span<const double> field, std::size_t i, const Grid& grid,
                     FieldKind kind = FieldKind::Centerline)
{
    detail::check_node(field, i, grid);
    const auto rule = ghost_rule(grid, kind);
    const long j = long(i);
    auto f = [&](long m) { return extended_value(field, m, rule); };
    return f(j + 2) - 4 * f(j + 1) + 6 * field[i] - 4 * f(j - 1) + f(j - 2);
}

inline double diff2(std::span<const double> field, std::size_t i, const Grid& grid,
                    FieldKind kind = FieldKind::Centerline)
{
    const double k = grid.spacing();
    return delta2(field, i, grid, kind) / (k * k);
}

inline double diff4(std::span<const double> field, std::size_t i, const Grid& grid,
                    FieldKind kind = FieldKind::Centerline)
{
    const double k2 = grid.spacing() * grid.spacing();
    return delta4(field, i, grid, kind) / (k2 * k2);
}

} // namespace nhrod
