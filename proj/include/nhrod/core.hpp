#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhrod {

/// Thrown when a caller breaks a documented precondition.
class contract_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Thrown when the stepper detects that its own output is inconsistent
/// (e.g. the constraint residual after a solve exceeds tolerance).
class consistency_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void expects(bool cond, const char* what)
{
    if (!cond) throw contract_violation(what);
}

inline bool all_finite(const std::vector<double>& v)
{
    for (double d : v)
        if (!std::isfinite(d)) return false;
    return true;
}
} // namespace detail

/**
 * Physical constants of the planar rolling rod.
 *
 * rho    mass per unit length
 * alpha  rotational inertia density of the laminae about the rod axis
 * beta   torsional stiffness
 * bend_k bending stiffness
 * radius lamina radius
 * length rod length
 */
struct RodParameters {
    double rho = 1.0;
    double alpha = 1.0;
    double beta = 0.8;
    double bend_k = 0.7;
    double radius = 1.0;
    double length = 4.0;

    void validate() const
    {
        detail::expects(rho > 0 && alpha > 0 && length > 0, "RodParameters: rho, alpha, length must be > 0");
        detail::expects(beta >= 0 && bend_k >= 0 && radius >= 0,
                        "RodParameters: beta, bend_k, radius must be >= 0");
    }
};

enum class BoundaryCondition { Free, Periodic };

/// Uniform spatial mesh. Free ends place nodes on both endpoints,
/// periodic meshes identify node N with node 0.
class Grid {
public:
    static constexpr std::size_t min_nodes = 5;

    Grid(std::size_t n_nodes, double length, BoundaryCondition bc)
        : n_(n_nodes), bc_(bc)
    {
        detail::expects(n_nodes >= min_nodes, "Grid: need at least 5 nodes");
        detail::expects(length > 0 && std::isfinite(length), "Grid: length must be positive");
        spacing_ = bc == BoundaryCondition::Free ? length / double(n_nodes - 1) : length / double(n_nodes);
    }

    std::size_t size() const { return n_; }
    double spacing() const { return spacing_; }
    BoundaryCondition bc() const { return bc_; }
    bool periodic() const { return bc_ == BoundaryCondition::Periodic; }

    /// Arclength coordinate of node i.
    double position(std::size_t i) const { return spacing_ * double(i); }

private:
    std::size_t n_;
    double spacing_;
    BoundaryCondition bc_;
};

/// The three fields sampled at every node at one time index.
struct FieldLevel {
    long time_index = 0;
    std::vector<double> x, y, theta;

    FieldLevel() = default;
    explicit FieldLevel(std::size_t n, long index = 0)
        : time_index(index), x(n, 0.0), y(n, 0.0), theta(n, 0.0)
    {
    }

    std::size_t size() const { return x.size(); }

    bool well_formed(std::size_t n) const
    {
        return x.size() == n && y.size() == n && theta.size() == n && detail::all_finite(x) &&
               detail::all_finite(y) && detail::all_finite(theta);
    }

    friend bool operator==(const FieldLevel&, const FieldLevel&) = default;
};

/// Two consecutive time levels: the full state of the three-level scheme.
struct StatePair {
    FieldLevel prev;
    FieldLevel curr;
    double dt = 0.0;

    void validate(const Grid& grid) const
    {
        detail::expects(dt > 0 && std::isfinite(dt), "StatePair: dt must be positive");
        detail::expects(prev.well_formed(grid.size()) && curr.well_formed(grid.size()),
                        "StatePair: levels must have N finite entries");
        detail::expects(prev.time_index + 1 == curr.time_index, "StatePair: levels must be consecutive");
    }
};

/// Positions and velocities at t = 0.
struct InitialData {
    std::vector<double> x0, y0, theta0;
    std::vector<double> vx0, vy0, vtheta0;

    explicit InitialData(std::size_t n = 0)
        : x0(n, 0.0), y0(n, 0.0), theta0(n, 0.0), vx0(n, 0.0), vy0(n, 0.0), vtheta0(n, 0.0)
    {
    }

    std::size_t size() const { return x0.size(); }

    void validate(std::size_t n) const
    {
        for (const auto* v : {&x0, &y0, &theta0, &vx0, &vy0, &vtheta0}) {
            detail::expects(v->size() == n, "InitialData: every array needs N entries");
            detail::expects(detail::all_finite(*v), "InitialData: non-finite entry");
        }
    }
};

} // namespace nhrod
