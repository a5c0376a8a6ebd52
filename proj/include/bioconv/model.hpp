#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace bioconv {

/// Raw physical constants of the suspension (SI units where applicable).
struct PhysicalParams {
    double eta = 0.0;      ///< fluid viscosity [Pa s]
    double D_n = 0.0;      ///< bacterial diffusivity [m^2/s]
    double D_c = 0.0;      ///< oxygen diffusivity [m^2/s]
    double rho = 0.0;      ///< fluid density [kg/m^3]
    double rho_b = 0.0;    ///< bacterial density [kg/m^3]
    double V_b = 0.0;      ///< bacterial volume [m^3]
    double n_r = 0.0;      ///< characteristic cell density [1/m^3]
    double L = 0.0;        ///< characteristic length [m]
    double chi_bar = 0.0;  ///< chemotactic sensitivity
    double c_air = 0.0;    ///< oxygen concentration above the fluid
    double k = 0.0;        ///< oxygen consumption rate
    double g = 0.0;        ///< gravitational acceleration [m/s^2]

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;
};

/// Dimensionless groups entering the stationary system.
struct DimensionlessGroups {
    double S_c = 0.0;
    double gamma = 0.0;
    double chi = 0.0;
    double delta = 0.0;
    double beta = 0.0;
};

/// S_c = eta/(D_n rho), gamma = V_b n_r (rho_b - rho) L^3/(eta D_n),
/// chi = chi_bar c_air/D_n, delta = D_c/D_n, beta = k n_r L^2/(c_air D_n).
DimensionlessGroups dimensionless_from_physical(const PhysicalParams& p);

/// The box [0,L1] x [0,L2] x [0,L3]. The face x3 = 0 is the lower boundary;
/// every other face belongs to the upper boundary.
class ChamberDomain {
public:
    ChamberDomain(double L1, double L2, double L3);

    [[nodiscard]] double edge(int axis) const { return edges_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] const std::array<double, 3>& edges() const { return edges_; }
    [[nodiscard]] double measure() const { return edges_[0] * edges_[1] * edges_[2]; }
    [[nodiscard]] double max_edge() const;
    [[nodiscard]] double min_edge() const;

private:
    std::array<double, 3> edges_;
};

/// Norm data for the cut-off r. The norms are declared by whoever builds
/// the function; validate_consumption() checks them against samples.
struct ConsumptionFunction {
    std::function<double(double)> evaluator;
    /// r'(s) when available (needed for manufactured sources only).
    std::function<double(double)> slope;
    double norm_inf = 0.0;
    double norm_l1 = 0.0;
    double norm_lip = 0.0;
    double support_lo = 0.0;
    double support_hi = 0.0;
    std::string description;

    double operator()(double s) const { return evaluator(s); }
};

/// C^1 bump: rises from 0 at s = 0 to 1 at s = width with the smoothstep
/// 3t^2 - 2t^3, equals 1 on [width, c_star], falls back to 0 at
/// c_star + width. Exact norms: inf = 1, l1 = c_star, lip = 1.5/width.
ConsumptionFunction default_consumption_function(double c_star, double width);

/// Wrap a user-supplied r with declared norms.
ConsumptionFunction custom_consumption_function(std::function<double(double)> r,
                                                double norm_inf, double norm_l1,
                                                double norm_lip, double support_lo,
                                                double support_hi);

struct ConsumptionAudit {
    bool ok = true;
    double max_value = 0.0;          ///< max sampled |r|
    double max_outside_support = 0.0;
    double max_difference_quotient = 0.0;
    double quadrature_l1 = 0.0;      ///< composite Simpson estimate of the L1 norm
    std::string failure;
};

/// Sample-validate the declared norms: |r| <= norm_inf, r = 0 off support,
/// difference quotients <= norm_lip, quadrature of |r| <= norm_l1 (1 + 1e-8).
ConsumptionAudit validate_consumption(const ConsumptionFunction& r, int samples = 10000,
                                      unsigned seed = 12345);

}  // namespace bioconv
