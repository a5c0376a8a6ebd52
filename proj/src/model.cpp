#include "bioconv/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace bioconv {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "PhysicalParams." << name << " must be strictly positive (got " << value << ")";
        throw std::invalid_argument(os.str());
    }
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
double smoothstep_slope(double t) { return 6.0 * t * (1.0 - t); }

}  // namespace

void PhysicalParams::validate() const {
    require_positive(eta, "eta");
    require_positive(D_n, "D_n");
    require_positive(D_c, "D_c");
    require_positive(rho, "rho");
    require_positive(rho_b, "rho_b");
    require_positive(V_b, "V_b");
    require_positive(n_r, "n_r");
    require_positive(L, "L");
    require_positive(chi_bar, "chi_bar");
    require_positive(c_air, "c_air");
    require_positive(k, "k");
    require_positive(g, "g");
    if (!(rho_b > rho)) {
        throw std::invalid_argument("PhysicalParams.rho_b must exceed rho (buoyancy sign)");
    }
}

DimensionlessGroups dimensionless_from_physical(const PhysicalParams& p) {
    p.validate();
    DimensionlessGroups d;
    d.S_c = p.eta / (p.D_n * p.rho);
    d.gamma = p.V_b * p.n_r * (p.rho_b - p.rho) * p.L * p.L * p.L / (p.eta * p.D_n);
    d.chi = p.chi_bar * p.c_air / p.D_n;
    d.delta = p.D_c / p.D_n;
    d.beta = p.k * p.n_r * p.L * p.L / (p.c_air * p.D_n);
    return d;
}

ChamberDomain::ChamberDomain(double L1, double L2, double L3) : edges_{L1, L2, L3} {
    for (int i = 0; i < 3; ++i) {
        if (!(edges_[static_cast<std::size_t>(i)] > 0.0) ||
            !std::isfinite(edges_[static_cast<std::size_t>(i)])) {
            throw std::invalid_argument("ChamberDomain: edge L" + std::to_string(i + 1) +
                                        " must be positive and finite");
        }
    }
}

double ChamberDomain::max_edge() const { return *std::max_element(edges_.begin(), edges_.end()); }
double ChamberDomain::min_edge() const { return *std::min_element(edges_.begin(), edges_.end()); }

ConsumptionFunction default_consumption_function(double c_star, double width) {
    if (!(c_star > 0.0) || !(width > 0.0)) {
        throw std::invalid_argument("default_consumption_function: c_star and width must be positive");
    }
    if (c_star < width) {
        throw std::invalid_argument(
            "default_consumption_function: c_star must be >= width so the plateau [width, c_star] exists");
    }
    ConsumptionFunction r;
    r.evaluator = [c_star, width](double s) {
        if (s <= 0.0 || s >= c_star + width) return 0.0;
        if (s < width) return smoothstep(s / width);
        if (s <= c_star) return 1.0;
        return smoothstep((c_star + width - s) / width);
    };
    r.slope = [c_star, width](double s) {
        if (s <= 0.0 || s >= c_star + width) return 0.0;
        if (s < width) return smoothstep_slope(s / width) / width;
        if (s <= c_star) return 0.0;
        return -smoothstep_slope((c_star + width - s) / width) / width;
    };
    r.norm_inf = 1.0;
    // Each edge integrates to width/2, the plateau has length c_star - width.
    r.norm_l1 = c_star;
    r.norm_lip = 1.5 / width;
    r.support_lo = 0.0;
    r.support_hi = c_star + width;
    std::ostringstream os;
    os << "bump(c_star=" << c_star << ", width=" << width << ")";
    r.description = os.str();
    return r;
}

ConsumptionFunction custom_consumption_function(std::function<double(double)> fn, double norm_inf,
                                                double norm_l1, double norm_lip, double support_lo,
                                                double support_hi) {
    if (!fn) throw std::invalid_argument("custom_consumption_function: empty evaluator");
    if (!(support_hi > support_lo)) {
        throw std::invalid_argument("custom_consumption_function: empty support interval");
    }
    if (!(norm_inf >= 0.0) || !(norm_l1 >= 0.0) || !(norm_lip >= 0.0) || !std::isfinite(norm_inf) ||
        !std::isfinite(norm_l1) || !std::isfinite(norm_lip)) {
        throw std::invalid_argument("custom_consumption_function: declared norms must be finite and >= 0");
    }
    ConsumptionFunction r;
    r.evaluator = std::move(fn);
    r.norm_inf = norm_inf;
    r.norm_l1 = norm_l1;
    r.norm_lip = norm_lip;
    r.support_lo = support_lo;
    r.support_hi = support_hi;
    r.description = "custom";
    return r;
}

ConsumptionAudit validate_consumption(const ConsumptionFunction& r, int samples, unsigned seed) {
    ConsumptionAudit audit;
    const double lo = r.support_lo;
    const double hi = r.support_hi;
    const double span = hi - lo;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> inside(lo, hi);
    std::uniform_real_distribution<double> outside(0.0, 10.0 * span + 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int i = 0; i < samples; ++i) {
        const double s = inside(rng);
        const double v = r(s);
        audit.max_value = std::max(audit.max_value, std::abs(v));
        if (v < 0.0) {
            audit.ok = false;
            audit.failure = "r takes a negative value";
        }
        const double t = inside(rng);
        if (s != t) {
            audit.max_difference_quotient =
                std::max(audit.max_difference_quotient, std::abs(v - r(t)) / std::abs(s - t));
        }
        // close pairs probe the local slope
        const double dt = span * 1e-6 * unit(rng);
        if (dt > 0.0) {
            audit.max_difference_quotient =
                std::max(audit.max_difference_quotient, std::abs(r(s + dt) - v) / dt);
        }
        const double off = outside(rng);
        audit.max_outside_support = std::max(
            {audit.max_outside_support, std::abs(r(hi + off)), std::abs(r(lo - off))});
    }

    // composite Simpson on the support
    const int panels = 2 * std::max(samples, 1000);
    const double h = span / panels;
    double acc = std::abs(r(lo)) + std::abs(r(hi));
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * std::abs(r(lo + i * h));
    audit.quadrature_l1 = acc * h / 3.0;

    if (audit.max_value > r.norm_inf * (1.0 + 1e-12)) {
        audit.ok = false;
        audit.failure = "sampled |r| exceeds declared norm_inf";
    } else if (audit.max_outside_support != 0.0) {
        audit.ok = false;
        audit.failure = "r does not vanish outside its declared support";
    } else if (audit.max_difference_quotient > r.norm_lip * (1.0 + 1e-6)) {
        audit.ok = false;
        audit.failure = "sampled difference quotient exceeds declared norm_lip";
    } else if (audit.quadrature_l1 > r.norm_l1 * (1.0 + 1e-8)) {
        audit.ok = false;
        audit.failure = "quadrature of |r| exceeds declared norm_l1";
    }
    return audit;
}

}  // namespace bioconv
