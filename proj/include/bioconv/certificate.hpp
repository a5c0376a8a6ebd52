#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bioconv/model.hpp"

namespace bioconv {

enum class ConstantsMode { analytic, discrete };

/// Domain-only constants of the Poincare, trace and trilinear inequalities.
/// Each value carries a tag naming how it was obtained ("analytic",
/// "discrete 16x16x16", "declared", ...).
struct DomainConstants {
    double C_poi_dirichlet = 0.0;  ///< ||u||_L2 <= C ||grad u||_L2, u = 0 on the boundary
    double C_poi_meanzero = 0.0;   ///< ||c||_L2 <= C ||grad c||_L2, zero-mean c
    double C_tr = 0.0;             ///< ||phi||_L1(boundary) <= C ||phi||_W11
    double C_1 = 0.0;              ///< trilinear form bound
    std::string method_poi_dirichlet;
    std::string method_poi_meanzero;
    std::string method_tr;
    std::string method_1;

    /// The larger Poincare constant, used where a single constant is needed.
    [[nodiscard]] double C_poi() const;
};

/// Constant values declared by the user in place of the computed ones.
struct ConstantOverrides {
    std::optional<double> C_poi_dirichlet;
    std::optional<double> C_poi_meanzero;
    std::optional<double> C_tr;
    std::optional<double> C_1;
    [[nodiscard]] bool empty() const { return !C_poi_dirichlet && !C_poi_meanzero && !C_tr && !C_1; }
};

/// Sharp constant of ||u||_L6 <= K ||grad u||_L2 on R^3.
double talenti_constant();

/// analytic: closed-form bounds. discrete: Rayleigh-quotient estimates on a
/// MAC grid (>= 8 cells per edge), trace ratio maximised over a finite
/// basis, trilinear ratio maximised over random divergence-free triples.
/// Throws std::invalid_argument for edge ratios above 1e6.
DomainConstants domain_constants(const ChamberDomain& dom, ConstantsMode mode,
                                 std::optional<std::array<int, 3>> grid = std::nullopt);

DomainConstants apply_overrides(DomainConstants dc, const ConstantOverrides& o);

/// Thrown by the formula-level functions when a denominator is not positive.
class HypothesisViolation : public std::runtime_error {
public:
    HypothesisViolation(const std::string& inequality, double slack);
    [[nodiscard]] const std::string& inequality() const { return inequality_; }
    [[nodiscard]] double slack() const { return slack_; }

private:
    std::string inequality_;
    double slack_;
};

/// Everything the certificate formulas consume.
struct CertificateInputs {
    DomainConstants constants;
    double measure = 1.0;  ///< |Omega|
    DimensionlessGroups groups;
    double gravity = 1.0;  ///< g in the buoyancy term gamma S_c n (0,0,-g)
    double r_inf = 0.0;
    double r_l1 = 0.0;
    double r_lip = 0.0;
    bool r_audit_ok = true;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double f_n_norm = 0.0;  ///< L2 norms of the data
    double f_c_norm = 0.0;
    double F_norm = 0.0;
};

CertificateInputs make_inputs(const DomainConstants& dc, const ChamberDomain& dom, const DimensionlessGroups& groups,
                              double gravity, const ConsumptionFunction& r, double alpha1, double alpha2,
                              double f_n_norm, double f_c_norm, double F_norm, bool audit_r = true);

// Formula-level operations (double precision, throwing on bad denominators).

/// (Theta1, Theta2). C_poi here is the zero-mean constant.
std::pair<double, double> thetas(const DomainConstants& dc, double chi, const ConsumptionFunction& r);
double gamma0(const DomainConstants& dc, const ChamberDomain& dom, const DimensionlessGroups& groups,
              const ConsumptionFunction& r, double alpha1, double f_n_norm, double f_c_norm);

struct Gammas {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double denominator1 = 0.0;
    double denominator2 = 0.0;
    double denominator3 = 0.0;
};
Gammas gammas(const DomainConstants& dc, const DimensionlessGroups& groups, double gravity,
              const ConsumptionFunction& r, double gamma0_val, double F_norm);

struct HypothesisCheck {
    std::string name;
    std::string statement;  ///< human-readable "lhs < rhs"
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double slack = 0.0;  ///< rhs - lhs
};

std::vector<HypothesisCheck> check_existence(const CertificateInputs& in);

struct UniquenessReport {
    std::vector<HypothesisCheck> checks;
    double pi_value = 0.0;
    [[nodiscard]] bool all_satisfied() const;
};
UniquenessReport check_uniqueness(const CertificateInputs& in);

struct AprioriBounds {
    double u_bound = 0.0;
    double n_bound = 0.0;
    double c_bound = 0.0;
};
/// Throws HypothesisViolation when the existence denominators fail.
AprioriBounds apriori_bounds(const CertificateInputs& in);

struct GossezResult {
    bool feasible = false;
    double K1 = 0.0;  ///< lambda2 < K1 lambda3
    double K2 = 0.0;  ///< lambda3 < K2 lambda2
    double K3 = 0.0;  ///< lambda1 < K3 lambda2
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
};
GossezResult gossez_lambda_feasibility(const CertificateInputs& in);

struct NamedValue {
    std::string name;
    double value = 0.0;
};

struct Certificate {
    CertificateInputs inputs;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double pi_value = 0.0;
    std::vector<NamedValue> denominators;
    std::vector<HypothesisCheck> existence_checks;
    std::vector<HypothesisCheck> uniqueness_checks;
    GossezResult gossez;
    AprioriBounds apriori;
    /// Values on which double and double-double evaluation disagree by
    /// more than 1e-12 relative. Empty for a sound evaluation.
    std::vector<std::string> precision_defects;

    [[nodiscard]] bool existence_ok() const;
    [[nodiscard]] bool uniqueness_ok() const;
    [[nodiscard]] const HypothesisCheck* find_check(const std::string& name) const;
};

/// Evaluates everything; undefined quantities (non-positive denominators)
/// become NaN and the corresponding checks fail. Never throws on data.
Certificate build_certificate(const CertificateInputs& in);

/// Flat "key = value" report.
std::string certificate_to_text(const Certificate& c);
/// JSON document (see docs/schema/certificate.schema.json).
std::string certificate_to_json(const Certificate& c, int indent = 2);

}  // namespace bioconv
