#pragma once

// Independent re-derivation of the certificate formulas in 50-digit decimal
// arithmetic. Shares nothing with the library beyond the input record.

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "bioconv/certificate.hpp"

namespace oracle {

using Big = boost::multiprecision::cpp_dec_float_50;

struct Values {
    Big theta1, theta2, gamma0, gamma1, gamma2, gamma3, pi, u_bound, n_bound, c_bound;
    bool theta_ok = false, gamma0_ok = false, gamma1_ok = false, gamma2_ok = false, gamma3_ok = false,
         pi_ok = false;
};

inline Values evaluate(const bioconv::CertificateInputs& in) {
    const auto& k = in.constants;
    const Big ctr = k.C_tr, cm = k.C_poi_meanzero, cd = k.C_poi_dirichlet, c1 = k.C_1;
    const Big chi = in.groups.chi, beta = in.groups.beta, delta = in.groups.delta, sc = in.groups.S_c;
    const Big gam = in.groups.gamma, g = in.gravity;
    const Big ri = in.r_inf, r1 = in.r_l1, rl = in.r_lip, a1 = in.alpha1, vol = in.measure;
    const Big fn = in.f_n_norm, fc = in.f_c_norm, F = in.F_norm;

    Values v;
    const Big t1d = 1 - ctr - 2 * chi * r1 * ctr * cm;
    const Big t2d = 1 - ctr - ctr * cm;
    v.theta_ok = t1d > 0 && t2d > 0;
    if (!v.theta_ok) return v;
    v.theta1 = (1 - ctr) / t1d;
    v.theta2 = (1 - ctr) / t2d;

    const Big g0d = vol - chi * beta * a1 * ri * ri * cm * cm * v.theta1 * v.theta2;
    v.gamma0_ok = g0d > 0;
    if (!v.gamma0_ok) return v;
    v.gamma0 = vol * v.theta1 * cm / g0d * (chi * a1 * ri * ri * v.theta2 / (delta * vol) * fc + fn);
    v.n_bound = v.gamma0;
    v.u_bound = cd * (gam * g * v.gamma0 + F);
    v.c_bound = v.theta2 * cm / delta * (beta * cm * ri * v.gamma0 + fc);

    const Big g1d = sc - c1 * cd * (gam * g * v.gamma0 + F);
    const Big g2d = 1 - 2 * r1 * (1 - ctr + ctr * cm);
    const Big g3d = delta * (1 - ctr - ctr * cm) - c1 * c1 * c1 * rl * v.gamma0;
    v.gamma1_ok = g1d > 0;
    v.gamma2_ok = g2d > 0;
    v.gamma3_ok = g3d > 0;
    if (v.gamma1_ok) v.gamma1 = gam * sc * g * cd / g1d;
    if (v.gamma2_ok) v.gamma2 = (1 - ctr) / g2d;
    if (v.gamma3_ok) v.gamma3 = (1 - ctr) / g3d;
    const Big pd = delta * (1 - c1 * rl * v.gamma0);
    v.pi_ok = v.gamma1_ok && v.gamma2_ok && v.gamma3_ok && pd > 0;
    if (v.pi_ok) {
        v.pi = v.gamma1 * v.gamma2 *
               (c1 * v.gamma0 + ri * c1 * v.gamma3 * v.theta2 * cm / pd * (beta * cm * ri * v.gamma0 + fc));
    }
    return v;
}

/// The fixed suite of input vectors: all denominators positive.
inline std::vector<bioconv::CertificateInputs> fixed_suite(int count = 20) {
    std::mt19937_64 rng(20240611);
    auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    std::vector<bioconv::CertificateInputs> out;
    while (static_cast<int>(out.size()) < count) {
        bioconv::CertificateInputs in;
        in.constants.C_poi_dirichlet = U(0.05, 0.3);
        in.constants.C_poi_meanzero = U(0.1, 0.6);
        in.constants.C_tr = U(0.001, 0.2);
        in.constants.C_1 = U(0.1, 0.8);
        in.measure = U(0.3, 3.0);
        in.groups.S_c = U(0.5, 5.0);
        in.groups.gamma = U(0.01, 2.0);
        in.groups.chi = U(0.0, 0.5);
        in.groups.delta = U(0.5, 4.0);
        in.groups.beta = U(0.0, 1.0);
        in.gravity = U(0.5, 2.0);
        in.r_inf = U(0.2, 1.5);
        in.r_l1 = U(0.05, 0.35);
        in.r_lip = U(0.5, 10.0);
        in.alpha1 = U(0.05, 1.0);
        in.alpha2 = U(0.05, 1.0);
        in.f_n_norm = U(0.0, 0.05);
        in.f_c_norm = U(0.0, 0.05);
        in.F_norm = U(0.0, 0.1);
        const auto v = evaluate(in);
        if (v.pi_ok) out.push_back(in);
    }
    return out;
}

inline double rel_diff(double lib, const Big& ref) {
    const Big r = (Big(lib) - ref) / (ref == 0 ? Big(1) : abs(ref));
    return std::abs(r.convert_to<double>());
}

/// Max relative difference between the library certificate and the oracle.
inline double max_discrepancy(const bioconv::Certificate& c, const Values& v) {
    double worst = 0.0;
    auto upd = [&](double lib, const Big& ref) { worst = std::max(worst, rel_diff(lib, ref)); };
    upd(c.theta1, v.theta1);
    upd(c.theta2, v.theta2);
    upd(c.gamma0, v.gamma0);
    upd(c.gamma1, v.gamma1);
    upd(c.gamma2, v.gamma2);
    upd(c.gamma3, v.gamma3);
    upd(c.pi_value, v.pi);
    upd(c.apriori.u_bound, v.u_bound);
    upd(c.apriori.n_bound, v.n_bound);
    upd(c.apriori.c_bound, v.c_bound);
    return worst;
}

}  // namespace oracle
