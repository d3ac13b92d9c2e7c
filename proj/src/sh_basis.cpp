#include "arf/sh_basis.hpp"

#include <cmath>
#include <string>

namespace arf {
namespace {

// Normalization constants, with the polynomial's own multiplier rolled in.
//                                                       basis polynomial:
constexpr double kC1 = 0.4886025119029199;   // sqrt(3/(4pi))        y | z | x

constexpr double kC2_2 = 1.0925484305920792;   // sqrt(15/(4pi))     xy | yz | xz
constexpr double kC2_0 = 0.31539156525252005;  // sqrt(5/(16pi))     3z^2 - 1
constexpr double kC2p2 = 0.5462742152960396;   // sqrt(15/(16pi))    x^2 - y^2

constexpr double kC3_3 = 0.5900435899266435;   // sqrt(35/(32pi))    y(3x^2 - y^2)
constexpr double kC3_2 = 2.890611442640554;    // sqrt(105/(4pi))    xyz
constexpr double kC3_1 = 0.4570457994644658;   // sqrt(21/(32pi))    y(5z^2 - 1)
constexpr double kC3_0 = 0.3731763325901154;   // sqrt(7/(16pi))     z(5z^2 - 3)
constexpr double kC3p2 = 1.445305721320277;    // sqrt(105/(16pi))   z(x^2 - y^2)

constexpr double kC4_4 = 2.5033429417967046;   // (3/4)sqrt(35/pi)   xy(x^2 - y^2)
constexpr double kC4_3 = 1.7701307697799304;   // (3/4)sqrt(35/2pi)  yz(3x^2 - y^2)
constexpr double kC4_2 = 0.9461746957575601;   // (3/4)sqrt(5/pi)    xy(7z^2 - 1)
constexpr double kC4_1 = 0.6690465435572892;   // (3/4)sqrt(5/2pi)   yz(7z^2 - 3)
constexpr double kC4_0 = 0.10578554691520431;  // (3/16)sqrt(1/pi)   35z^4 - 30z^2 + 3
constexpr double kC4p2 = 0.47308734787878004;  // (3/8)sqrt(5/pi)    (x^2 - y^2)(7z^2 - 1)
constexpr double kC4p4 = 0.6258357354491761;   // (3/16)sqrt(35/pi)  x^4 - 6x^2y^2 + y^4

constexpr double kPi = 3.14159265358979323846;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= double(i);
    return f;
}

double norm_k(int l, int m) {
    return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * factorial(l - m) / factorial(l + m));
}

// Degrees above the hard-coded table. Q_l^m is the associated Legendre
// polynomial with the sin^m(theta) factor stripped; it pairs with
// A_m = Re[(x+iy)^m] and B_m = Im[(x+iy)^m], which carry that factor as a
// polynomial in (x, y). No Condon-Shortley sign.
void eval_recurrence_band(const Direction& d, int l, double* out) {
    const double z = d.z;
    for (int m = 0; m <= l; ++m) {
        // Q_{m,m} = (2m-1)!!, then raise l at fixed m.
        double qmm = 1.0;
        for (int i = 1; i <= m; ++i) qmm *= double(2 * i - 1);
        double q = qmm;
        if (l > m) {
            double q_prev = qmm;
            q = z * double(2 * m + 1) * qmm;  // Q_{m+1,m}
            for (int ll = m + 2; ll <= l; ++ll) {
                const double q_next =
                    (double(2 * ll - 1) * z * q - double(ll + m - 1) * q_prev) / double(ll - m);
                q_prev = q;
                q = q_next;
            }
        }
        if (m == 0) {
            out[sh_flat_index(l, 0)] = norm_k(l, 0) * q;
        } else {
            double am = 1.0, bm = 0.0;  // (x+iy)^m by repeated multiplication
            for (int i = 0; i < m; ++i) {
                const double a = am * d.x - bm * d.y;
                const double b = am * d.y + bm * d.x;
                am = a;
                bm = b;
            }
            const double k = std::sqrt(2.0) * norm_k(l, m) * q;
            out[sh_flat_index(l, m)] = k * am;
            out[sh_flat_index(l, -m)] = k * bm;
        }
    }
}

}  // namespace

Direction::Direction(double x_, double y_, double z_) {
    const double n = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
    if (!(n > 0.0) || !std::isfinite(n))
        throw InputError("Direction: cannot normalize zero or non-finite vector");
    x = x_ / n;
    y = y_ / n;
    z = z_ / n;
}

Direction Direction::flipped() const {
    Direction d = *this;
    d.x = -d.x;
    d.y = -d.y;
    d.z = -d.z;
    return d;
}

void eval_sh_basis_into(const Direction& d, int degree, double* out) {
    if (degree < 0 || degree > kMaxShDegree)
        throw ConfigError("eval_sh_basis: degree " + std::to_string(degree) +
                          " outside supported range [0, " + std::to_string(kMaxShDegree) + "]");
    const double x = d.x, y = d.y, z = d.z;

    out[0] = kShY00;
    if (degree < 1) return;

    out[1] = kC1 * y;
    out[2] = kC1 * z;
    out[3] = kC1 * x;
    if (degree < 2) return;

    const double xx = x * x, yy = y * y, zz = z * z;
    out[4] = kC2_2 * x * y;
    out[5] = kC2_2 * y * z;
    out[6] = kC2_0 * (3.0 * zz - 1.0);
    out[7] = kC2_2 * x * z;
    out[8] = kC2p2 * (xx - yy);
    if (degree < 3) return;

    out[9] = kC3_3 * y * (3.0 * xx - yy);
    out[10] = kC3_2 * x * y * z;
    out[11] = kC3_1 * y * (5.0 * zz - 1.0);
    out[12] = kC3_0 * z * (5.0 * zz - 3.0);
    out[13] = kC3_1 * x * (5.0 * zz - 1.0);
    out[14] = kC3p2 * z * (xx - yy);
    out[15] = kC3_3 * x * (xx - 3.0 * yy);
    if (degree < 4) return;

    out[16] = kC4_4 * x * y * (xx - yy);
    out[17] = kC4_3 * y * z * (3.0 * xx - yy);
    out[18] = kC4_2 * x * y * (7.0 * zz - 1.0);
    out[19] = kC4_1 * y * z * (7.0 * zz - 3.0);
    out[20] = kC4_0 * (35.0 * zz * zz - 30.0 * zz + 3.0);
    out[21] = kC4_1 * x * z * (7.0 * zz - 3.0);
    out[22] = kC4p2 * (xx - yy) * (7.0 * zz - 1.0);
    out[23] = kC4_3 * x * z * (xx - 3.0 * yy);
    out[24] = kC4p4 * (xx * xx - 6.0 * xx * yy + yy * yy);
    if (degree < 5) return;

    for (int l = 5; l <= degree; ++l) eval_recurrence_band(d, l, out);
}

SHBasisValues eval_sh_basis(const Direction& d, int degree) {
    SHBasisValues basis;
    basis.degree = degree;
    basis.values.resize(std::size_t(num_sh_coeffs(degree)));
    eval_sh_basis_into(d, degree, basis.values.data());
    return basis;
}

}  // namespace arf
