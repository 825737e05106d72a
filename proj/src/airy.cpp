#include "conslaw/airy.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/hamiltonian.hpp"
#include "conslaw/quadrature.hpp"

namespace conslaw {

namespace {

using LComplex = std::complex<long double>;

constexpr long double ai0 = 0.355028053887817239260063186004183176L;   // Ai(0)
constexpr long double dai0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)
constexpr double pi = std::numbers::pi;
constexpr double series_radius = 6.0;
constexpr double annulus_lo = 5.5, annulus_hi = 6.5;

// Coefficients u_k and v_k of the large-argument expansions.
constexpr std::size_t n_coef = 60;
struct Coefs {
    std::array<double, n_coef> u{}, v{};
    Coefs() {
        u[0] = v[0] = 1.0;
        for (std::size_t k = 1; k < n_coef; ++k) {
            const double kk = static_cast<double>(k);
            u[k] = u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) / (216.0 * kk * (2 * kk - 1));
            v[k] = -u[k] * (6 * kk + 1) / (6 * kk - 1);
        }
    }
};
const Coefs& coefs() {
    static const Coefs c;
    return c;
}

// sum_k (-1)^k c_k zeta^{-k}, stopped at the smallest term. Also split into even and odd k.
struct AltSum {
    Complex all, even, odd;
};
AltSum alternating(const std::array<double, n_coef>& c, Complex zeta) {
    AltSum s{};
    const Complex inv = 1.0 / zeta;
    Complex pw = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_coef; ++k) {
        const Complex term = (k % 2 == 0 ? 1.0 : -1.0) * c[k] * pw;
        const double mag = std::abs(term);
        if (k > 0 && mag > last) break;
        last = mag;
        s.all += term;
        // for the oscillatory forms: (-1)^j c_{2j} zeta^{-2j} and (-1)^j c_{2j+1} zeta^{-2j-1}
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) s.even += sign * c[k] * pw;
        else s.odd += sign * c[k] * pw;
        if (mag < 1e-18 * std::abs(s.all)) break;
        pw *= inv;
    }
    return s;
}

struct AiPair {
    Complex ai, ai_prime;
};

constexpr double switch_arg = 5.0 * pi / 6.0;

AiPair ai_asymptotic(Complex z) {
    const double sqrt_pi = std::sqrt(pi);
    if (std::abs(std::arg(z)) <= switch_arg) {
        const Complex sq = std::sqrt(z), quarter = std::sqrt(sq);
        const Complex zeta = (2.0 / 3.0) * z * sq;
        const Complex e = std::exp(-zeta);
        const AltSum su = alternating(coefs().u, zeta), sv = alternating(coefs().v, zeta);
        AiPair out{e / (2.0 * sqrt_pi * quarter) * su.all, -quarter * e / (2.0 * sqrt_pi) * sv.all};
        // Across the Stokes lines arg z = +-2pi/3 the recessive exponential is
        // switched on smoothly (Berry's error-function multiplier); with the
        // dominant series cut at its smallest term this keeps the error near
        // the truncation level instead of half the recessive term.
        const Complex singulant = -2.0 * zeta;
        if (singulant.real() > 0.0) {
            const double sigma = singulant.imag() / std::sqrt(2.0 * singulant.real());
            const double side = z.imag() >= 0.0 ? 1.0 : -1.0;  // conjugate symmetry below the axis
            const double weight = side * 0.5 * std::erfc(-side * sigma);
            const Complex er = std::exp(zeta);
            const AltSum ru = alternating(coefs().u, -zeta), rv = alternating(coefs().v, -zeta);
            out.ai += Complex(0.0, weight) * er / (2.0 * sqrt_pi * quarter) * ru.all;
            out.ai_prime += Complex(0.0, weight) * quarter * er / (2.0 * sqrt_pi) * rv.all;
        }
        return out;
    }
    // near the negative axis: oscillatory form in w = -z
    const Complex w = -z;
    const Complex sq = std::sqrt(w), quarter = std::sqrt(sq);
    const Complex zeta = (2.0 / 3.0) * w * sq;
    const Complex c = std::cos(zeta - pi / 4.0), s = std::sin(zeta - pi / 4.0);
    const AltSum su = alternating(coefs().u, zeta), sv = alternating(coefs().v, zeta);
    return {(c * su.even + s * su.odd) / (sqrt_pi * quarter), quarter / sqrt_pi * (s * sv.even - c * sv.odd)};
}

// Size of Ai near z from the leading asymptotic term, ignoring oscillation.
double ai_envelope(Complex z) {
    const double r = std::abs(z);
    if (std::abs(std::arg(z)) <= switch_arg) {
        const Complex zeta = (2.0 / 3.0) * z * std::sqrt(z);
        return std::exp(-zeta.real()) / (2.0 * std::sqrt(pi) * std::pow(r, 0.25));
    }
    const Complex w = -z;
    const Complex zeta = (2.0 / 3.0) * w * std::sqrt(w);
    return std::cosh(zeta.imag()) / (std::sqrt(pi) * std::pow(r, 0.25));
}

const Complex omega = std::polar(1.0, 2.0 * pi / 3.0);
const Complex rot_plus = std::polar(1.0, pi / 6.0);

}  // namespace

AiryValues airy_series(Complex z) {
    const LComplex zl(z.real(), z.imag());
    const LComplex z3 = zl * zl * zl;
    // f = sum z^{3k} / (prod), g = sum z^{3k+1} / (prod); derivatives term by term.
    LComplex a = 1.0L, b = zl, da = 0.0L, db = 1.0L;
    LComplex f = a, g = b, df = 0.0L, dg = db;
    LComplex pa = zl * zl / 2.0L;  // first term of f'
    for (int k = 1; k < 400; ++k) {
        const long double kk = k;
        a *= z3 / ((3 * kk - 1) * (3 * kk));
        b *= z3 / ((3 * kk) * (3 * kk + 1));
        db *= z3 / ((3 * kk - 2) * (3 * kk));
        if (k == 1) da = pa;
        else da *= z3 / ((3 * kk - 3) * (3 * kk - 1));
        f += a;
        g += b;
        df += da;
        dg += db;
        const long double size = std::abs(f) + std::abs(g) + std::abs(df) + std::abs(dg);
        if (std::abs(a) + std::abs(b) + std::abs(da) + std::abs(db) < 1e-21L * size && k > 3) break;
    }
    const long double r3 = std::sqrt(3.0L);
    auto cd = [](LComplex v) { return Complex(static_cast<double>(v.real()), static_cast<double>(v.imag())); };
    return {cd(ai0 * f - dai0 * g), cd(ai0 * df - dai0 * dg), cd(r3 * (ai0 * f + dai0 * g)),
            cd(r3 * (ai0 * df + dai0 * dg))};
}

AiryValues airy_asymptotic(Complex z) {
    const AiPair a = ai_asymptotic(z);
    // Bi(z) = e^{i pi/6} Ai(z omega) + e^{-i pi/6} Ai(z conj(omega))
    const AiPair up = ai_asymptotic(z * omega), down = ai_asymptotic(z * std::conj(omega));
    const Complex bi = rot_plus * up.ai + std::conj(rot_plus) * down.ai;
    const Complex bi_prime = rot_plus * omega * up.ai_prime + std::conj(rot_plus * omega) * down.ai_prime;
    return {a.ai, a.ai_prime, bi, bi_prime};
}

double airy_crossover_gap(Complex z) {
    const AiryValues s = airy_series(z), a = airy_asymptotic(z);
    const double r = std::abs(z), q = std::pow(r, 0.25);
    const double env_ai = ai_envelope(z);
    const double env_bi = ai_envelope(z * omega) + ai_envelope(z * std::conj(omega));
    return std::max({std::abs(s.ai - a.ai) / env_ai, std::abs(s.ai_prime - a.ai_prime) / (env_ai * q * q),
                     std::abs(s.bi - a.bi) / env_bi, std::abs(s.bi_prime - a.bi_prime) / (env_bi * q * q)});
}

AiryValues airy(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("Airy argument not finite");
    const double r = std::abs(z);
    if (r > 1000.0) throw DomainError("Airy argument beyond |z| = 1000");
    if (r >= annulus_lo && r <= annulus_hi) {
        const double gap = airy_crossover_gap(z);
        if (gap > 1e-8) throw AccuracyError("Airy series and asymptotics disagree by " + std::to_string(gap));
    }
    return r <= series_radius ? airy_series(z) : airy_asymptotic(z);
}

Complex airy_ai(Complex z) {
    const double r = std::abs(z);
    if (r > series_radius && r > annulus_hi && r <= 1000.0) return ai_asymptotic(z).ai;
    return airy(z).ai;
}

Complex airy_bi(Complex z) { return airy(z).bi; }

double chernoff_airy_rhs(double t, const FourierParams& fourier) {
    if (!(std::abs(t) <= 2.0)) throw DomainError("Airy side needs |t| <= 2");
    const double c = std::cbrt(2.0), xi = 1.0 / c;
    auto ghat = [&](double v) { return c / airy_ai(Complex(0.0, xi * v)); };
    // even part in v: cos(tv) Re g + sin(tv) Im g; odd part: cos(tv) Im g - sin(tv) Re g
    auto even = [&](double v) {
        const Complex g = ghat(v);
        return std::cos(t * v) * g.real() + std::sin(t * v) * g.imag();
    };
    auto odd = [&](double v) {
        const Complex g = ghat(v);
        return std::cos(t * v) * g.imag() - std::sin(t * v) * g.real();
    };
    const double g0 = std::abs(ghat(0.0));
    double integral = 0.0, residual = 0.0, v = 0.0;
    for (int panel = 0;; ++panel) {
        if (panel > 10000) throw ConvergenceError("Fourier integrand did not decay");
        const double hi = v + fourier.panel;
        integral += integrate_adaptive(even, v, hi, fourier.rel_tol);
        residual += integrate_adaptive(odd, v, hi, fourier.rel_tol) + integrate_adaptive(odd, -hi, -v, fourier.rel_tol);
        v = hi;
        if (std::abs(ghat(v)) < fourier.cutoff * g0) break;
    }
    const double scale = std::exp(2.0 / 3.0 * t * t * t) / (2.0 * pi);
    if (std::abs(scale * residual) > 1e-8) throw ConvergenceError("Fourier integral has an imaginary part");
    return scale * 2.0 * integral;
}

IdentityReport chernoff_identity_check(double t, const ExcursionEnsemble& ens, const QuadParams& quad,
                                       const FourierParams& fourier) {
    if (!(std::abs(t) <= 1.5)) throw DomainError("identity check needs |t| <= 1.5");
    const FPhiEstimate lhs = f_phi(ConvexFunction::quadratic(2.0), t, ens, quad);
    IdentityReport r;
    r.t = t;
    r.lhs = lhs.value;
    r.lhs_std_error = lhs.std_error;
    r.rhs = chernoff_airy_rhs(t, fourier);
    r.rel_diff = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
    return r;
}

void write_identity_csv(const std::filesystem::path& path, std::span<const IdentityReport> rows) {
    CsvWriter out(path, {"t", "lhs", "rhs", "rel_diff"});
    for (const IdentityReport& r : rows) out.row({r.t, r.lhs, r.rhs, r.rel_diff});
}

}  // namespace conslaw
