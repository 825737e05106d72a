#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <vector>

#include "conslaw/excursion.hpp"

namespace conslaw {

using Complex = std::complex<double>;

struct AiryValues {
    Complex ai;
    Complex ai_prime;
    Complex bi;
    Complex bi_prime;
};

// Maclaurin series in long double; meant for |z| <= 6.
AiryValues airy_series(Complex z);
// Large-|z| expansions with the sector chosen on the principal branch; Bi
// through the rotation formula. Meant for |z| > 6.
AiryValues airy_asymptotic(Complex z);

// Difference of the two methods in units of the local size of Ai and Bi
// (leading asymptotic envelope), so zeros do not blow it up.
double airy_crossover_gap(Complex z);

// Series inside |z| <= 6, asymptotics outside. Inside 5.5 <= |z| <= 6.5 both
// are computed and AccuracyError is thrown if they differ by more than 1e-8.
// DomainError for |z| > 1000.
AiryValues airy(Complex z);
Complex airy_ai(Complex z);
Complex airy_bi(Complex z);

struct FourierParams {
    double panel = 0.5;       // Gauss-Kronrod panel width in v
    double cutoff = 1e-12;    // stop where |ghat| falls below this
    double rel_tol = 1e-11;
};

// (e^{(2/3) t^3} / 2 pi) int e^{-itv} ghat(v) dv with ghat(v) = 2^{1/3} / Ai(i 2^{-1/3} v),
// folded onto v >= 0 with the cosine/sine split. ConvergenceError if the
// odd (imaginary) part does not vanish to 1e-8.
double chernoff_airy_rhs(double t, const FourierParams& fourier = {});

struct IdentityReport {
    double t = 0.0;
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    double rhs = 0.0;
    double rel_diff = 0.0;
};

// Excursion side: 2t + int (1 - e^{-(2/3)((u+t)^3 - t^3)} E[exp(-2 int_0^u e)]) / sqrt(2 pi u^3) du,
// which is f^phi(t) for phi(z) = z^2. Airy side: chernoff_airy_rhs.
IdentityReport chernoff_identity_check(double t, const ExcursionEnsemble& ens, const QuadParams& quad = {},
                                       const FourierParams& fourier = {});

// Columns t,lhs,rhs,rel_diff.
void write_identity_csv(const std::filesystem::path& path, std::span<const IdentityReport> rows);

}  // namespace conslaw
