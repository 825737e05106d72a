"""High-precision reference values for the Airy checks (mpmath).

Run: python3 tests/oracles/airy_oracle.py
The printed numbers are frozen into tests/unit/test_airy.cpp.
"""
import mpmath as mp

mp.mp.dps = 30


def rhs(t):
    c = mp.mpf(2) ** (mp.mpf(1) / 3)
    xi = mp.mpf(2) ** (-mp.mpf(1) / 3)

    def g(v):
        val = c / mp.airyai(1j * xi * v)
        return mp.cos(t * v) * mp.re(val) + mp.sin(t * v) * mp.im(val)

    integral = 2 * mp.quad(g, [0, 2, 5, 10, 20, 40, 80])
    return mp.e ** (mp.mpf(2) / 3 * t ** 3) / (2 * mp.pi) * integral


def p_quadratic_0_1():
    # phi(z) = z^2, t = 0, u = 1: exp(-(2/3)) E[exp(-2 A)], A the Brownian excursion area,
    # whose transform is sqrt(2 pi) s sum_k exp(-alpha_k s^{2/3} 2^{-1/3}) over |zeros of Ai|.
    s = mp.mpf(2)
    total = mp.nsum(lambda k: mp.e ** (-(-mp.airyaizero(int(k))) * s ** (mp.mpf(2) / 3) * mp.mpf(2) ** (-mp.mpf(1) / 3)), [1, mp.inf])
    return mp.e ** (-mp.mpf(2) / 3) * mp.sqrt(2 * mp.pi) * s * total


if __name__ == "__main__":
    print("p(0,1)", mp.nstr(p_quadratic_0_1(), 15))
    print("Ai(0)", mp.nstr(mp.airyai(0), 18))
    print("Ai'(0)", mp.nstr(mp.airyai(0, derivative=1), 18))
    for z in [mp.mpc(1, 1), mp.mpc(-3, 2), mp.mpc(0, 4), mp.mpc(7, -2), mp.mpc(-8, 0.5), mp.mpc(2, 9)]:
        a = mp.airyai(z)
        b = mp.airybi(z)
        print("z", z, "Ai", mp.nstr(a.real, 17), mp.nstr(a.imag, 17), "Bi", mp.nstr(b.real, 17), mp.nstr(b.imag, 17))
    for t in [-1, -0.5, 0, 0.5, 1]:
        print("rhs", t, mp.nstr(rhs(mp.mpf(t)), 15))
