"""High-precision oracle for the regime-classifier threshold constants.

Recomputes every threshold used by the worked classifier examples with
50 significant digits so the C++ double-precision results can be frozen
against an independent evaluation.
"""
from mpmath import mp, mpf, log, exp, pi, quad, sqrt, inf

mp.dps = 50


def harmonic(betas):
    return len(betas) / sum(1 / mpf(b) for b in betas)


def main():
    beta = [mpf(2), mpf(2), mpf(2)]
    d = 3
    T = mpf(10) ** 4
    b3 = harmonic(beta[2:])
    e_sync = b3 / (2 * b3 + d - 2) * (1 / beta[0] + 1 / beta[1])
    print("sync (9) threshold  T^-e      =", mp.nstr(T ** (-e_sync), 20))
    a = [b3 / (bj * (2 * b3 + d - 2)) for bj in beta]
    h = [T ** (-aj) for aj in a]
    print("h*_j (base 1/T)               =", mp.nstr(h[0], 20))
    print("async quarter h1*h2*          =", mp.nstr(h[0] * h[1] / 4, 20))
    dp = (log(T) / T) ** (2 * b3 / (2 * b3 + d - 2))
    print("async delta' threshold        =", mp.nstr(dp, 20))
    n = mpf(10) ** 4
    bb = harmonic(beta)
    print("intermediate h~_j n=1e4       =", mp.nstr(n ** (-bb / (beta[0] * (2 * bb + d))), 20))

    # Hyperbolic Langevin normalisation, pi ~ exp(-V), V = s*sqrt(1+|x|^2), d=2.
    s = mpf(1)
    Z = quad(lambda r: 2 * pi * r * exp(-s * sqrt(1 + r * r)), [0, inf])
    print("Z_hyp(d=2, s=1)                =", mp.nstr(Z, 25), " closed form 4pi/e =", mp.nstr(4 * pi / exp(1), 25))
    print("pi_hyp(0) d=2                  =", mp.nstr(exp(-s) / Z, 25))
    Z3 = quad(lambda r: 4 * pi * r * r * exp(-s * sqrt(1 + r * r)), [0, inf])
    print("Z_hyp(d=3, s=1)                =", mp.nstr(Z3, 25))


if __name__ == "__main__":
    main()
