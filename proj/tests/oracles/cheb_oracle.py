"""Independent oracles for frozen golden values used by the C++ tests.

Run: python3 tests/oracles/cheb_oracle.py
"""
import numpy as np
import mpmath as mp


def logit(s):
    return -np.logaddexp(0.0, -s)


def cheb_fit(phi, M, R, nodes=512):
    # Gauss-Chebyshev: u_j = cos((j+1/2)pi/Q), weight pi/Q
    j = np.arange(nodes)
    u = np.cos((j + 0.5) * np.pi / nodes)
    f = phi(R * u)
    c = np.array([(2.0 / nodes) * np.sum(f * np.cos(m * np.arccos(u))) for m in range(M + 1)])
    c[0] *= 0.5
    # monomials in u then rescale to s
    poly_u = np.polynomial.chebyshev.cheb2poly(c)
    return np.array([poly_u[m] / R**m for m in range(M + 1)]), c


def sup_err(phi, b, R, n=10001):
    s = np.linspace(-R, R, n)
    return np.max(np.abs(phi(s) - np.polyval(b[::-1], s)))


def deriv_bound(C, r, M):
    return C * r**(-M) * (r + 1) / (r - 1)**4 * (M * M * r * (r + 1) + M * (2 * r * r + r + 1) + r * (r + 1))


def grid_min(obj, lo, hi, n=10000):
    rs = np.linspace(lo, hi, n + 2)[1:-1]
    vals = np.array([obj(r) for r in rs])
    i = int(np.argmin(vals))
    return rs[i], vals[i]


def logit_C(r, R):
    return abs(complex(mp.log(1 + mp.exp(-0.5 * R * (r - 1 / r) * 1j))))


if __name__ == "__main__":
    b, c = cheb_fit(logit, 2, 4.0)
    print("logit M=2 R=4 b =", repr(b.tolist()), "sup_err =", sup_err(logit, b, 4.0))
    for M in (2, 6, 10):
        bM, _ = cheb_fit(logit, M, 4.0)
        print("logit R=4 M=%d sup_err=%.12g" % (M, sup_err(logit, bM, 4.0)), "b=", bM.tolist())
    R = 4.0
    hi = np.pi / R + np.sqrt(np.pi**2 / R**2 + 1)
    for M in (2, 6, 10):
        r, v = grid_min(lambda r: logit_C(r, R) / ((r - 1) * r**M), 1.0, hi)
        print("logit bound R=4 M=%d r=%.8f sup_bound=%.10g deriv_bound=%.10g" % (M, r, v, deriv_bound(logit_C(r, R), r, M)))
    bs = 1.0
    R = 1.0
    hi = bs / R + np.sqrt(bs**2 / R**2 + 1)
    Cs = lambda r: bs**2 * np.sqrt(1 + ((r * r + 1) / (2 * r * bs))**2) - bs**2
    r, v = grid_min(lambda r: Cs(r) / ((r - 1) * r**4), 1.0, hi)
    print("shuber R=1 b=1 M=4 r=%.8f sup_bound=%.10g" % (r, v))
    # poisson d=1 check style value: exp bound
    print("deriv_bound(1,2,0) =", deriv_bound(1, 2, 0))
