"""Regenerate the frozen reference values in tests/oracle_values.py.

Everything here uses mpmath only (tanh-sinh quadrature, findroot and the
dense symmetric eigensolver), so it shares no code with the package.
Run: python3 tools/generate_oracles.py
"""
import mpmath as mpm
from mpmath import mp, mpf

mp.dps = 30


def components(a, b):
    return [(-1, a), (b, 1)] if a < b else [(-1, b), (a, 1)]


def smooth_part(x, lo, hi, a, b):
    # density * sqrt((x - lo)(hi - x)), with the endpoint factors cancelled by hand
    out = 1 / mp.pi
    for e, s in ((-1, -0.5), (a, 0.5), (b, -0.5), (1, -0.5)):
        if e == lo or e == hi:
            s += 0.5
        if s:
            out *= abs(x - e) ** s
    return out


def over_component(f, lo, hi, a, b):
    # int f(x) density(x) dx on [lo, hi] with x = mid + half cos t
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    def h(t):
        x = mid + half * mp.cos(t)
        return f(x) * smooth_part(x, lo, hi, a, b)
    return mp.quad(h, [0, mp.pi / 2, mp.pi])


def left_mass(a, b):
    lo, hi = components(a, b)[0]
    return over_component(lambda x: 1, lo, hi, a, b)


def alpha(b, q):
    b, q = mpf(b), mpf(q)
    m2 = mp.acos(b) / mp.pi
    if q > m2:
        lo, hi = -1 + mpf(10) ** -12, b - mpf(10) ** -12
    else:
        lo, hi = b + mpf(10) ** -12, 1 - mpf(10) ** -12
    return mp.findroot(lambda a: left_mass(a, b) - (1 - q), (lo, hi), solver="illinois", tol=mpf(10) ** -25)


def potential(x0, a, b):
    return sum(over_component(lambda x: -mp.log(abs(x0 - x)) if x != x0 else 0, lo, hi, a, b)
               for lo, hi in components(a, b))


def rate(theta, q):
    b = mp.cos(mpf(theta) / 2)
    a = alpha(b, q)
    F1, F2 = potential(-1, a, b), potential(1, a, b)
    J = ((1 - q) * F1 + q * F2 - mp.log(2)) / 2
    return a, F1, F2, J


def Lambda(theta, lam, bracket):
    # J'(y) = F2 - F1 = lam at the maximiser
    def slope(y):
        _, F1, F2, _ = rate(theta, y)
        return F2 - F1 - lam
    y = mp.findroot(slope, bracket, solver="illinois", tol=mpf(10) ** -24)
    return y, lam * y - rate(theta, y)[3]


def toeplitz_eigs(n, theta, dps=80):
    with mp.workdps(dps):
        th = mpf(theta)
        r = [th / (2 * mp.pi)] + [mp.sin(k * th / 2) / (mp.pi * k) for k in range(1, n)]
        A = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                A[i, j] = r[abs(i - j)]
        ev = mp.eigsy(A, eigvals_only=True)
        return sorted([ev[i] for i in range(n)], reverse=True)


if __name__ == "__main__":
    print("ALPHA")
    for b, q in [(0, 0.75), (0.3, 0.2), (-0.5, 0.9), (0.7071067811865476, 0.1)]:
        print(b, q, mpm.nstr(alpha(b, q), 20))
    print("RATE theta, q, alpha, F1, F2, J")
    for th, q in [(mp.pi, 0.75), (mp.pi / 2, 0.3), (3 * mp.pi / 2, 0.6)]:
        print(mpm.nstr(th, 17), q, *[mpm.nstr(v, 20) for v in rate(th, q)])
    print("LAMBDA")
    for lam in (1.0, 0.5):
        y, L = Lambda(mp.pi, lam, (mpf('0.51'), mpf('0.99')))
        print(lam, mpm.nstr(y, 20), mpm.nstr(L, 20))
    print("EIGS n=16 theta=pi")
    ev = toeplitz_eigs(16, mp.pi)
    print([mpm.nstr(v, 25) for v in ev])
    with mp.workdps(60):
        for lam in (0.5, 1.0):
            e = mp.exp(16 * mpf(lam))
            print("log_mgf", lam, mpm.nstr(mp.fsum(mp.log(p * e + 1 - p) for p in ev) / 256, 20))
        print("sum p(1-p)", mpm.nstr(mp.fsum(p * (1 - p) for p in ev), 20))
    ev = toeplitz_eigs(12, mp.pi / 2)
    print("EIGS n=12 theta=pi/2", [mpm.nstr(v, 25) for v in ev])
