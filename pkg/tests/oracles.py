"""Reference values computed by routes independent of the package.

The modular-function oracle inverts ``lambda(tau) = (theta_2/theta_3)^4``
with mpmath theta series and differentiates it numerically; the package
uses an AGM formula for the same density instead.
"""

import mpmath as mp


def disk_density(z, center=0j, radius=1.0):
    r = abs(z - center) / radius
    return 2.0 / (radius * (1.0 - r * r))


def modular_lambda(tau):
    q = mp.exp(1j * mp.pi * tau)
    return (mp.jtheta(2, 0, q) / mp.jtheta(3, 0, q)) ** 4


def density_without_0_1(z, dps=30):
    """Density of the plane minus {0, 1} at ``z``."""
    with mp.workdps(dps):
        z = mp.mpc(z)
        seed = 1j * mp.ellipk(1 - z) / mp.ellipk(z)
        tau = mp.findroot(lambda t: modular_lambda(t) - z, seed)
        return float(1 / (mp.im(tau) * abs(mp.diff(modular_lambda, tau))))


# frozen outputs of the routines above
LAMBDA_01_AT_MINUS_ONE = 0.22847329052223181   # also 4 pi^2 / Gamma(1/4)^4
LAMBDA_01_AT_ONE_MINUS_I = 0.28329209774870163
# {0, 1, i}: the Moebius map z(1-i)/(z-i) sends i to infinity, 0 to 0,
# 1 to 1 and infinity to 1-i, with derivative modulus sqrt 2 at infinity
PCAP_0_1_I = 0.20031776337466920

# half-plane pair at 1+i: lam_upper = lam_right = 1, the quadrant has
# sqrt 2 and the three-quarter plane (2/3)/sqrt 2
HALF_PLANE_PAIR_RATIO_AT_1_PLUS_I = 1.5
