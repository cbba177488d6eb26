"""Independent oracle for the sphere indicator integrals.

Integrates -chi_{p_delta > 0} against 1, x^2, y^2, z^2 over the unit sphere
with scipy's adaptive quadrature over (phi, z), splitting the z-range at
the exact band edge.  Used to freeze expected values in the C++ tests.
"""
import numpy as np
from scipy import integrate


def band_edge(delta, phi):
    g = 0.5 + delta * np.cos(2 * phi)
    return np.sqrt(g / (1.0 + g))


def coefficients(delta):
    def inner(weight):
        def f_phi(phi):
            zs = band_edge(delta, phi)
            val, _ = integrate.quad(lambda z: weight(z, phi), -zs, zs, epsabs=1e-14, epsrel=1e-14)
            return -val
        pts = [np.pi / 2, np.pi, 3 * np.pi / 2]
        val, _ = integrate.quad(f_phi, 0.0, 2 * np.pi, points=pts, epsabs=1e-13, epsrel=1e-13, limit=400)
        return val
    a = inner(lambda z, p: 1.0)
    ax = inner(lambda z, p: (1 - z * z) * np.cos(p) ** 2)
    ay = inner(lambda z, p: (1 - z * z) * np.sin(p) ** 2)
    az = inner(lambda z, p: z * z)
    kappa = (1 + 2 * delta) * (3 * ay - a) / (3 * ax - a) - 1 + 2 * delta
    return ax, ay, az, a, kappa


if __name__ == "__main__":
    ln2 = np.log(2.0)
    for d in [0.0, 0.05, 0.1, 0.25, 0.45, 0.49, 0.5]:
        ax, ay, az, a, k = coefficients(d)
        sz = 15 / (8 * np.pi) * (az - a / 3)
        sx = 15 / (8 * np.pi) * (ax - a / 3)
        sy = 15 / (8 * np.pi) * (ay - a / 3)
        print(f"delta={d}: Ax={ax:.15f} Ay={ay:.15f} Az={az:.15f} A={a:.15f} kappa={k:.15f}")
        print(f"   S=({sx:.15f},{sy:.15f},{sz:.15f})  pi(1/2) diag = {-ln2/5*sx:.15f},{-ln2/5*sy:.15f},{-ln2/5*sz:.15f}")
    print("ln2/(3 sqrt3) =", ln2 / (3 * np.sqrt(3)))
    print("-4pi/sqrt3", -4*np.pi/np.sqrt(3), "-4pi/(9sqrt3)", -4*np.pi/(9*np.sqrt(3)), "-16pi/(9sqrt3)", -16*np.pi/(9*np.sqrt(3)))
