"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written from scratch with a different
algorithm than the code under test: the multilayer response uses the
interface recursion (Airy summation) instead of matrix products, and
the information helpers use direct probability-space formulas.
"""

from __future__ import annotations

import cmath
import math

import numpy as np


# ---------------------------------------------------------------------------
# interface-recursion multilayer response
# ---------------------------------------------------------------------------

def _cosine(n, n0_sin):
    """Complex propagation cosine in a layer, decaying-wave branch."""
    c = cmath.sqrt(1.0 - (n0_sin / n) ** 2)
    if (n * c).imag < 0.0:
        c = -c
    return c


def _fresnel_pair(n_i, n_f, c_i, c_f, pol):
    if pol == "tm":
        denom = n_f * c_i + n_i * c_f
        r = (n_f * c_i - n_i * c_f) / denom
        t = 2.0 * n_i * c_i / denom
    else:
        denom = n_i * c_i + n_f * c_f
        r = (n_i * c_i - n_f * c_f) / denom
        t = 2.0 * n_i * c_i / denom
    return r, t


def airy_response(indices, thicknesses_nm, wavelength_nm, theta_deg,
                  pol="tm"):
    """Amplitudes (t, r) of a multilayer by backward interface recursion.

    indices: complex index per layer, first and last semi-infinite.
    thicknesses_nm: interior thicknesses (len(indices) - 2 entries).
    The recursion folds the partial-wave geometric series interface by
    interface, a different composition than the transfer matrix.
    """
    n = [complex(v) for v in indices]
    L = len(n)
    if len(thicknesses_nm) != L - 2:
        raise ValueError("need one thickness per interior layer")
    theta = math.radians(theta_deg)
    n0_sin = n[0] * math.sin(theta)
    cos = [_cosine(v, n0_sin) for v in n]

    r_if = []
    t_if = []
    for j in range(L - 1):
        r, t = _fresnel_pair(n[j], n[j + 1], cos[j], cos[j + 1], pol)
        r_if.append(r)
        t_if.append(t)

    # one-way phase across each interior layer
    phases = [2.0 * math.pi * n[j + 1] * cos[j + 1]
              * thicknesses_nm[j] / wavelength_nm
              for j in range(L - 2)]

    r_tot = r_if[L - 2]
    t_tot = t_if[L - 2]
    for j in range(L - 3, -1, -1):
        ph = cmath.exp(1j * phases[j])
        denom = 1.0 + r_if[j] * r_tot * ph * ph
        t_tot = t_if[j] * ph * t_tot / denom
        r_tot = (r_if[j] + r_tot * ph * ph) / denom
    return t_tot, r_tot


def airy_flux(indices, thicknesses_nm, wavelength_nm, theta_deg, pol="tm"):
    """(T, R) intensity coefficients from the recursion amplitudes."""
    t, r = airy_response(indices, thicknesses_nm, wavelength_nm, theta_deg,
                         pol)
    n = [complex(v) for v in indices]
    theta = math.radians(theta_deg)
    n0_sin = n[0] * math.sin(theta)
    c0 = _cosine(n[0], n0_sin)
    cL = _cosine(n[-1], n0_sin)
    if pol == "tm":
        f0 = (n[0] * c0.conjugate()).real
        fL = (n[-1] * cL.conjugate()).real
    else:
        f0 = (n[0] * c0).real
        fL = (n[-1] * cL).real
    return abs(t) ** 2 * fL / f0, abs(r) ** 2


# ---------------------------------------------------------------------------
# information oracles
# ---------------------------------------------------------------------------

def fisher_direct(probs_fn, x, step):
    """Plain central-difference Fisher information of a distribution."""
    p_plus = np.asarray(probs_fn(x + step), dtype=float)
    p_minus = np.asarray(probs_fn(x - step), dtype=float)
    dp = (p_plus - p_minus) / (2.0 * step)
    p_mid = 0.5 * (p_plus + p_minus)
    keep = p_mid > 1e-15
    return float(np.sum(dp[keep] ** 2 / p_mid[keep]))


def bernoulli_fisher(p, dp):
    """Closed form for a two-outcome distribution (p, 1-p)."""
    return dp * dp / p + dp * dp / (1.0 - p)


def mixture_fisher(components_fn, x, step):
    """Fisher information of an equal-weight mixture of distributions.

    components_fn(x) returns a list of outcome arrays; the mixture
    averages them element-wise before differentiating.
    """
    def mixed(v):
        parts = [np.asarray(c, dtype=float) for c in components_fn(v)]
        return sum(parts) / len(parts)

    return fisher_direct(mixed, x, step)
