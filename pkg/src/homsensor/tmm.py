"""Transfer-matrix optics for planar multilayers at oblique incidence.

The geometry is a stack of homogeneous layers between two semi-infinite
half-spaces, illuminated from the first half-space at a fixed angle.
Amplitudes follow to the usual 2x2 transfer-matrix bookkeeping:

* in-plane momentum is conserved, so every layer shares
  n0 sin(theta0); layer cosines are sqrt(1 - (n0 sin theta0 / nj)^2)
  taken on the branch with decaying forward evanescent waves,
* each interface contributes (1/t_ij) [[1, r_ij], [r_ij, 1]] with the
  single-interface Fresnel coefficients of the chosen polarization,
* each interior layer contributes diag(exp(-i delta), exp(+i delta))
  with delta = 2 pi n_j cos(theta_j) d_j / lambda,
* the stack amplitudes are t = 1/M11 and r = M21/M11.

The sensing geometry of interest is prism | metal film | sample gap |
metal film | prism: a symmetric pair of attenuated-total-reflection
metal films that together behave as a lossy beamsplitter whose split
ratio and phase depend sharply on the index of the medium in the gap.

Conventions: exp(-i omega t) time dependence; complex index n + ik with
k >= 0; for TM polarization the Fresnel coefficients are written in the
form whose reflection amplitude tends to that of TE at normal incidence
(so r has no extra sign flip there); the reported phase difference is
phi_tr = arg(r) - arg(t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (CalibrationError, StackDefinitionError,
                     UnphysicalPointError)
from .materials import Material, MaterialTable, constant_material, gold_jc

DEFAULT_PRISM_INDEX = 1.5
# Amplitudes at or below this are treated as zero when a phase is
# extracted (their argument is rounding debris); corresponds to power
# coefficients of 1e-24, far below anything resolvable.
PHASE_AMPLITUDE_FLOOR = 1e-12
_POLARIZATIONS = ("tm", "te")


# ---------------------------------------------------------------------------
# stack definition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Layer:
    """One slab: a material plus a thickness in nm.

    thickness_nm is None for the two terminal half-spaces and a finite
    non-negative number for interior layers.
    """

    material: Material
    thickness_nm: float | None = None


@dataclass(frozen=True)
class LayerStack:
    """An ordered stack of layers, first and last semi-infinite.

    sample_layer names the interior layer whose refractive index is the
    measurand: stack_response replaces that layer's index with its n_s
    argument, falling back to the stored sample_n when the argument is
    omitted.  Stacks without a sample layer (sample_layer=None) are
    fixed structures and must be evaluated without n_s.
    """

    layers: tuple[Layer, ...]
    sample_layer: int | None = None
    sample_n: float | None = None
    name: str = "stack"

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 2:
            raise StackDefinitionError(
                "stack %r needs at least two layers (entrance and exit "
                "half-spaces), got %d" % (self.name, len(layers)))
        for j, layer in enumerate(layers):
            terminal = j in (0, len(layers) - 1)
            if terminal and layer.thickness_nm is not None:
                raise StackDefinitionError(
                    "stack %r: terminal layer %d must have thickness None"
                    % (self.name, j))
            if not terminal:
                d = layer.thickness_nm
                if d is None or not np.isfinite(d) or d < 0.0:
                    raise StackDefinitionError(
                        "stack %r: interior layer %d needs a finite "
                        "thickness >= 0, got %r" % (self.name, j, d))
        if self.sample_layer is not None:
            if not (0 < self.sample_layer < len(layers) - 1):
                raise StackDefinitionError(
                    "stack %r: sample_layer %d is not an interior layer"
                    % (self.name, self.sample_layer))
        if self.sample_n is not None and self.sample_layer is None:
            raise StackDefinitionError(
                "stack %r: sample_n set without a sample_layer" % (self.name,))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def thickness_of(self, j: int) -> float | None:
        return self.layers[j].thickness_nm

    def with_thickness(self, updates: dict[int, float]) -> "LayerStack":
        """Copy of the stack with interior thicknesses replaced."""
        layers = list(self.layers)
        for j, d in updates.items():
            if j in (0, len(layers) - 1):
                raise StackDefinitionError(
                    "cannot set a thickness on terminal layer %d" % j)
            layers[j] = replace(layers[j], thickness_nm=float(d))
        return replace(self, layers=tuple(layers))

    def wavelength_window_nm(self) -> tuple[float, float] | None:
        """Intersection of the dispersive layers' valid windows, or None."""
        lo, hi = None, None
        for layer in self.layers:
            win = layer.material.wavelength_window_nm()
            if win is None:
                continue
            lo = win[0] if lo is None else max(lo, win[0])
            hi = win[1] if hi is None else min(hi, win[1])
        if lo is None:
            return None
        return (lo, hi)


def make_sensor_stack(d_metal_nm: float = 50.0, d_sample_nm: float = 500.0,
                      prism_index: float = DEFAULT_PRISM_INDEX,
                      metal: Material | None = None,
                      sample_placeholder: float = 1.31) -> LayerStack:
    """Dual-film beamsplitter: prism | metal | sample | metal | prism.

    The sample layer's material is only a placeholder; its index is
    supplied per call through the n_s argument of stack_response.
    """
    metal = metal or gold_jc()
    prism = constant_material("prism", prism_index)
    sample = constant_material("sample", sample_placeholder)
    return LayerStack(
        layers=(
            Layer(prism, None),
            Layer(metal, float(d_metal_nm)),
            Layer(sample, float(d_sample_nm)),
            Layer(metal, float(d_metal_nm)),
            Layer(prism, None),
        ),
        sample_layer=2,
        sample_n=float(sample_placeholder),
        name="dual_film_sensor",
    )


def reversed_stack(stack: LayerStack) -> LayerStack:
    """The same stack illuminated from the other side."""
    layers = tuple(reversed(stack.layers))
    sample = None
    if stack.sample_layer is not None:
        sample = stack.n_layers - 1 - stack.sample_layer
    return LayerStack(layers=layers, sample_layer=sample,
                      sample_n=stack.sample_n,
                      name=stack.name + "_reversed")


# ---------------------------------------------------------------------------
# response
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StackResponse:
    """Amplitudes and intensity coefficients at one (or a grid of) points.

    t, r are the complex transmission and reflection amplitudes; T, R
    the power transmittance and reflectance (flux-normalized, so a
    lossless stack has T + R = 1); A = 1 - T - R the absorbed fraction;
    phi_tr = arg(r) - arg(t) wrapped to (-pi, pi], with the convention
    that a zero amplitude contributes phase 0.
    """

    t: np.ndarray
    r: np.ndarray
    T: np.ndarray
    R: np.ndarray
    A: np.ndarray
    phi_tr: np.ndarray
    wavelength_nm: np.ndarray
    theta_deg: np.ndarray
    n_s: np.ndarray | None
    polarization: str

    def validate(self, tol: float = 1e-9) -> "StackResponse":
        """Check passivity: T, R in [0, 1 + tol], T + R <= 1 + tol, and
        the singular values |t +/- r| of the symmetric splitter matrix
        [[t, r], [r, t]] at or below 1 + tol (flux-normalized t)."""
        bad = (self.T < -tol) | (self.R < -tol) | (self.T > 1 + tol) \
            | (self.R > 1 + tol) | (self.T + self.R > 1 + tol)
        t_flux = np.sqrt(np.maximum(self.T, 0.0)) * np.exp(1j * np.angle(self.t))
        bad |= (np.abs(t_flux + self.r) > 1 + tol) \
            | (np.abs(t_flux - self.r) > 1 + tol)
        if np.any(bad):
            idx = np.argwhere(np.atleast_1d(bad))[0]
            raise UnphysicalPointError(
                "response violates passivity at grid index %s: T=%s R=%s"
                % (idx, np.atleast_1d(self.T)[tuple(idx)],
                   np.atleast_1d(self.R)[tuple(idx)]))
        return self


def _cosines_from_indices(n_layers, n0_sin) -> np.ndarray:
    """cos(theta_j) on the branch with Im(n_j cos_j) >= 0.

    The principal square root is kept unless Im(n_j cos_j) < 0, in which
    case the opposite branch is taken so that exp(+i k_z z) decays into
    absorbing or evanescent layers.
    """
    cos = np.sqrt(1.0 - (n0_sin / n_layers) ** 2 + 0j)
    flip = (n_layers * cos).imag < 0.0
    return np.where(flip, -cos, cos)


def layer_cosines(stack: LayerStack, wavelength_nm: float, theta_deg: float,
                  n_s: float | None = None) -> list[complex]:
    """Propagation cosine of each layer at one (wavelength, angle) point.

    In-plane momentum conservation fixes n_0 sin(theta_0) across the
    stack; each layer's cosine follows from its own index on the
    decaying branch.
    """
    _check_theta(theta_deg)
    n_list = _layer_indices_scalar(stack, wavelength_nm, n_s)
    n0_sin = n_list[0] * math.sin(math.radians(theta_deg))
    return [complex(_cosines_from_indices(np.asarray(nj), np.asarray(n0_sin)))
            for nj in n_list]


def fresnel(n_a, n_b, cos_a, cos_b, polarization: str = "tm"
            ) -> tuple[complex, complex]:
    """Single-interface amplitude coefficients (r_ab, t_ab), a into b."""
    if polarization == "tm":
        denom = n_b * cos_a + n_a * cos_b
        if abs(denom) < 1e-300:
            raise UnphysicalPointError(
                "degenerate TM interface: n_b cos_a + n_a cos_b = 0")
        return ((n_b * cos_a - n_a * cos_b) / denom,
                2.0 * n_a * cos_a / denom)
    denom = n_a * cos_a + n_b * cos_b
    if abs(denom) < 1e-300:
        raise UnphysicalPointError(
            "degenerate TE interface: n_a cos_a + n_b cos_b = 0")
    return ((n_a * cos_a - n_b * cos_b) / denom,
            2.0 * n_a * cos_a / denom)


def boundary_matrix(n_a, n_b, cos_a, cos_b, polarization: str = "tm"
                    ) -> np.ndarray:
    """Interface transfer matrix (1/t) [[1, r], [r, 1]]."""
    r, t = fresnel(n_a, n_b, cos_a, cos_b, polarization)
    return np.array([[1.0, r], [r, 1.0]], dtype=complex) / t


def propagation_matrix(n, d_nm: float, wavelength_nm: float, cos_theta
                       ) -> np.ndarray:
    """Homogeneous-layer transfer matrix diag(e^{-i delta}, e^{+i delta}).

    delta = (2 pi / lambda) n cos(theta) d is the accumulated normal
    phase; zero thickness gives the identity.
    """
    if d_nm < 0:
        raise StackDefinitionError("propagation thickness must be >= 0")
    delta = 2.0 * np.pi * n * cos_theta * d_nm / wavelength_nm
    return np.array([[np.exp(-1j * delta), 0.0],
                     [0.0, np.exp(1j * delta)]], dtype=complex)


def _flux_factor(n, c, polarization):
    """Power-flux normalization Re(n cos) (TE) or Re(n conj(cos)) (TM)."""
    if polarization == "tm":
        return (n * np.conj(c)).real
    return (n * c).real


def _check_theta(theta_deg):
    th = np.asarray(theta_deg, dtype=float)
    if np.any(th < 0.0) or np.any(th >= 90.0):
        raise StackDefinitionError(
            "incidence angle must satisfy 0 <= theta < 90 degrees")


def _check_polarization(polarization):
    if polarization not in _POLARIZATIONS:
        raise StackDefinitionError(
            "polarization must be one of %s, got %r"
            % (_POLARIZATIONS, polarization))


def _resolve_ns(stack: LayerStack, n_s):
    if stack.sample_layer is None:
        if n_s is not None:
            raise StackDefinitionError(
                "stack %r has no sample layer; n_s must be omitted"
                % (stack.name,))
        return None
    if n_s is None:
        n_s = stack.sample_n
    if n_s is None:
        raise StackDefinitionError(
            "stack %r has a sample layer; pass n_s or set sample_n"
            % (stack.name,))
    return n_s


def _layer_indices_scalar(stack, wavelength_nm, n_s):
    n_s = _resolve_ns(stack, n_s)
    out = []
    for j, layer in enumerate(stack.layers):
        if j == stack.sample_layer:
            out.append(complex(n_s))
        else:
            out.append(complex(layer.material.index(float(wavelength_nm))))
    return out


def stack_transfer(stack: LayerStack, wavelength_nm: float, theta_deg: float,
                   n_s: float | None = None, polarization: str = "tm"
                   ) -> np.ndarray:
    """Total 2x2 transfer matrix at one scalar parameter point.

    Built explicitly from boundary_matrix and propagation_matrix factors
    in layer order; stack_response uses an equivalent vectorized path.
    """
    _check_polarization(polarization)
    _check_theta(theta_deg)
    n_list = _layer_indices_scalar(stack, wavelength_nm, n_s)
    cos_list = layer_cosines(stack, wavelength_nm, theta_deg, n_s)
    m = np.eye(2, dtype=complex)
    for j in range(len(n_list) - 1):
        if j > 0:
            m = m @ propagation_matrix(n_list[j],
                                       stack.layers[j].thickness_nm,
                                       wavelength_nm, cos_list[j])
        m = m @ boundary_matrix(n_list[j], n_list[j + 1], cos_list[j],
                                cos_list[j + 1], polarization)
    return m


def stack_response(stack: LayerStack, wavelength_nm, theta_deg, n_s=None,
                   polarization: str = "tm") -> StackResponse:
    """Evaluate t, r, T, R, A, phi_tr; broadcasts over all numeric inputs.

    wavelength_nm, theta_deg and n_s may be scalars or arrays with
    mutually broadcastable shapes.  n_s replaces the index of the
    stack's sample layer (defaulting to the stored sample_n) and must be
    omitted when the stack has no sample layer.  t = 1/M11, r = M21/M11
    of the total transfer matrix.
    """
    _check_polarization(polarization)
    _check_theta(theta_deg)
    n_s = _resolve_ns(stack, n_s)

    lam = np.asarray(wavelength_nm, dtype=float)
    th = np.radians(np.asarray(theta_deg, dtype=float))
    if n_s is None:
        shape = np.broadcast_shapes(lam.shape, th.shape)
        ns = None
    else:
        ns = np.asarray(n_s, dtype=complex)
        shape = np.broadcast_shapes(lam.shape, th.shape, ns.shape)
        ns = np.broadcast_to(ns, shape)
    lam = np.broadcast_to(lam, shape)
    th = np.broadcast_to(th, shape)

    # per-layer complex indices on the broadcast grid
    n_list = []
    for j, layer in enumerate(stack.layers):
        if j == stack.sample_layer:
            n_list.append(ns)
        else:
            nj = layer.material.index(lam)
            n_list.append(np.broadcast_to(np.asarray(nj, dtype=complex), shape))

    n0_sin = n_list[0] * np.sin(th)
    cos_list = [_cosines_from_indices(nj, n0_sin) for nj in n_list]

    # accumulate M = B01 P1 B12 P2 ... B(N-1,N) as scalar 2x2 components
    m11 = np.ones(shape, dtype=complex)
    m12 = np.zeros(shape, dtype=complex)
    m21 = np.zeros(shape, dtype=complex)
    m22 = np.ones(shape, dtype=complex)
    for j in range(len(n_list) - 1):
        if j > 0:
            d = stack.layers[j].thickness_nm
            delta = 2.0 * np.pi * n_list[j] * cos_list[j] * d / lam
            em = np.exp(-1j * delta)
            ep = np.exp(1j * delta)
            m11, m12 = m11 * em, m12 * ep
            m21, m22 = m21 * em, m22 * ep
        if polarization == "tm":
            denom = n_list[j + 1] * cos_list[j] + n_list[j] * cos_list[j + 1]
            r_ij = (n_list[j + 1] * cos_list[j]
                    - n_list[j] * cos_list[j + 1]) / denom
        else:
            denom = n_list[j] * cos_list[j] + n_list[j + 1] * cos_list[j + 1]
            r_ij = (n_list[j] * cos_list[j]
                    - n_list[j + 1] * cos_list[j + 1]) / denom
        t_ij = 2.0 * n_list[j] * cos_list[j] / denom
        b11 = 1.0 / t_ij
        b12 = r_ij / t_ij
        a11 = m11 * b11 + m12 * b12
        a12 = m11 * b12 + m12 * b11
        a21 = m21 * b11 + m22 * b12
        a22 = m21 * b12 + m22 * b11
        m11, m12, m21, m22 = a11, a12, a21, a22

    if np.any(m11 == 0.0):
        raise UnphysicalPointError(
            "transfer matrix is singular (M11 = 0): resonance pole, not "
            "reachable for passive stacks at real frequency")
    t = 1.0 / m11
    r = m21 / m11

    f_in = _flux_factor(n_list[0], cos_list[0], polarization)
    f_out = _flux_factor(n_list[-1], cos_list[-1], polarization)
    T = (np.abs(t) ** 2) * f_out / f_in
    R = np.abs(r) ** 2
    A = 1.0 - T - R
    # The phase of a vanished amplitude is rounding debris (and its
    # branch flips across an amplitude zero), so snap it to the zero
    # convention: any port below the floor contributes phase 0.  The
    # floor sits ~10 orders below every physically resolvable amplitude.
    arg_r = np.where(np.abs(r) <= PHASE_AMPLITUDE_FLOOR, 0.0, np.angle(r))
    arg_t = np.where(np.abs(t) <= PHASE_AMPLITUDE_FLOOR, 0.0, np.angle(t))
    phi = arg_r - arg_t
    phi = np.where(phi > np.pi, phi - 2.0 * np.pi, phi)
    phi = np.where(phi <= -np.pi, phi + 2.0 * np.pi, phi)

    def _maybe_scalar(x):
        return x if shape else x[()]

    return StackResponse(
        t=_maybe_scalar(t), r=_maybe_scalar(r),
        T=_maybe_scalar(T.real), R=_maybe_scalar(R.real),
        A=_maybe_scalar(A.real), phi_tr=_maybe_scalar(phi),
        wavelength_nm=lam, theta_deg=np.degrees(th),
        n_s=ns, polarization=polarization)


def response_derivatives(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                         polarization: str = "tm", step: float = 1e-6):
    """Central-difference d(T, R, phi_tr)/d n_s at the given point(s).

    The phase derivative unwraps the +/- step values onto the branch
    nearest the center value before differencing, so a point near the
    +/- pi seam does not produce a spurious 2 pi / (2 h) spike.
    """
    ns = np.asarray(n_s, dtype=float)
    rp = stack_response(stack, wavelength_nm, theta_deg, ns + step, polarization)
    rm = stack_response(stack, wavelength_nm, theta_deg, ns - step, polarization)
    rc = stack_response(stack, wavelength_nm, theta_deg, ns, polarization)

    def _near(phi, ref):
        return ref + np.mod(phi - ref + np.pi, 2.0 * np.pi) - np.pi

    dT = (rp.T - rm.T) / (2.0 * step)
    dR = (rp.R - rm.R) / (2.0 * step)
    dphi = (_near(rp.phi_tr, rc.phi_tr) - _near(rm.phi_tr, rc.phi_tr)) / (2.0 * step)
    return dT, dR, dphi


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of the balanced-splitter thickness search."""

    stack: LayerStack
    d_metal_nm: float
    d_sample_nm: float
    residual: float          # |T - R| at the target point
    wavelength_nm: float
    theta_deg: float
    n_s_target: float
    changed: bool            # False when the input stack already balanced


def _require_sensor_shape(stack: LayerStack):
    if stack.n_layers != 5 or stack.sample_layer != 2:
        raise StackDefinitionError(
            "calibration expects the 5-layer dual-film geometry "
            "(half-space | film | sample | film | half-space) with "
            "sample_layer=2")
    if stack.layers[1].material is not stack.layers[3].material:
        raise StackDefinitionError(
            "calibration expects both films to share one material")


def calibrate_stack(stack: LayerStack | None = None, wavelength_nm: float = 800.0,
                    theta_deg: float = 70.0, n_s_target: float = 1.31,
                    tol: float = 1e-3,
                    d_metal_bounds: tuple[float, float] = (20.0, 80.0),
                    d_sample_bounds: tuple[float, float] = (100.0, 2000.0),
                    polarization: str = "tm") -> CalibrationResult:
    """Find film/gap thicknesses that balance the splitter, T = R.

    At the balanced point the two-photon coincidence rate dips toward
    its minimum and the index sensitivity peaks, so the calibration
    target is |T - R| < tol at (wavelength_nm, theta_deg, n_s_target).

    Search policy (deterministic): scan the film thickness on a 1 nm
    grid ascending across d_metal_bounds; the thinnest film with at
    least one balanced gap wins.  Thinner films attenuate less, so of
    all balanced operating points this one transmits the most light and
    interferes with the highest contrast; thicker films reach balance
    too, but on progressively darker branches.  Among the winning
    film's crossings the gap thickness closest to the input stack's is
    kept (remaining ties break toward the thinner gap), and the crossing
    is polished by bisection.  The input stack is returned unchanged
    when it already meets tol.

    Raises CalibrationError if no sign change exists in bounds, or if
    the balance point is not unique within +/- 0.02 RIU of the target
    index (a non-unique crossing would make the dip ambiguous).
    """
    stack = stack if stack is not None else make_sensor_stack()
    _require_sensor_shape(stack)

    def imbalance(d_m, d_s):
        trial = stack.with_thickness({1: d_m, 2: d_s, 3: d_m})
        resp = stack_response(trial, wavelength_nm, theta_deg, n_s_target,
                              polarization)
        return float(resp.T - resp.R)

    d_m0 = float(stack.layers[1].thickness_nm)
    d_s0 = float(stack.layers[2].thickness_nm)

    # fixed point: an already balanced stack is left alone
    res0 = abs(imbalance(d_m0, d_s0))
    if res0 < tol:
        _check_unique_crossing(stack, wavelength_nm, theta_deg, n_s_target,
                               polarization)
        return CalibrationResult(stack, d_m0, d_s0, res0, wavelength_nm,
                                 theta_deg, n_s_target, changed=False)

    metal_grid = np.arange(d_metal_bounds[0], d_metal_bounds[1] + 0.5, 1.0)
    sample_grid = np.arange(d_sample_bounds[0], d_sample_bounds[1] + 1.0, 4.0)

    best = None  # (|ds - ds0|, ds) among the winning film's crossings
    d_m = None
    for d_m_try in metal_grid:
        g = np.array([imbalance(d_m_try, d_s) for d_s in sample_grid])
        sign_change = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
        for i in sign_change:
            lo, hi = sample_grid[i], sample_grid[i + 1]
            glo = g[i]
            for _ in range(80):  # bisection to ~1e-22 nm, converges long before
                mid = 0.5 * (lo + hi)
                gm = imbalance(d_m_try, mid)
                if gm == 0.0:
                    lo = hi = mid
                    break
                if np.sign(gm) == np.sign(glo):
                    lo, glo = mid, gm
                else:
                    hi = mid
            d_s = 0.5 * (lo + hi)
            key = (abs(d_s - d_s0), d_s)
            if best is None or key < best:
                best = key
        if best is not None:
            d_m = float(d_m_try)  # thinnest balanced film wins
            break
    if best is None:
        raise CalibrationError(
            "no balanced point: T - R has no sign change for film "
            "thickness in %s nm and sample thickness in %s nm at "
            "lambda=%.6g nm, theta=%.6g deg, n_s=%.6g"
            % (d_metal_bounds, d_sample_bounds, wavelength_nm, theta_deg,
               n_s_target))

    d_s = best[1]
    residual = abs(imbalance(d_m, d_s))
    if residual >= tol:
        raise CalibrationError(
            "bisection stalled: residual |T - R| = %.3g at d_metal=%.6g, "
            "d_sample=%.6g" % (residual, d_m, d_s))
    calibrated = stack.with_thickness({1: d_m, 2: d_s, 3: d_m})
    _check_unique_crossing(calibrated, wavelength_nm, theta_deg, n_s_target,
                           polarization)
    return CalibrationResult(calibrated, float(d_m), float(d_s), residual,
                             wavelength_nm, theta_deg, n_s_target, changed=True)


def _check_unique_crossing(stack: LayerStack, wavelength_nm, theta_deg,
                           n_s_target, polarization, half_width=0.02,
                           points=81):
    """Require exactly one T = R crossing within +/- half_width RIU."""
    grid = np.linspace(n_s_target - half_width, n_s_target + half_width, points)
    resp = stack_response(stack, wavelength_nm, theta_deg, grid, polarization)
    g = resp.T - resp.R
    crossings = int(np.sum(np.sign(g[:-1]) * np.sign(g[1:]) < 0))
    if crossings != 1:
        raise CalibrationError(
            "balance point not unique: %d T = R crossings within +/- %.3g "
            "RIU of n_s = %.6g" % (crossings, half_width, n_s_target))


# ---------------------------------------------------------------------------
# stack (de)serialization
# ---------------------------------------------------------------------------

def _material_to_dict(mat: Material) -> dict:
    if mat.table is not None and mat.name == "Au":
        return {"builtin": "gold_jc"}
    if mat.constant is not None:
        return {"name": mat.name,
                "constant": [mat.constant.real, mat.constant.imag]}
    return {"name": mat.name,
            "table": {"wavelength_nm": mat.table.wavelength_nm.tolist(),
                      "n": mat.table.n.tolist(),
                      "k": mat.table.k.tolist()}}


def _material_from_dict(d: dict) -> Material:
    if d.get("builtin") == "gold_jc":
        return gold_jc()
    if "constant" in d:
        re_part, im_part = d["constant"]
        return constant_material(d.get("name", "constant"),
                                 complex(re_part, im_part))
    t = d["table"]
    table = MaterialTable(np.asarray(t["wavelength_nm"], dtype=float),
                          np.asarray(t["n"], dtype=float),
                          np.asarray(t["k"], dtype=float),
                          name=d.get("name", "table"))
    return Material(name=d.get("name", "table"), table=table)


def stack_to_dict(stack: LayerStack) -> dict:
    return {
        "name": stack.name,
        "sample_layer": stack.sample_layer,
        "sample_n": stack.sample_n,
        "layers": [{"material": _material_to_dict(layer.material),
                    "thickness_nm": layer.thickness_nm}
                   for layer in stack.layers],
    }


def stack_from_dict(d: dict) -> LayerStack:
    layers = tuple(Layer(_material_from_dict(ld["material"]),
                         ld["thickness_nm"]) for ld in d["layers"])
    return LayerStack(layers=layers, sample_layer=d.get("sample_layer"),
                      sample_n=d.get("sample_n"),
                      name=d.get("name", "stack"))


def save_stack(stack: LayerStack, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(stack_to_dict(stack), f, indent=2, sort_keys=True)
        f.write("\n")


def load_stack(path) -> LayerStack:
    with open(path, "r", encoding="utf-8") as f:
        return stack_from_dict(json.load(f))
