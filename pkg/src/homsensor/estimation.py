"""Fisher information and precision analysis for index sensing.

Everything here quantifies how well the sample index n_s can be
estimated from photon counts behind the dual-film splitter.  The core
quantity is the (classical) Fisher information of an outcome
distribution P(outcome | n_s),

    I(n_s) = sum_outcomes  (d P / d n_s)^2 / P,

whose inverse square root bounds the standard deviation of any unbiased
single-shot estimate.  Derivatives are taken by central finite
differences in n_s; the denominator uses the midpoint average of the
two perturbed distributions, which is accurate to the same order as the
derivative and costs no extra model evaluation.

Provided on top of the raw information are:

* per-scheme evaluators for the photon-pair (two-photon interference)
  probe and the coherent probe,
* a decomposition of the information over the splitter parameters
  (T, R, phi_tr), exposing which physical channel carries the signal,
* a scan of the coherent probe's relative phase, locating the phase
  that maximizes its information,
* an uncertainty budget converting instrumental disturbances (angle,
  prism index, polarization, film thickness) into equivalent index
  errors via sensitivity ratios of the coincidence signal.

Some closed-form diagnostics are conventionally quoted for an idealized
balanced splitter with a quarter-wave transmission-reflection phase.
Operations that reproduce those diagnostics accept phi_tr_assumption,
which freezes the splitter phase at the given value (the index
dependence then enters through T and R only).  With the default None
the actual stack phase and its n_s dependence are used.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError, UndefinedRatioError
from .quantum_stats import (POISSON_L_MAX, BsPoint, CoherentInput, bs_point,
                            coherent_output_means, poisson_pair_grid)
from .tmm import LayerStack, constant_material, stack_response, response_derivatives

ZERO_PROB_FLOOR = 1e-15   # outcomes below this are treated as impossible
DERIV_FLOOR = 1e-12       # warn when an impossible outcome still moves
DEFAULT_NS_STEP = 1e-6    # central-difference step in n_s (RIU)
DECOMP_STEP = 1e-5        # step for (T, R, phi) partials
BUDGET_STEP = 1e-4        # step for budget sensitivities, per variable unit

_BUDGET_RESOURCE = "budget_sources.json"


# ---------------------------------------------------------------------------
# generic Fisher information from a parametric distribution
# ---------------------------------------------------------------------------

def fisher_from_distribution(dist_fn, n_s: float, step: float = DEFAULT_NS_STEP
                             ) -> float:
    """Fisher information of a finite outcome distribution at n_s.

    dist_fn(n_s) must return a 1-D array of outcome probabilities (an
    exhaustive set, possibly including explicit loss/vacuum outcomes).
    Outcomes whose midpoint probability is below ZERO_PROB_FLOOR are
    skipped; if such an outcome still shows a derivative above
    DERIV_FLOOR a warning is emitted, since that indicates the outcome
    set is too coarse for the requested step.
    """
    p_plus = np.asarray(dist_fn(n_s + step), dtype=float).ravel()
    p_minus = np.asarray(dist_fn(n_s - step), dtype=float).ravel()
    if p_plus.shape != p_minus.shape:
        raise ConfigError("distribution changed outcome count under the step")
    for p in (p_plus, p_minus):
        total = float(np.sum(p))
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(
                "outcome distribution sums to %r; the outcome set must be "
                "exhaustive (include loss/vacuum outcomes explicitly)"
                % (total,))
    deriv = (p_plus - p_minus) / (2.0 * step)
    mid = 0.5 * (p_plus + p_minus)
    alive = mid > ZERO_PROB_FLOOR
    dead_moving = (~alive) & (np.abs(deriv) > DERIV_FLOOR)
    if np.any(dead_moving):
        warnings.warn(
            "outcome(s) with probability below %g still carry derivative "
            "above %g; Fisher information may be underestimated"
            % (ZERO_PROB_FLOOR, DERIV_FLOOR), stacklevel=2)
    return float(np.sum(deriv[alive] ** 2 / mid[alive]))


# ---------------------------------------------------------------------------
# outcome models over the splitter parameters (T, R, phi_tr)
# ---------------------------------------------------------------------------

def _hom_click_vector(T: float, R: float, phi: float) -> np.ndarray:
    """Click probabilities (0, 1, 2 detected) for the photon-pair probe.

    Raw formulas, no dataclass validation: used inside finite-difference
    loops where parameters are perturbed a few 1e-5 around a physical
    point and tiny excursions must not raise.
    """
    s = T + R
    p11 = T * T + R * R + 2.0 * T * R * math.cos(2.0 * phi)
    p20 = 2.0 * T * R
    p10 = s - 4.0 * T * R - p11
    p00 = 1.0 - 2.0 * s + p11 + 4.0 * T * R
    return np.array([p00, 2.0 * (p10 + p20), p11])


def _hom_pair_vector(T: float, R: float, phi: float) -> np.ndarray:
    """Joint pair outcomes (00, 10, 01, 20, 02, 11), the fine-grained set
    that the click vector coarse-grains."""
    s = T + R
    p11 = T * T + R * R + 2.0 * T * R * math.cos(2.0 * phi)
    p20 = 2.0 * T * R
    p10 = s - 4.0 * T * R - p11
    p00 = 1.0 - 2.0 * s + p11 + 4.0 * T * R
    return np.array([p00, p10, p10, p20, p20, p11])


def _coherent_mean_pair(T: float, R: float, phi: float, probe: CoherentInput
                        ) -> tuple[float, float]:
    """Raw (mu1, mu2), no validation; same shared-direct-term convention
    as quantum_stats.coherent_output_means."""
    a, b = probe.alpha_sq, probe.beta_sq
    direct = T * a + R * b
    cross = 2.0 * math.sqrt(max(T * R * a * b, 0.0))
    mu1 = direct + cross * math.cos(phi - probe.phi_ab)
    mu2 = direct + cross * math.cos(phi + probe.phi_ab)
    return max(mu1, 0.0), max(mu2, 0.0)


def _poisson_fisher_from_means(mu, dmu) -> float:
    """Fisher information of independent Poissonians: sum mu'^2 / mu."""
    total = 0.0
    for m, dm in zip(mu, dmu):
        if m > ZERO_PROB_FLOOR:
            total += dm * dm / m
        elif abs(dm) > DERIV_FLOOR:
            warnings.warn("Poisson mean pinned at zero still carries a "
                          "derivative; information underestimated",
                          stacklevel=3)
    return float(total)


def _tau_at(stack, wavelength_nm, theta_deg, n_s, polarization,
            phi_tr_assumption):
    resp = stack_response(stack, wavelength_nm, theta_deg, n_s, polarization)
    point = bs_point(resp)
    phi = point.phi_tr if phi_tr_assumption is None else float(phi_tr_assumption)
    return point.T, point.R, phi


# ---------------------------------------------------------------------------
# per-scheme information at a stack operating point
# ---------------------------------------------------------------------------

def fisher_hom(stack: LayerStack, wavelength_nm, theta_deg, n_s,
               polarization: str = "tm", step: float = DEFAULT_NS_STEP,
               outcomes: str = "click") -> float:
    """Information carried by the photon-pair probe.

    outcomes selects the detection model: "click" (default) counts the
    number of ports that fired, "pair" resolves the joint photon numbers
    and therefore carries at least as much information.
    """
    if outcomes == "click":
        vector = _hom_click_vector
    elif outcomes == "pair":
        vector = _hom_pair_vector
    else:
        raise ConfigError("outcomes must be 'click' or 'pair', got %r"
                          % (outcomes,))

    def dist(n):
        T, R, phi = _tau_at(stack, wavelength_nm, theta_deg, n, polarization,
                            None)
        return vector(T, R, phi)

    return fisher_from_distribution(dist, float(n_s), step)


def fisher_classical(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                     phi_ab: float | None = None,
                     probe: CoherentInput | None = None,
                     polarization: str = "tm", step: float = DEFAULT_NS_STEP
                     ) -> float:
    """Information carried by the coherent probe's two output counters.

    Independent Poissonian outputs admit the closed form
    I = sum_j (d mu_j / d n_s)^2 / mu_j; the means are differentiated by
    the same central difference used elsewhere.  phi_ab overrides the
    probe phase (unit intensities); pass a full CoherentInput via probe
    for anything fancier.
    """
    if probe is None:
        probe = CoherentInput() if phi_ab is None \
            else CoherentInput(phi_ab=float(phi_ab))
    elif phi_ab is not None:
        raise ConfigError("give phi_ab or probe, not both")

    def means(n):
        resp = stack_response(stack, wavelength_nm, theta_deg, n, polarization)
        return coherent_output_means(bs_point(resp), probe)

    mp = means(float(n_s) + step)
    mm = means(float(n_s) - step)
    dmu = [(a - b) / (2.0 * step) for a, b in zip(mp, mm)]
    mid = [0.5 * (a + b) for a, b in zip(mp, mm)]
    return _poisson_fisher_from_means(mid, dmu)


def fisher_classical_counts(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                            probe: CoherentInput | None = None,
                            polarization: str = "tm",
                            step: float = DEFAULT_NS_STEP,
                            l_max: int = POISSON_L_MAX) -> float:
    """Same information computed from the explicit joint count grid.

    Numerically redundant with fisher_classical (the Poisson closed form),
    kept as an independent path for validation and as the building block
    for non-product count distributions such as phase mixtures.
    """
    probe = probe or CoherentInput()

    def dist(n):
        resp = stack_response(stack, wavelength_nm, theta_deg, n, polarization)
        mu1, mu2 = coherent_output_means(bs_point(resp), probe)
        return poisson_pair_grid(mu1, mu2, l_max).ravel()

    return fisher_from_distribution(dist, float(n_s), step)


def mixed_phase_classical_fisher(stack: LayerStack, wavelength_nm, theta_deg,
                                 n_s, probe: CoherentInput | None = None,
                                 polarization: str = "tm",
                                 step: float = DEFAULT_NS_STEP,
                                 l_max: int = POISSON_L_MAX) -> float:
    """Coherent-probe information without a locked phase sign.

    Models a probe whose relative phase is +phi_ab or -phi_ab with equal
    probability on each trial: the outcome distribution is the equal
    mixture of the two joint count grids.  Mixing can only discard
    information, so this never exceeds the phase-locked value.
    """
    probe = probe or CoherentInput()
    flipped = CoherentInput(probe.alpha_sq, probe.beta_sq, -probe.phi_ab)

    def dist(n):
        resp = stack_response(stack, wavelength_nm, theta_deg, n, polarization)
        point = bs_point(resp)
        g1 = poisson_pair_grid(*coherent_output_means(point, probe), l_max)
        g2 = poisson_pair_grid(*coherent_output_means(point, flipped), l_max)
        return (0.5 * (g1 + g2)).ravel()

    return fisher_from_distribution(dist, float(n_s), step)


def precision_bound(info: float) -> float:
    """Single-shot standard-deviation bound 1/sqrt(I); inf when I <= 0."""
    if info <= 0.0:
        return math.inf
    return 1.0 / math.sqrt(info)


def enhancement_ratio(info_hom: float, info_classical: float) -> float:
    """Fractional gain G = (I_pair - I_coherent) / I_coherent.

    G > 0 means the photon-pair probe beats the coherent benchmark;
    G = 0.5 reads as a fifty percent information enhancement.  Where the
    coherent information collapses the ratio diverges and is flagged as
    undefined rather than returned as a huge number.
    """
    if info_classical <= 1e-12:
        raise UndefinedRatioError(
            "coherent-probe information is %r; the enhancement ratio is "
            "undefined at this operating point" % (info_classical,))
    return (info_hom - info_classical) / info_classical


# ---------------------------------------------------------------------------
# information decomposition over (T, R, phi_tr)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionResult:
    """Fisher-information matrix over the splitter parameters.

    matrix[a, b] = sum_outcomes (d P / d tau_a)(d P / d tau_b) / P with
    tau = (T, R, phi_tr), evaluated at the operating point (optionally
    with the phase frozen by phi_tr_assumption).  jacobian holds
    d tau / d n_s from the stack response; contracting the matrix with
    it reproduces the direct information in n_s (chain rule):

        I(n_s) = J . matrix . J
    """

    matrix: np.ndarray
    jacobian: np.ndarray
    contracted: float
    point: BsPoint
    scheme: str
    phi_used: float

    @property
    def i_phase(self) -> float:
        """Information available through the phase channel alone."""
        return float(self.matrix[2, 2])


def _stencil_partials(model, tau, steps):
    """Fourth-order central partial derivatives of a vector model.

    The five-point stencil (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / (12 h)
    keeps truncation error ~h^4, which matters for entries that vanish
    identically at symmetric points (plain second-order differences
    leave a residue well above the verification tolerances there).
    """
    partials = []
    for a in range(3):
        e = np.zeros(3)
        e[a] = steps[a]
        f_m2 = model(*(tau - 2 * e))
        f_m1 = model(*(tau - e))
        f_p1 = model(*(tau + e))
        f_p2 = model(*(tau + 2 * e))
        partials.append((f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2)
                        / (12.0 * steps[a]))
    return partials


def fisher_decomposition(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                         scheme: str = "hom",
                         probe: CoherentInput | None = None,
                         polarization: str = "tm",
                         phi_tr_assumption: float | None = None,
                         tau_step: float = DECOMP_STEP,
                         ns_step: float = DEFAULT_NS_STEP,
                         l_max: int = POISSON_L_MAX) -> DecompositionResult:
    """Resolve the information over the (T, R, phi_tr) channels.

    scheme is "hom" (photon-pair clicks) or "classical" (coherent joint
    counts).  The 3x3 matrix is evaluated at the stack's operating
    point; phi_tr_assumption, when given, replaces the phase coordinate
    of that point (see the module docstring).  The jacobian and the
    contracted scalar always use the actual stack response.
    """
    probe = probe or CoherentInput()
    if scheme == "hom":
        def model(T, R, phi):
            return _hom_click_vector(T, R, phi)
    elif scheme == "classical":
        def model(T, R, phi):
            mu1, mu2 = _coherent_mean_pair(T, R, phi, probe)
            return poisson_pair_grid(mu1, mu2, l_max).ravel()
    else:
        raise ConfigError("scheme must be 'hom' or 'classical', got %r"
                          % (scheme,))

    resp = stack_response(stack, wavelength_nm, theta_deg, n_s, polarization)
    point = bs_point(resp)
    phi_used = point.phi_tr if phi_tr_assumption is None \
        else float(phi_tr_assumption)
    tau = np.array([point.T, point.R, phi_used])

    p0 = model(*tau)
    partials = _stencil_partials(model, tau, [tau_step] * 3)
    alive = p0 > ZERO_PROB_FLOOR
    matrix = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            val = float(np.sum(partials[a][alive] * partials[b][alive]
                               / p0[alive]))
            matrix[a, b] = matrix[b, a] = val

    dT, dR, dphi = response_derivatives(stack, wavelength_nm, theta_deg,
                                        float(n_s), polarization, ns_step)
    jac = np.array([float(dT), float(dR), float(dphi)])
    contracted = float(jac @ matrix @ jac)
    return DecompositionResult(matrix=matrix, jacobian=jac,
                               contracted=contracted, point=point,
                               scheme=scheme, phi_used=phi_used)


# ---------------------------------------------------------------------------
# combined point report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FisherReport:
    """Everything the information analysis produces at one n_s point.

    g is NaN where the coherent information is below the ratio floor
    (the undefined-enhancement window around the dip); g_defined flags
    that case for tabular output.
    """

    n_s: float
    i_hom: float
    i_classical: float
    phi_ab_used: float
    g: float
    g_defined: bool
    decomposition: np.ndarray   # 3x3 over (T, R, phi_tr), HOM scheme
    derivs: tuple[float, float, float]
    precision_hom: float
    precision_classical: float


def fisher_report(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                  phi_ab: float = math.pi / 2.0, polarization: str = "tm",
                  step: float = DEFAULT_NS_STEP) -> FisherReport:
    """Evaluate both schemes, the enhancement and the HOM decomposition."""
    i_h = fisher_hom(stack, wavelength_nm, theta_deg, n_s, polarization, step)
    i_c = fisher_classical(stack, wavelength_nm, theta_deg, n_s,
                           phi_ab=phi_ab, polarization=polarization, step=step)
    try:
        g = enhancement_ratio(i_h, i_c)
        g_defined = True
    except UndefinedRatioError:
        g = math.nan
        g_defined = False
    decomp = fisher_decomposition(stack, wavelength_nm, theta_deg, n_s,
                                  scheme="hom", polarization=polarization,
                                  ns_step=step)
    return FisherReport(
        n_s=float(n_s), i_hom=i_h, i_classical=i_c, phi_ab_used=float(phi_ab),
        g=g, g_defined=g_defined, decomposition=decomp.matrix,
        derivs=tuple(decomp.jacobian), precision_hom=precision_bound(i_h),
        precision_classical=precision_bound(i_c))


# ---------------------------------------------------------------------------
# coherent relative-phase scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseScanResult:
    """Coherent-probe information as a function of the probe phase."""

    phi_ab: np.ndarray
    fisher: np.ndarray
    phi_opt: float
    fisher_opt: float
    grid_step: float


def phi_ab_scan(stack: LayerStack, wavelength_nm, theta_deg, n_s,
                alpha_sq: float = 1.0, beta_sq: float = 1.0,
                n_points: int = 721, polarization: str = "tm",
                phi_tr_assumption: float | None = None,
                step: float = DEFAULT_NS_STEP, refine: bool = True
                ) -> PhaseScanResult:
    """Scan the coherent probe's relative phase over [-pi, pi].

    For each phase on the half-open grid [-pi, pi) the closed-form
    Poisson information is evaluated.  The returned phi_opt is the grid
    maximizer, optionally polished by one parabolic fit through the
    maximum and its two neighbours (kept inside the bracketing
    interval).
    """
    grid = np.linspace(-np.pi, np.pi, int(n_points), endpoint=False)

    def tr_at(n):
        return _tau_at(stack, wavelength_nm, theta_deg, n, polarization,
                       phi_tr_assumption)

    tau_p = tr_at(float(n_s) + step)
    tau_m = tr_at(float(n_s) - step)

    def info(phi_ab_value: float) -> float:
        probe = CoherentInput(alpha_sq, beta_sq, float(phi_ab_value))
        mu_p = _coherent_mean_pair(*tau_p, probe)
        mu_m = _coherent_mean_pair(*tau_m, probe)
        dmu = [(a - b) / (2.0 * step) for a, b in zip(mu_p, mu_m)]
        mid = [0.5 * (a + b) for a, b in zip(mu_p, mu_m)]
        return _poisson_fisher_from_means(mid, dmu)

    values = np.array([info(p) for p in grid])
    k = int(np.argmax(values))
    phi_opt = float(grid[k])
    fisher_opt = float(values[k])
    if refine and 0 < k < len(grid) - 1:
        y0, y1, y2 = values[k - 1], values[k], values[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0.0:  # proper local maximum
            shift = 0.5 * (y0 - y2) / denom
            if abs(shift) <= 1.0:
                h = grid[1] - grid[0]
                phi_ref = float(grid[k] + shift * h)
                f_ref = info(phi_ref)
                if f_ref >= fisher_opt:
                    phi_opt, fisher_opt = phi_ref, f_ref
    return PhaseScanResult(phi_ab=grid, fisher=values, phi_opt=phi_opt,
                           fisher_opt=fisher_opt,
                           grid_step=float(grid[1] - grid[0]))


# ---------------------------------------------------------------------------
# uncertainty budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetSource:
    """One instrumental disturbance: its size and reference sensitivity.

    name/kind identify the mechanism; s is the one-sigma disturbance in
    `unit`; divisor divides the resulting index error (e.g. sqrt(N) for
    an averaged quantity); reference_c / reference_sigma are externally
    quoted sensitivity and index-error values used for cross-checks,
    NaN when absent.
    """

    name: str
    kind: str
    s: float
    unit: str
    divisor: float = 1.0
    reference_c: float = math.nan
    reference_sigma: float = math.nan


@dataclass(frozen=True)
class BudgetRow:
    """Computed budget line for one source."""

    source: BudgetSource
    c: float          # |dS/dx| / |dS/dn_s|, equivalent RIU per unit x
    sigma: float      # c * s / divisor, equivalent index error


@dataclass(frozen=True)
class BudgetReport:
    rows: tuple[BudgetRow, ...]
    signal_slope: float   # dS/dn_s at the operating point
    n_analyte: float
    wavelength_nm: float
    theta_deg: float

    def total_sigma(self) -> float:
        """Quadrature sum of the per-source index errors."""
        return math.sqrt(sum(r.sigma ** 2 for r in self.rows))


_BUDGET_KINDS = ("incidence_angle", "prism_index", "polarization_angle",
                 "film_thickness")


def load_budget_sources(path=None) -> tuple[BudgetSource, ...]:
    """Budget sources from JSON; the packaged defaults when path is None."""
    if path is None:
        text = (resources.files(__package__) / "data"
                / _BUDGET_RESOURCE).read_text()
    else:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    try:
        raw = json.loads(text)
        rows = []
        for entry in raw["sources"]:
            kind = entry["kind"]
            if kind not in _BUDGET_KINDS:
                raise ConfigError("unknown budget source kind %r" % (kind,))
            rows.append(BudgetSource(
                name=entry["name"], kind=kind, s=float(entry["s"]),
                unit=entry["unit"], divisor=float(entry.get("divisor", 1.0)),
                reference_c=float(entry.get("reference_c", math.nan)),
                reference_sigma=float(entry.get("reference_sigma", math.nan)),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("malformed budget sources: %s" % (exc,)) from exc
    return tuple(rows)


def _coincidence_signal(stack, wavelength_nm, theta_deg, n_s, polarization):
    resp = stack_response(stack, wavelength_nm, theta_deg, n_s, polarization)
    point = bs_point(resp)
    return point.T ** 2 + point.R ** 2 \
        + 2.0 * point.T * point.R * math.cos(2.0 * point.phi_tr)


def _with_prism_index(stack: LayerStack, n_prism: float) -> LayerStack:
    from dataclasses import replace as _replace
    prism = constant_material("prism", n_prism)
    layers = list(stack.layers)
    layers[0] = _replace(layers[0], material=prism)
    layers[-1] = _replace(layers[-1], material=prism)
    return _replace(stack, layers=tuple(layers))


def uncertainty_budget(stack: LayerStack, wavelength_nm: float = 800.0,
                       theta_deg: float = 70.0, n_analyte: float = 1.32,
                       sources: tuple[BudgetSource, ...] | None = None,
                       polarization: str = "tm",
                       step: float = BUDGET_STEP) -> BudgetReport:
    """Convert instrumental disturbances into equivalent index errors.

    The monitored signal S is the two-photon coincidence probability.
    For each source the sensitivity c = |dS/dx| / |dS/dn_s| rescales the
    disturbance into the index error it masquerades as; sigma = c s /
    divisor.  All derivatives are central differences with `step` in
    the variable's own unit (degrees, RIU, nm).

    Per-kind details: the polarization model mixes the TM and TE
    coincidence signals by intensity, S(gamma) = cos^2(gamma) S_tm +
    sin^2(gamma) S_te; since dS/dgamma vanishes at gamma = 0 exactly,
    the derivative is evaluated at the stated offset gamma = s.  Film
    thickness perturbs both films together (they are deposited by the
    same process); its c is reported per meter.
    """
    sources = sources if sources is not None else load_budget_sources()

    def signal(n_s, stk=None, theta=theta_deg):
        return _coincidence_signal(stk if stk is not None else stack,
                                   wavelength_nm, theta, n_s, polarization)

    slope = (signal(n_analyte + step) - signal(n_analyte - step)) / (2 * step)
    if abs(slope) < 1e-12:
        raise UndefinedRatioError(
            "degenerate operating point: the coincidence signal has no "
            "index slope at n_s=%r (budget undefined at the dip)"
            % (n_analyte,))

    rows = []
    for src in sources:
        if src.kind == "incidence_angle":
            d = (signal(n_analyte, theta=theta_deg + step)
                 - signal(n_analyte, theta=theta_deg - step)) / (2 * step)
        elif src.kind == "prism_index":
            n0 = stack.layers[0].material.index(wavelength_nm).real
            d = (signal(n_analyte, stk=_with_prism_index(stack, n0 + step))
                 - signal(n_analyte, stk=_with_prism_index(stack, n0 - step))
                 ) / (2 * step)
        elif src.kind == "polarization_angle":
            s_tm = _coincidence_signal(stack, wavelength_nm, theta_deg,
                                       n_analyte, "tm")
            s_te = _coincidence_signal(stack, wavelength_nm, theta_deg,
                                       n_analyte, "te")

            def mixed(gamma_deg):
                g = math.radians(gamma_deg)
                return math.cos(g) ** 2 * s_tm + math.sin(g) ** 2 * s_te

            gamma0 = src.s  # evaluate where the offset actually sits
            d = (mixed(gamma0 + step) - mixed(gamma0 - step)) / (2 * step)
        elif src.kind == "film_thickness":
            d_m = float(stack.layers[1].thickness_nm)
            d_s = float(stack.layers[2].thickness_nm)

            def at_film(d_nm):
                stk = stack.with_thickness({1: d_nm, 2: d_s, 3: d_nm})
                return signal(n_analyte, stk=stk)

            per_nm = (at_film(d_m + step) - at_film(d_m - step)) / (2 * step)
            d = per_nm * 1e9  # report per meter to match SI uncertainty
        else:  # pragma: no cover - guarded at load time
            raise ConfigError("unknown budget source kind %r" % (src.kind,))
        c = abs(d) / abs(slope)
        rows.append(BudgetRow(source=src, c=c, sigma=c * src.s / src.divisor))

    return BudgetReport(rows=tuple(rows), signal_slope=float(slope),
                        n_analyte=float(n_analyte),
                        wavelength_nm=float(wavelength_nm),
                        theta_deg=float(theta_deg))
