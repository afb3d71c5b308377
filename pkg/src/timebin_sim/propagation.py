"""Propagation of the two coupled field envelopes through the medium.

Three independent evaluators share one set of data types:

* ``solve_numeric``  -- split-step integration in z (the reference),
* ``solve_analytic`` -- the Bessel-kernel integral representation,
* ``solve_closed_form`` -- the equal-velocity two-mode rotation.

Envelopes live on a uniform grid of retarded time ``tau = t - z/v_fast``,
where ``v_fast`` is the larger group velocity.  In that frame the fast
field does not move and the slow one drifts towards later ``tau`` by at
most the walk-off time, so the window stays bounded.  States report lab
time unless the grid asks for the co-moving frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import (
    InvalidParameterError,
    QuadratureError,
    StepTooCoarseError,
    UnequalVelocitiesError,
    WindowOverflowError,
)
from .params import DerivedQuantities
from .special import bessel_j0, bessel_j1

EDGE_TOLERANCE = 1e-6
MAX_ROTATION_PER_STEP = 0.5
DEFAULT_ROTATION_PER_STEP = 0.05
DEFAULT_MIN_STEPS = 200
DEFAULT_N_T = 4096
DEFAULT_PADDING = 5.0

LAB, COMOVING = "lab", "comoving"
GAUSSIAN, SAMPLED = "gaussian", "sampled"
NUMERIC, ANALYTIC, CLOSED_FORM = "numeric", "analytic", "closed-form"


@dataclass(frozen=True, eq=False)
class InputPulse:
    """Temporal amplitude of the photon entering at z = 0.

    Use :meth:`gaussian` or :meth:`sampled` rather than the constructor.
    """

    shape: str
    channel: int = 1
    duration: float | None = None
    amplitude: complex = 1.0
    center: float = 0.0
    times: np.ndarray | None = None
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.channel not in (1, 2):
            raise InvalidParameterError(f"channel must be 1 or 2, got {self.channel}")
        if self.shape == GAUSSIAN:
            if self.duration is None or not self.duration > 0:
                raise InvalidParameterError("gaussian pulse needs a positive duration")
        elif self.shape == SAMPLED:
            t = np.asarray(self.times, dtype=float)
            y = np.asarray(self.samples, dtype=complex)
            if t.ndim != 1 or t.shape != y.shape or t.size < 4:
                raise InvalidParameterError("sampled pulse needs matching 1-D arrays of >= 4 points")
            if np.any(np.diff(t) <= 0):
                raise InvalidParameterError("sample times must be strictly increasing")
            norm = trapezoid(np.abs(y) ** 2, t)
            if not np.isfinite(norm):
                raise InvalidParameterError("sampled pulse must have a finite L2 norm")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "samples", y)
            object.__setattr__(self, "_re", CubicSpline(t, y.real, extrapolate=False))
            object.__setattr__(self, "_im", CubicSpline(t, y.imag, extrapolate=False))
        else:
            raise InvalidParameterError(f"unknown pulse shape {self.shape!r}")

    @classmethod
    def gaussian(cls, duration, channel=1, amplitude=1.0, center=0.0):
        """``amplitude * exp(-2 (t - center)^2 / duration^2)``."""
        return cls(GAUSSIAN, channel=channel, duration=duration, amplitude=amplitude, center=center)

    @classmethod
    def sampled(cls, times, samples, channel=1):
        """Cubic interpolation through the samples, zero outside them."""
        return cls(SAMPLED, channel=channel, times=times, samples=samples)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape == GAUSSIAN:
            return self.amplitude * np.exp(-2.0 * ((t - self.center) / self.duration) ** 2) + 0j
        re = np.nan_to_num(self._re(t), nan=0.0)
        im = np.nan_to_num(self._im(t), nan=0.0)
        return re + 1j * im

    def span(self, padding=DEFAULT_PADDING):
        if self.shape == GAUSSIAN:
            return self.center - padding * self.duration, self.center + padding * self.duration
        return float(self.times[0]), float(self.times[-1])

    def scaled(self, factor):
        if self.shape == GAUSSIAN:
            return InputPulse.gaussian(self.duration, self.channel, self.amplitude * factor, self.center)
        return InputPulse.sampled(self.times, self.samples * factor, self.channel)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform retarded-time window.  Times equal lab times at z = 0."""

    t_min: float
    t_max: float
    n_t: int = DEFAULT_N_T
    frame: str = LAB

    def __post_init__(self):
        if self.n_t < 2 or not self.t_max > self.t_min:
            raise InvalidParameterError("time grid needs n_t >= 2 and t_max > t_min")
        if self.frame not in (LAB, COMOVING):
            raise InvalidParameterError(f"unknown frame {self.frame!r}")

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @classmethod
    def for_pulse(cls, derived, pulse, n_t=DEFAULT_N_T, padding=DEFAULT_PADDING, frame=LAB):
        lo, hi = pulse.span(padding)
        return cls(lo, hi + derived.walkoff_time, n_t, frame)

    def check_covers(self, derived, pulse):
        if pulse.shape == GAUSSIAN:
            lo, hi = pulse.span(4.0)
        else:
            lo, hi = pulse.span()
        if self.t_min > lo or self.t_max < hi + derived.walkoff_time:
            raise WindowOverflowError(
                f"window [{self.t_min:.4g}, {self.t_max:.4g}] s does not hold the pulse "
                f"[{lo:.4g}, {hi:.4g}] s plus walk-off {derived.walkoff_time:.4g} s"
            )

    def refined(self, factor: int) -> TimeGrid:
        return TimeGrid(self.t_min, self.t_max, (self.n_t - 1) * factor + 1, self.frame)


@dataclass(frozen=True, eq=False)
class FieldState:
    z: float
    times: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.e1) == len(self.e2)):
            raise InvalidParameterError("field arrays must share the grid length")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def edge_ratio(self) -> float:
        """Largest edge amplitude relative to the peak amplitude."""
        peak = max(np.abs(self.e1).max(), np.abs(self.e2).max())
        if peak == 0:
            return 0.0
        edges = np.abs([self.e1[0], self.e1[-1], self.e2[0], self.e2[-1]])
        return float(edges.max() / peak)

    def flux(self) -> float:
        i1, i2 = intensity(self)
        return float(np.sum(i1 + i2) * self.dt)


def intensity(state: FieldState):
    """Pointwise |e1|^2 and |e2|^2."""
    return np.abs(state.e1) ** 2, np.abs(state.e2) ** 2


@dataclass(frozen=True, eq=False)
class PropagationResult:
    states: tuple
    flux: np.ndarray
    method: str
    steps: int
    dz: float
    dt: float

    @property
    def output(self) -> FieldState:
        return self.states[-1]

    def at(self, z: float) -> FieldState:
        for state in self.states:
            if math.isclose(state.z, z, rel_tol=1e-12, abs_tol=1e-18):
                return state
        raise KeyError(z)

    def flux_drift(self) -> float:
        return float(np.max(np.abs(self.flux - self.flux[0])) / self.flux[0])


def _fast_velocity(derived):
    return max(derived.v1, derived.v2)


def _state(derived, grid, z, e1, e2):
    times = grid.times
    if grid.frame == LAB:
        times = times + z / _fast_velocity(derived)
    return FieldState(z, times, e1, e2)


def default_steps(derived: DerivedQuantities) -> int:
    """Enough steps for a 0.05 rad coupling rotation and at least 200 slabs."""
    return max(DEFAULT_MIN_STEPS, math.ceil(derived.beta_length / DEFAULT_ROTATION_PER_STEP))


def _rotation_angle(beta_dz, coupling):
    if coupling == "exact":
        return beta_dz
    if coupling == "cayley":
        # (1 + i h X/2)^-1 (1 - i h X/2) is a rotation by 2 atan(h/2)
        return 2.0 * math.atan(0.5 * beta_dz)
    raise InvalidParameterError(f"unknown coupling step {coupling!r}")


def solve_numeric(
    derived: DerivedQuantities,
    pulse: InputPulse,
    grid: TimeGrid,
    n_z: int | None = None,
    snapshots: Sequence[float] = (),
    coupling: str = "cayley",
) -> PropagationResult:
    """Integrate the coupled envelopes from z = 0 to z = L.

    Strang splitting per slab: half advection, coupling, half advection.
    Advection is an exact spectral shift of the slow field on the periodic
    grid.  The coupling step is unitary; ``"cayley"`` (default) is the
    implicit-midpoint rotation and is second order, ``"exact"`` uses
    cos/sin of beta*dz and is exact whenever both fields move together.

    Raises WindowOverflowError when either field reaches the window edge
    and StepTooCoarseError when beta*dz exceeds 0.5 rad.
    """
    length = derived.length
    n_z = default_steps(derived) if n_z is None else int(n_z)
    if n_z < 1:
        raise InvalidParameterError("n_z must be >= 1")
    dz_nominal = length / n_z
    if derived.beta * dz_nominal > MAX_ROTATION_PER_STEP:
        raise StepTooCoarseError(
            f"beta*dz = {derived.beta * dz_nominal:.3g} rad exceeds {MAX_ROTATION_PER_STEP}; raise n_z"
        )
    grid.check_covers(derived, pulse)

    stops = sorted({0.0, length, *(float(z) for z in snapshots)})
    if stops[0] < 0 or stops[-1] > length:
        raise InvalidParameterError("snapshots must lie in [0, L]")

    fields = np.zeros((2, grid.n_t), dtype=complex)
    fields[pulse.channel - 1] = pulse(grid.times)
    v_fast = _fast_velocity(derived)
    delays = np.array([1.0 / derived.v1 - 1.0 / v_fast, 1.0 / derived.v2 - 1.0 / v_fast])
    omega = 2.0 * np.pi * np.fft.fftfreq(grid.n_t, grid.dt)

    def advect(h):
        for k in (0, 1):
            if delays[k] != 0.0:
                spectrum = np.fft.fft(fields[k]) * np.exp(-1j * omega * delays[k] * h)
                fields[k] = np.fft.ifft(spectrum)

    def check_edges(z):
        state = FieldState(z, grid.times, fields[0], fields[1])
        if state.edge_ratio() > EDGE_TOLERANCE:
            raise WindowOverflowError(
                f"field amplitude at the window edge is {state.edge_ratio():.3g} of peak at z={z:.4g} m"
            )

    check_edges(0.0)
    states = [_state(derived, grid, 0.0, fields[0].copy(), fields[1].copy())]
    steps = 0
    z = 0.0
    for z_next in stops[1:]:
        span = z_next - z
        n_seg = max(1, math.ceil(span / dz_nominal - 1e-9))
        h = span / n_seg
        phi = _rotation_angle(derived.beta * h, coupling)
        c, s = math.cos(phi), math.sin(phi)
        for _ in range(n_seg):
            advect(0.5 * h)
            a, b = fields[0].copy(), fields[1]
            fields[0] = c * a - 1j * s * b
            fields[1] = c * b - 1j * s * a
            advect(0.5 * h)
            steps += 1
            check_edges(z)
        z = z_next
        states.append(_state(derived, grid, z, fields[0].copy(), fields[1].copy()))

    flux = np.array([s.flux() for s in states])
    return PropagationResult(tuple(states), flux, NUMERIC, steps, dz_nominal, grid.dt)


def _gauss_legendre_panels(a, b, panels, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def solve_analytic(
    derived: DerivedQuantities,
    pulse: InputPulse,
    grid: TimeGrid,
    z: float,
    tol: float = 1e-8,
    order: int = 16,
    max_panels: int = 4096,
) -> FieldState:
    """Evaluate the Bessel-kernel solution at distance ``z``.

    For output field i fed by input amplitudes a_i, a_j at z = 0::

        e_i(z,t) = a_i(t - z/v_i)
                   + int_0^z dx [ a_i(s) dJ0(psi)/dz - i beta a_j(s) J0(psi) ]
        s   = t - z/v_i - (v_i - v_j)/(v_i v_j) * (z - x)
        psi = 2 beta sqrt(x (z - x))

    with dJ0/dz = -beta J1(psi) sqrt(x/(z-x)).  Substituting
    x = z sin^2(theta) removes the 1/sqrt(z-x) endpoint singularity; the
    theta integral uses composite Gauss-Legendre with the panel count
    doubled until the relative change drops below ``tol``.
    """
    if not 0.0 <= z <= derived.length * (1 + 1e-12):
        raise InvalidParameterError(f"z={z} outside [0, L]")
    tau = grid.times
    t = tau + z / _fast_velocity(derived)
    v = (derived.v1, derived.v2)
    out = [np.zeros(grid.n_t, dtype=complex), np.zeros(grid.n_t, dtype=complex)]
    i = pulse.channel - 1
    out[i] = pulse(t - z / v[i])
    if z == 0.0 or derived.beta == 0.0:
        return _state(derived, grid, z, out[0], out[1])

    beta = derived.beta

    def integral(target, panels):
        j = 1 - target
        base = t - z / v[target]
        skew = (v[target] - v[j]) / (v[target] * v[j])
        theta, w = _gauss_legendre_panels(0.0, 0.5 * math.pi, panels, order)
        sin2, cos2 = np.sin(theta) ** 2, np.cos(theta) ** 2
        psi = beta * z * np.sin(2.0 * theta)
        if target == i:
            kernel = -2.0 * beta * z * bessel_j1(psi) * sin2
        else:
            kernel = -1j * beta * z * np.sin(2.0 * theta) * bessel_j0(psi)
        shifts = skew * z * cos2
        acc = np.zeros(grid.n_t, dtype=complex)
        for start in range(0, theta.size, 256):
            sl = slice(start, start + 256)
            args = base[None, :] - shifts[sl, None]
            acc += (w[sl] * kernel[sl]) @ pulse(args)
        return acc

    for target in (0, 1):
        panels = 4
        previous = integral(target, panels)
        while True:
            panels *= 2
            if panels > max_panels:
                raise QuadratureError(f"kernel quadrature did not reach tol={tol} with {max_panels} panels")
            current = integral(target, panels)
            scale = max(np.linalg.norm(current), np.linalg.norm(out[i]))
            if np.linalg.norm(current - previous) <= tol * scale:
                break
            previous = current
        out[target] = out[target] + current
    return _state(derived, grid, z, out[0], out[1])


def solve_closed_form(derived: DerivedQuantities, pulse: InputPulse, grid: TimeGrid, z: float) -> FieldState:
    """Equal-velocity rotation: e_i = a_i(tau) cos(beta z) - i a_j(tau) sin(beta z)."""
    if not math.isclose(derived.v1, derived.v2, rel_tol=1e-12):
        raise UnequalVelocitiesError(
            f"closed form needs v1 == v2 (got {derived.v1:.6g}, {derived.v2:.6g} m/s)"
        )
    a = np.zeros((2, grid.n_t), dtype=complex)
    a[pulse.channel - 1] = pulse(grid.times)
    c, s = math.cos(derived.beta * z), math.sin(derived.beta * z)
    e1 = c * a[0] - 1j * s * a[1]
    e2 = c * a[1] - 1j * s * a[0]
    return _state(derived, grid, z, e1, e2)


def relative_l2(state: FieldState, reference: FieldState) -> float:
    """Joint L2 error of both envelopes relative to the reference norm."""
    num = np.sum(np.abs(state.e1 - reference.e1) ** 2 + np.abs(state.e2 - reference.e2) ** 2)
    den = np.sum(np.abs(reference.e1) ** 2 + np.abs(reference.e2) ** 2)
    return float(np.sqrt(num / den))
