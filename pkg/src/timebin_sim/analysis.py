"""Time-bin structure of the output pulse and two-mode Wigner/Bell analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import EmptyFieldError, InvalidParameterError
from .propagation import FieldState, intensity

PEAK_THRESHOLD = 0.01
SMOOTHING = 5
EDGE_DB = 60.0
WIGNER_SCALE = 4.0 / math.pi**2
BELL_BOUND = 2.0


@dataclass(frozen=True)
class BinDecomposition:
    boundary_time: float
    p_early: float
    p_late: float
    leakage: float
    n_peaks: int
    peak_times: tuple
    separation: float
    entropy: float
    concurrence: float

    def to_dict(self) -> dict:
        return {
            "boundary_time_ns": self.boundary_time * 1e9,
            "p_early": self.p_early,
            "p_late": self.p_late,
            "leakage": self.leakage,
            "n_peaks": self.n_peaks,
            "peak_times_ns": [t * 1e9 for t in self.peak_times],
            "separation_ns": self.separation * 1e9,
            "entropy": self.entropy,
            "concurrence": self.concurrence,
        }


def bin_entropy(p_early: float, p_late: float) -> float:
    """Von Neumann entropy (bits) of one bin after tracing out the other."""
    return -sum(p * math.log2(p) for p in (p_early, p_late) if p > 0)


def bin_concurrence(p_early: float, p_late: float) -> float:
    return 2.0 * math.sqrt(max(p_early * p_late, 0.0))


def _smooth(signal, width):
    if width <= 1:
        return signal
    return np.convolve(signal, np.ones(width) / width, mode="same")


def decompose_bins(state: FieldState, threshold: float = PEAK_THRESHOLD, smoothing: int = SMOOTHING) -> BinDecomposition:
    """Split the field-1 output into an early and a late time bin.

    Peaks are local maxima of the smoothed field-1 intensity above
    ``threshold`` times its maximum.  The boundary sits at the intensity
    minimum between the two highest peaks; with fewer than two peaks
    everything is the early bin and the boundary is the trailing -60 dB
    edge.
    """
    i1, i2 = intensity(state)
    total1 = float(i1.sum())
    if total1 <= 0:
        raise EmptyFieldError("field 1 carries no energy")
    leakage = float(i2.sum()) / (total1 + float(i2.sum()))
    smooth = _smooth(i1, smoothing)
    peaks, _ = find_peaks(smooth, height=threshold * smooth.max())
    if peaks.size == 0:
        peaks = np.array([int(np.argmax(smooth))])
    t = state.times
    if peaks.size < 2:
        above = np.nonzero(i1 >= i1.max() * 10 ** (-EDGE_DB / 10))[0]
        edge = int(above[-1])
        return BinDecomposition(
            boundary_time=float(t[edge]), p_early=1.0, p_late=0.0, leakage=leakage,
            n_peaks=int(peaks.size), peak_times=tuple(float(t[k]) for k in peaks),
            separation=0.0, entropy=0.0, concurrence=0.0,
        )
    first, second = sorted(peaks[np.argsort(smooth[peaks], kind="stable")[-2:]])
    cut = first + int(np.argmin(smooth[first:second + 1]))
    p_early = float(i1[:cut].sum()) / total1
    p_late = 1.0 - p_early
    return BinDecomposition(
        boundary_time=float(t[cut]), p_early=p_early, p_late=p_late, leakage=leakage,
        n_peaks=int(peaks.size), peak_times=tuple(float(t[k]) for k in peaks),
        separation=float(t[second] - t[first]),
        entropy=bin_entropy(p_early, p_late), concurrence=bin_concurrence(p_early, p_late),
    )


def wigner(alpha1, alpha2):
    """Wigner function of one photon shared by two modes with zero relative phase.

    Accepts scalars or broadcastable arrays of complex amplitudes.
    """
    a1 = np.asarray(alpha1, dtype=complex)
    a2 = np.asarray(alpha2, dtype=complex)
    r1, r2 = np.abs(a1) ** 2, np.abs(a2) ** 2
    w = WIGNER_SCALE * (2.0 * np.abs(a1 + a2) ** 2 - 1.0) * np.exp(-2.0 * (r1 + r2))
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class BellResult:
    b: float
    alpha1: complex
    alpha2: complex

    @property
    def violated(self) -> bool:
        return abs(self.b) > BELL_BOUND

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "alpha1": [self.alpha1.real, self.alpha1.imag],
            "alpha2": [self.alpha2.real, self.alpha2.imag],
            "violated": self.violated,
        }


def _bell_values(alpha1, alpha2):
    # single-mode terms summed first so the result is symmetric bit for bit
    single = wigner(alpha1, 0) + wigner(0, alpha2)
    return math.pi**2 / 4.0 * (wigner(0, 0) + single - wigner(alpha1, alpha2))


def bell_combination(alpha1: complex, alpha2: complex) -> BellResult:
    """(pi^2/4) [W(0,0) + W(a1,0) + W(0,a2) - W(a1,a2)]; local theories keep it in [-2, 2]."""
    return BellResult(float(_bell_values(alpha1, alpha2)), complex(alpha1), complex(alpha2))


@dataclass(frozen=True)
class ScanGrid:
    start: float = 0.0
    stop: float = 1.0
    step: float = 0.01
    phases: tuple = (0.0,)

    def __post_init__(self):
        if not self.step > 0 or self.stop < self.start:
            raise InvalidParameterError("scan grid needs step > 0 and stop >= start")
        if not self.phases:
            raise InvalidParameterError("scan grid needs at least one phase")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True, eq=False)
class BellScan:
    extremum: BellResult
    x1: np.ndarray
    x2: np.ndarray
    phase: np.ndarray
    b: np.ndarray

    @property
    def is_complex(self) -> bool:
        return bool(np.any(self.phase != 0))

    def rows(self):
        """(x1, x2, B) rows, plus phase when the scan is complex."""
        if self.is_complex:
            return zip(self.x1, self.x2, self.phase, self.b)
        return zip(self.x1, self.x2, self.b)


def bell_scan(grid: ScanGrid = ScanGrid()) -> BellScan:
    """Evaluate the Bell combination over a grid of real quadratures.

    ``alpha1 = x1`` and ``alpha2 = x2 * exp(i phase)``; the default single
    zero phase keeps both amplitudes real.  The extremum is the point of
    largest |B|, ties going to the lexicographically smallest
    ``(phase, x1, x2)``.
    """
    xs = grid.values()
    phase, x1, x2 = np.meshgrid(np.asarray(grid.phases, dtype=float), xs, xs, indexing="ij")
    phase, x1, x2 = phase.ravel(), x1.ravel(), x2.ravel()
    b = _bell_values(x1 + 0j, x2 * np.exp(1j * phase))
    k = int(np.argmax(np.abs(b)))
    extremum = BellResult(float(b[k]), complex(x1[k]), complex(x2[k] * np.exp(1j * phase[k])))
    return BellScan(extremum, x1, x2, phase, np.asarray(b, dtype=float))
