"""Physical inputs, derived propagation coefficients and regime checks.

Everything is in SI units: rates in rad/s, lengths in m, times in s.
Each field's group velocity may be given directly or through its
``g_i^2 N`` coupling product; the velocity form is canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import InvalidParameterError

C_LIGHT = 299_792_458.0

PASS, WARN, FAIL = "pass", "warn", "fail"
_SEVERITY = {PASS: 0, WARN: 1, FAIL: 2}


@dataclass(frozen=True)
class PhysicalParams:
    gamma: float
    omega: float
    density: float
    length: float
    wavelength: float
    pulse_duration: float
    v1: float | None = None
    v2: float | None = None
    coupling_1: float | None = None
    coupling_2: float | None = None
    c: float = C_LIGHT

    def __post_init__(self):
        for name in ("gamma", "omega", "density", "length", "wavelength", "pulse_duration", "c"):
            _require_positive(name, getattr(self, name))
        for i in (1, 2):
            v = getattr(self, f"v{i}")
            g = getattr(self, f"coupling_{i}")
            if (v is None) == (g is None):
                raise InvalidParameterError(
                    f"field {i}: give exactly one of v{i} or coupling_{i}"
                )
            if v is not None:
                _require_positive(f"v{i}", v)
                if v >= self.c:
                    raise InvalidParameterError(f"v{i}={v} must be below c")
            else:
                _require_positive(f"coupling_{i}", g)
                if self.c * self.omega**2 / g >= self.c:
                    raise InvalidParameterError(f"coupling_{i} gives a group velocity >= c")

    def group_velocity(self, i: int) -> float:
        v = getattr(self, f"v{i}")
        if v is not None:
            return v
        return self.c * self.omega**2 / getattr(self, f"coupling_{i}")

    def coupling(self, i: int) -> float:
        """The ``g_i^2 N`` product, converted from the velocity if needed."""
        g = getattr(self, f"coupling_{i}")
        if g is not None:
            return g
        return self.c * self.omega**2 / getattr(self, f"v{i}")

    def with_couplings(self) -> PhysicalParams:
        """Same medium, expressed through coupling products.

        Varying ``omega`` on the result changes both velocities and the
        parametric coupling, as a change in drive intensity would.
        """
        return replace(self, v1=None, v2=None, coupling_1=self.coupling(1), coupling_2=self.coupling(2))


def _require_positive(name, value):
    if value is None or not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class DerivedQuantities:
    v1: float
    v2: float
    beta: float
    k1: float
    k2: float
    sigma: float
    alpha: float
    eit_width: float
    walkoff_time: float
    length: float
    gamma: float

    @property
    def beta_length(self) -> float:
        return self.beta * self.length

    def velocity(self, i: int) -> float:
        return self.v1 if i == 1 else self.v2

    def absorption(self, i: int) -> float:
        return self.k1 if i == 1 else self.k2


def derive(params: PhysicalParams) -> DerivedQuantities:
    """Compute velocities, coupling, absorption and bandwidth figures."""
    c, omega, gamma = params.c, params.omega, params.gamma
    g1, g2 = params.coupling(1), params.coupling(2)
    v1, v2 = params.group_velocity(1), params.group_velocity(2)
    # g1 g2 N = sqrt(g1^2 N * g2^2 N)
    beta = math.sqrt(g1 * g2) / (c * omega)
    k1 = g1 * gamma / (c * omega**2)
    k2 = g2 * gamma / (c * omega**2)
    sigma = 3.0 / (4.0 * math.pi) * params.wavelength**2
    alpha = params.density * sigma * params.length
    eit_width = omega**2 / gamma / math.sqrt(alpha)
    walkoff = params.length * abs(v1 - v2) / (v1 * v2)
    return DerivedQuantities(
        v1=v1, v2=v2, beta=beta, k1=k1, k2=k2, sigma=sigma, alpha=alpha,
        eit_width=eit_width, walkoff_time=walkoff, length=params.length, gamma=gamma,
    )


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    ratio: float
    status: str


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[Check, ...]
    strictness: float
    overall: str = field(init=False)

    def __post_init__(self):
        worst = max((c.status for c in self.checks), key=_SEVERITY.__getitem__, default=PASS)
        object.__setattr__(self, "overall", worst)

    def by_name(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "strictness": self.strictness,
            "overall": self.overall,
            "checks": [
                {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "relation": c.relation,
                 "ratio": c.ratio, "status": c.status}
                for c in self.checks
            ],
        }


def _much_greater(name, lhs, rhs, strictness):
    ratio = lhs / rhs
    status = PASS if ratio >= strictness else WARN if ratio >= 1.0 else FAIL
    return Check(name, lhs, rhs, ">>", ratio, status)


def _much_less(name, lhs, rhs, strictness):
    ratio = rhs / lhs if lhs > 0 else math.inf
    status = PASS if ratio >= strictness else WARN if ratio >= 1.0 else FAIL
    return Check(name, lhs, rhs, "<<", ratio, status)


def validate(derived: DerivedQuantities, params: PhysicalParams, strictness: float = 3.0) -> ConstraintReport:
    """Check the EIT operating regime.

    "Much greater/less" relations pass when the margin is at least
    ``strictness``, warn when only the bare inequality holds, and fail
    otherwise.  Strict inequalities are pass/fail.
    """
    if not strictness > 0:
        raise InvalidParameterError("strictness must be positive")
    alpha = derived.alpha
    T, L = params.pulse_duration, derived.length
    checks = [_much_greater("omega_vs_alpha", (params.omega / params.gamma) ** 2, alpha, strictness)]
    for i in (1, 2):
        fill = T * derived.velocity(i) / L
        checks.append(_much_greater(f"pulse_fits_window_i{i}", fill, 1.0 / math.sqrt(alpha), strictness))
    for i in (1, 2):
        fill = T * derived.velocity(i) / L
        checks.append(Check(f"pulse_shorter_than_medium_i{i}", fill, 1.0, "<", 1.0 / fill,
                            PASS if fill < 1.0 else FAIL))
    for i in (1, 2):
        checks.append(_much_less(f"absorption_small_i{i}", derived.absorption(i) * L, 1.0, strictness))
    bandwidth = derived.eit_width * T
    checks.append(Check("eit_bandwidth", bandwidth, 1.0, ">=", bandwidth,
                        PASS if bandwidth >= 1.0 else FAIL))
    return ConstraintReport(tuple(checks), strictness)


def paper_rb85(pulse_duration: float = 2e-9) -> PhysicalParams:
    """Cold Rb-85 estimate: 100 um trap, 1e12 cm^-3, Omega = 10 Gamma."""
    gamma = 2 * math.pi * 3e6
    return PhysicalParams(
        gamma=gamma,
        omega=10 * gamma,
        density=1e18,
        length=100e-6,
        wavelength=0.8e-6,
        pulse_duration=pulse_duration,
        v1=3e3,
        v2=1e4,
    )
