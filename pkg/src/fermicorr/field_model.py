"""Cross-correlation kernels of a quasi-monochromatic, spin-polarized chaotic beam.

Lineshape convention
--------------------
For a Gaussian energy spectrum the degree of coherence between two spacetime
points depends only on the effective delay

    tau = (t2 - t1) - axis . (r2 - r1) / v

(points on the same wavefront moving at group speed ``v`` are fully coherent),
and is taken to be

    gamma(tau) = exp(-i omega0 tau) * exp(-pi tau**2 / (2 Tc**2)).

The width is fixed so that the integral of ``|gamma(tau)|**2`` over all ``tau``
equals ``Tc``. Only the order of magnitude of the width is physical; this
normalization simply makes ``Tc`` an operational quantity. With it, the
normalized coincidence rate ``1 - |gamma|**2`` crosses 1/2 at
``tau = Tc * sqrt(ln 2 / pi)``.

Transverse coherence is not modelled and the single-point intensity is the
same for every detector.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import KernelNotPSD, NonPositiveBandwidth
from .hermitian_linalg import HermitianMatrix, definiteness

PLANCK_EV_S = 4.135667696e-15
MAX_POINTS = 512


@dataclass(frozen=True)
class SpacetimePoint:
    r: tuple  # metres
    t: float  # seconds

    def __post_init__(self):
        r = tuple(float(x) for x in self.r)
        if len(r) != 3:
            raise ValueError(f"position must have 3 components, got {len(r)}")
        if not all(math.isfinite(x) for x in r) or not math.isfinite(float(self.t)):
            raise ValueError("spacetime point components must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def at(cls, t, r=(0.0, 0.0, 0.0)):
        return cls(r, t)

    def to_json(self):
        return {"r": list(self.r), "t": self.t}

    @classmethod
    def from_json(cls, obj):
        return cls(obj.get("r", (0.0, 0.0, 0.0)), obj["t"])


@dataclass(frozen=True)
class SpectralModel:
    omega0: float           # rad/s
    coherence_time: float   # s
    group_speed: float      # m/s
    axis: tuple = (0.0, 0.0, 1.0)
    intensity: float = 1.0  # electrons / (m^2 s)
    shape: str = "gaussian"

    def __post_init__(self):
        if self.shape.lower() != "gaussian":
            raise ValueError(f"unsupported spectral shape {self.shape!r}")
        object.__setattr__(self, "shape", "gaussian")
        axis = tuple(float(x) for x in self.axis)
        if len(axis) != 3:
            raise ValueError("axis must have 3 components")
        if abs(math.sqrt(sum(x * x for x in axis)) - 1.0) > 1e-12:
            raise ValueError(f"axis must be a unit vector, got {axis}")
        object.__setattr__(self, "axis", axis)
        for name in ("omega0", "coherence_time", "group_speed", "intensity"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.coherence_time <= 0:
            raise ValueError("coherence_time must be positive")
        if self.group_speed <= 0:
            raise ValueError("group_speed must be positive")
        if self.intensity < 0:
            raise ValueError("intensity must be non-negative")

    def to_json(self):
        return {"shape": self.shape,
                "omega0_rad_per_s": self.omega0,
                "coherence_time_s": self.coherence_time,
                "group_speed_m_per_s": self.group_speed,
                "axis": list(self.axis),
                "intensity_per_m2_s": self.intensity}

    @classmethod
    def from_json(cls, obj):
        """Build from the config-file object; unknown keys are ignored."""
        return cls(shape=obj.get("shape", "gaussian"),
                   omega0=obj["omega0_rad_per_s"],
                   coherence_time=obj["coherence_time_s"],
                   group_speed=obj["group_speed_m_per_s"],
                   axis=tuple(obj.get("axis", (0.0, 0.0, 1.0))),
                   intensity=obj.get("intensity_per_m2_s", 1.0))


def load_model(path) -> SpectralModel:
    with open(path) as fh:
        return SpectralModel.from_json(json.load(fh))


@dataclass(frozen=True)
class DetectorConfig:
    eta: float        # quantum efficiency
    area: float       # m^2
    bin_width: float  # s

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if not self.area > 0:
            raise ValueError("area must be positive")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")

    @property
    def exposure(self) -> float:
        """eta * S * dt, the factor turning a rate density into a probability."""
        return self.eta * self.area * self.bin_width

    def to_json(self):
        return {"eta": self.eta, "area_m2": self.area, "bin_width_s": self.bin_width}

    @classmethod
    def from_json(cls, obj):
        return cls(eta=float(obj["eta"]), area=float(obj["area_m2"]),
                   bin_width=float(obj["bin_width_s"]))


@dataclass(frozen=True, eq=False)
class KernelBundle:
    """Degree-of-coherence matrix, cross-correlation matrix and singles rates."""
    gamma: HermitianMatrix
    big_gamma: HermitianMatrix
    singles: np.ndarray
    points: tuple = ()
    _det_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.gamma.dim


def bundle_from_matrix(big_gamma: HermitianMatrix, points=()) -> KernelBundle:
    """Wrap an explicit cross-correlation matrix; its diagonal gives the singles."""
    from .hermitian_linalg import unit_diagonal_normalize

    gamma = unit_diagonal_normalize(big_gamma)
    singles = big_gamma.diagonal()
    singles.flags.writeable = False
    return KernelBundle(gamma=gamma, big_gamma=big_gamma, singles=singles,
                        points=tuple(points))


def coherence_time_from_bandwidth(delta_e_ev: float) -> float:
    """Coherence time (s) of a beam with energy spread ``delta_e_ev`` (eV): h / dE."""
    if not delta_e_ev > 0:
        raise NonPositiveBandwidth(f"energy bandwidth must be positive, got {delta_e_ev!r}")
    return PLANCK_EV_S / delta_e_ev


def effective_delay(model: SpectralModel, p1: SpacetimePoint, p2: SpacetimePoint) -> float:
    dr = sum(a * (y - x) for a, x, y in zip(model.axis, p1.r, p2.r))
    return (p2.t - p1.t) - dr / model.group_speed


def _gamma_of_delay(model: SpectralModel, tau):
    # Evaluated at |tau| and conjugated for tau < 0 so that swapping the two
    # points conjugates the result bit-for-bit.
    tau = np.asarray(tau, dtype=float)
    a = np.abs(tau)
    mag = np.exp(-math.pi * (a / model.coherence_time) ** 2 / 2.0)
    phi = model.omega0 * a
    g = mag * (np.cos(phi) - 1j * np.sin(phi))
    return np.where(tau < 0, g.conj(), g)


def degree_of_coherence(model: SpectralModel, p1: SpacetimePoint, p2: SpacetimePoint) -> complex:
    return complex(_gamma_of_delay(model, effective_delay(model, p1, p2)))


def _delay_matrix(model: SpectralModel, points) -> np.ndarray:
    t = np.array([p.t for p in points])
    r = np.array([p.r for p in points])
    axis = np.asarray(model.axis)
    dt = t[None, :] - t[:, None]
    dr = (r[None, :, :] - r[:, None, :]) @ axis
    return dt - dr / model.group_speed


def build_kernel(model: SpectralModel, points) -> KernelBundle:
    """Kernel bundle for ``points`` with ``gamma[i, j] = gamma(p_i, p_j)``."""
    points = tuple(points)
    if not points:
        raise ValueError("at least one spacetime point is required")
    if len(points) > MAX_POINTS:
        raise ValueError(f"at most {MAX_POINTS} points are supported, got {len(points)}")
    g = _gamma_of_delay(model, _delay_matrix(model, points))
    g[np.diag_indices_from(g)] = 1.0
    gamma = HermitianMatrix._trusted(g)
    big_gamma = HermitianMatrix._trusted(model.intensity * g)
    verdict = definiteness(gamma)
    if not verdict.is_psd:
        raise KernelNotPSD(verdict.min_eigenvalue)
    singles = np.full(len(points), model.intensity)
    singles.flags.writeable = False
    return KernelBundle(gamma=gamma, big_gamma=big_gamma, singles=singles, points=points)


def normalized_g2(model: SpectralModel, tau) -> np.ndarray:
    """``1 - |gamma(tau)|**2`` at a single position."""
    tau = np.asarray(tau, dtype=float)
    return 1.0 - np.exp(-math.pi * (tau / model.coherence_time) ** 2)


def antibunching_curve(model: SpectralModel, tau_min: float, tau_max: float, n_points: int):
    """List of ``(tau, 1 - |gamma(tau)|**2)`` on a uniform grid, same detector position."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not tau_min < tau_max:
        raise ValueError("tau_min must be smaller than tau_max")
    taus = np.linspace(tau_min, tau_max, n_points)
    if tau_min == -tau_max:
        # linspace is only symmetric to an ulp; make the grid (and curve) exactly even
        taus = 0.5 * (taus - taus[::-1])
    values = normalized_g2(model, taus)
    return [(float(t), float(v)) for t, v in zip(taus, values)]


def half_rise_delay(model: SpectralModel) -> float:
    """Delay at which the normalized coincidence rate reaches 1/2."""
    return model.coherence_time * math.sqrt(math.log(2.0) / math.pi)
