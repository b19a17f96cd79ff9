"""Camassa-Holm and inviscid Burgers right-hand sides, RK4 time stepping,
conserved quantities and field dump formats.

Camassa-Holm, nonlocal form::

    u_t = -u u_x - d_x R(u^2 + a^2/2 u_x^2),          R = (1 - a^2 d_x^2)^{-1}

transport form (algebraically identical)::

    u_t = -3 u u_x - a^2 d_x^3 R(u^2) - a^2/2 d_x R(u_x^2)

Burgers: ``u_t = -3 u u_x``.  Every quadratic product is dealiased before a
multiplier is applied.  Time stepping runs on real-FFT coefficient arrays; the
public RHS functions return :class:`SpectralField` objects.
"""
import math
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BlowUpError, ConfigurationError, ImminentShockError
from .littlewood_paley import BesovParams, DyadicPartition, besov_norm
from .spectral import DEFAULT_DEALIAS, Grid, SpectralField, derivative, product, resolvent

KINDS = ("ch_nonlocal", "ch_transport", "burgers")
SHOCK_GROWTH_LIMIT = 50.0


@dataclass(frozen=True)
class EvolutionSpec:
    kind: str = "ch_nonlocal"
    alpha: float = 0.0
    dealias: float = DEFAULT_DEALIAS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown evolution kind {self.kind!r}; expected one of {KINDS}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.dealias <= 1:
            raise ConfigurationError(f"dealias rule must lie in (0, 1], got {self.dealias}")

    @classmethod
    def camassa_holm(cls, alpha, dealias=DEFAULT_DEALIAS, form="nonlocal"):
        return cls(f"ch_{form}", alpha, dealias)

    @classmethod
    def burgers(cls, dealias=DEFAULT_DEALIAS):
        return cls("burgers", 0.0, dealias)


# -- public right-hand sides on SpectralField ---------------------------------

def burgers_rhs(u: SpectralField, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    return product(u, derivative(u, 1), rule) * -3.0


def bilinear_B(f: SpectralField, g: SpectralField, alpha: float, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """``B(f, g) = d_x R(f g + a^2/2 f_x g_x)``; the CH nonlocal term is ``-B(u, u)``."""
    inner = product(f, g, rule) + product(derivative(f, 1), derivative(g, 1), rule) * (0.5 * alpha**2)
    return derivative(resolvent(inner, alpha), 1)


def ch_rhs_nonlocal(u: SpectralField, alpha: float, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    return -product(u, derivative(u, 1), rule) - bilinear_B(u, u, alpha, rule)


def ch_rhs_transport(u: SpectralField, alpha: float, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    ux = derivative(u, 1)
    out = burgers_rhs(u, rule)
    if alpha == 0:
        return out
    a2 = alpha**2
    out = out - derivative(resolvent(product(u, u, rule), alpha), 3) * a2
    return out - derivative(resolvent(product(ux, ux, rule), alpha), 1) * (0.5 * a2)


def expansion_E0(u0: SpectralField, alpha: float, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """First-order-in-time field of the CH flow: the transport-form RHS at ``u0``."""
    return ch_rhs_transport(u0, alpha, rule)


def expansion_E0_difference(u0: SpectralField, alpha: float, rule: float = DEFAULT_DEALIAS) -> SpectralField:
    """``E0(alpha, u0) - E0(0, u0) = -2 a^2 d_x^2 R(u0 u0_x) - a^2/2 d_x R(u0_x^2)``.

    Evaluated from this closed form, not as a difference of two RHS calls.
    """
    ux = derivative(u0, 1)
    a2 = alpha**2
    first = derivative(resolvent(product(u0, ux, rule), alpha), 2) * (-2.0 * a2)
    return first - derivative(resolvent(product(ux, ux, rule), alpha), 1) * (0.5 * a2)


def expansion_F0(u0: SpectralField, alpha: float, params: BesovParams, part: DyadicPartition = None) -> float:
    """Scalar coefficient of the ``t^2`` remainder bound for the first-order expansion."""
    b = {k: besov_norm(u0, params.shifted(k), part) for k in (-1, 1, 2)}
    return ((alpha * b[1] + 1.0) * (alpha * b[1] + b[-1] * b[1])
            + alpha * (b[1] + b[-1] * b[2]))


def rhs(u: SpectralField, spec: EvolutionSpec) -> SpectralField:
    if spec.kind == "burgers":
        return burgers_rhs(u, spec.dealias)
    if spec.kind == "ch_transport":
        return ch_rhs_transport(u, spec.alpha, spec.dealias)
    return ch_rhs_nonlocal(u, spec.alpha, spec.dealias)


# -- conserved quantities and shock time ---------------------------------------

def conserved_quantities(u: SpectralField, alpha: float):
    """Grid quadratures of ``H0 = int u`` and ``H_alpha = int u^2 + a^2 u_x^2``."""
    dx = u.grid.dx
    ux = derivative(u, 1).values
    h0 = dx * float(np.sum(u.values))
    ha = dx * float(np.dot(u.values, u.values) + alpha**2 * np.dot(ux, ux))
    return h0, ha


def shock_time_estimate(u0: SpectralField) -> float:
    """Burgers characteristic crossing time ``1 / (3 max(-u0_x))``; inf if never."""
    compression = float(np.max(-derivative(u0, 1).values))
    if compression <= 0:
        return math.inf
    return 1.0 / (3.0 * compression)


# -- fast kernel on real-FFT arrays --------------------------------------------

class _Kernel:
    """RHS evaluation on half-spectrum arrays ``rfft(values)``."""

    def __init__(self, grid: Grid, spec: EvolutionSpec):
        self.grid = grid
        self.spec = spec
        N = grid.N
        kr = np.arange(N // 2 + 1)
        xi = kr * grid.dxi
        self.ik = 1j * xi
        mask = kr <= spec.dealias * N / 2
        mask[-1] = False  # Nyquist
        self.mask = mask.astype(float)
        a2 = spec.alpha**2
        res = 1.0 / (1.0 + a2 * xi**2)
        if spec.kind == "ch_nonlocal":
            self.m_flux = self.mask * self.ik * res
        elif spec.kind == "ch_transport":
            self.m_sq = self.mask * a2 * (self.ik**3) * res
            self.m_gradsq = self.mask * (a2 / 2) * self.ik * res

    def to_hat(self, u: SpectralField) -> np.ndarray:
        return np.fft.rfft(u.values)

    def to_field(self, uh: np.ndarray) -> SpectralField:
        return SpectralField.from_values(self.grid, np.fft.irfft(uh, self.grid.N))

    def __call__(self, uh):
        N = self.grid.N
        u = np.fft.irfft(uh, N)
        ux = np.fft.irfft(self.ik * uh, N)
        kind = self.spec.kind
        if kind == "burgers":
            return -3.0 * self.mask * np.fft.rfft(u * ux)
        if kind == "ch_nonlocal":
            adv = self.mask * np.fft.rfft(u * ux)
            inner = np.fft.rfft(u * u + (0.5 * self.spec.alpha**2) * (ux * ux))
            return -adv - self.m_flux * inner
        out = -3.0 * self.mask * np.fft.rfft(u * ux)
        if self.spec.alpha != 0:
            out -= self.m_sq * np.fft.rfft(u * u) + self.m_gradsq * np.fft.rfft(ux * ux)
        return out

    def step(self, uh, dt):
        k1 = self(uh)
        k2 = self(uh + 0.5 * dt * k1)
        k3 = self(uh + 0.5 * dt * k2)
        k4 = self(uh + dt * k3)
        return uh + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def max_gradient(self, uh) -> float:
        return float(np.max(np.abs(np.fft.irfft(self.ik * uh, self.grid.N))))


def _finite(a) -> bool:
    return bool(np.all(np.isfinite(a)))


def rk4_step(u: SpectralField, spec: EvolutionSpec, dt: float, t: float = 0.0) -> SpectralField:
    """One classical RK4 step of size ``dt``."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    kernel = _Kernel(u.grid, spec)
    uh = kernel.step(kernel.to_hat(u), dt)
    if not _finite(uh):
        raise BlowUpError("non-finite values in RK4 step", t + dt)
    return kernel.to_field(uh)


# -- integration ---------------------------------------------------------------

@dataclass(frozen=True)
class StepPolicy:
    """Fixed-step policy.

    If ``dt`` is None the step is ``cfl * dx / max(1, 3 max|u0|)``.  Each
    integration segment is split into equal steps no longer than that.
    """

    T: float
    dt: Optional[float] = None
    cfl: float = 0.25
    stride: int = 10

    def __post_init__(self):
        if not self.T >= 0:
            raise ConfigurationError(f"final time must be >= 0, got {self.T}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not self.cfl > 0:
            raise ConfigurationError(f"CFL number must be positive, got {self.cfl}")
        if self.stride < 1:
            raise ConfigurationError("snapshot stride must be >= 1")

    def resolve_dt(self, u0: SpectralField) -> float:
        if self.dt is not None:
            return self.dt
        return self.cfl * u0.grid.dx / max(1.0, 3.0 * u0.max_abs())


@dataclass
class ConservedLedger:
    alpha: float
    times: list = field(default_factory=list)
    H0: list = field(default_factory=list)
    Halpha: list = field(default_factory=list)

    def record(self, t, u: SpectralField):
        h0, ha = conserved_quantities(u, self.alpha)
        self.times.append(t)
        self.H0.append(h0)
        self.Halpha.append(ha)

    def relative_drift(self) -> float:
        h = np.asarray(self.Halpha)
        if h.size == 0 or h[0] == 0:
            return 0.0
        return float(np.max(np.abs(h - h[0])) / abs(h[0]))


@dataclass
class Trajectory:
    spec: EvolutionSpec
    dt: float
    times: list
    snapshots: list
    ledger: ConservedLedger
    steps: int = 0

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]

    def at(self, t: float, tol: float = 1e-12) -> SpectralField:
        for ti, ui in zip(self.times, self.snapshots):
            if abs(ti - t) <= tol * max(1.0, abs(t)):
                return ui
        raise KeyError(f"no snapshot at t = {t}")


def integrate(u0: SpectralField, spec: EvolutionSpec, policy: StepPolicy, times=None) -> Trajectory:
    """Integrate from ``t = 0`` to ``policy.T`` with fixed RK4 steps.

    Snapshots are taken at ``t = 0``, every ``policy.stride`` steps and at
    ``T``.  When ``times`` is given, snapshots are taken at ``t = 0`` and
    exactly at those times instead (steps are fitted to land on each).  For
    Burgers, integration stops with :class:`ImminentShockError` once ``t``
    passes the characteristic crossing time or ``max|u_x|`` exceeds 50 times
    its initial value.
    """
    kernel = _Kernel(u0.grid, spec)
    dt_max = policy.resolve_dt(u0)
    segments = []  # (dt, n_steps, steps at which to snapshot)
    if times is None:
        n = math.ceil(policy.T / dt_max - 1e-9) if policy.T > 0 else 0
        if n:
            wanted = set(range(policy.stride, n, policy.stride)) | {n}
            segments.append((policy.T / n, n, wanted))
    else:
        t_prev = 0.0
        for t_next in sorted(set(float(t) for t in times)):
            if t_next < 0:
                raise ConfigurationError("output times must be non-negative")
            if t_next == 0.0:
                continue
            n = math.ceil((t_next - t_prev) / dt_max - 1e-9)
            segments.append(((t_next - t_prev) / n, n, {n}))
            t_prev = t_next

    ledger = ConservedLedger(0.0 if spec.kind == "burgers" else spec.alpha)
    ledger.record(0.0, u0)
    snaps, snap_t = [u0], [0.0]
    uh = kernel.to_hat(u0)
    grad0 = kernel.max_gradient(uh)
    monitor = spec.kind == "burgers" and grad0 > 0
    t_star = shock_time_estimate(u0) if monitor else math.inf
    t, steps = 0.0, 0
    for seg_dt, n_steps, wanted in segments:
        t_start = t
        for k in range(1, n_steps + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                uh = kernel.step(uh, seg_dt)
            steps += 1
            t = t_start + k * seg_dt
            if not _finite(uh):
                raise BlowUpError(f"{spec.kind} solution became non-finite", t)
            if t > t_star:
                raise ImminentShockError(f"passed the shock time t* = {t_star:.6g}", t)
            if monitor and kernel.max_gradient(uh) > SHOCK_GROWTH_LIMIT * grad0:
                raise ImminentShockError(
                    f"max|u_x| exceeded {SHOCK_GROWTH_LIMIT:g}x its initial value "
                    f"(shock estimate t* = {shock_time_estimate(u0):.6g})", t)
            if k in wanted:
                u = kernel.to_field(uh)
                snaps.append(u)
                snap_t.append(t)
                ledger.record(t, u)
    return Trajectory(spec, dt_max, snap_t, snaps, ledger, steps)


# -- field export --------------------------------------------------------------

DUMP_MAGIC = b"ZFL1"
_HEADER = struct.Struct("<4sQddd")


def write_field_binary(path, u: SpectralField, alpha: float = 0.0, t: float = 0.0):
    """Binary dump: magic ``ZFL1``, N (u64), L, alpha, t (f64), then N little-endian f64 values."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, u.grid.N, u.grid.L, float(alpha), float(t)))
        fh.write(np.asarray(u.values, dtype="<f8").tobytes())


def read_field_binary(path):
    """Inverse of :func:`write_field_binary`; returns ``(field, alpha, t)``."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigurationError(f"{path}: truncated header")
        magic, N, L, alpha, t = _HEADER.unpack(head)
        if magic != DUMP_MAGIC:
            raise ConfigurationError(f"{path}: bad magic {magic!r}")
        values = np.frombuffer(fh.read(8 * N), dtype="<f8")
    if values.size != N:
        raise ConfigurationError(f"{path}: expected {N} values, found {values.size}")
    return SpectralField.from_values(Grid(L, N), values.astype(float)), alpha, t


def write_field_csv(path, u: SpectralField):
    with open(path, "w", newline="") as fh:
        fh.write("x,u\n")
        for xv, uv in zip(u.grid.x, u.values):
            fh.write(f"{xv:.17g},{uv:.17g}\n")
