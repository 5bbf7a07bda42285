"""Pseudo-spectral time integration of incompressible viscous/resistive MHD.

The state carries the velocity and magnetic field as dealiased spectral
amplitudes.  The nonlinearity is evaluated in rotational form (vorticity
cross velocity plus current cross magnetic field for the momentum equation,
a curl of the cross product for the induction equation), which keeps the
induction right-hand side solenoidal to roundoff; the Leray projection
absorbs every gradient, so neither the pressure nor the magnetic pressure
is ever solved for.

Time stepping is integrating-factor RK4: diffusion is applied exactly
through exp(-nu k^2 dt) multipliers and classical RK4 handles the
transformed nonlinearity, so a pure diffusion mode decays exactly.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .fields import (
    SpectralField,
    dealias,
    divergence_residual,
    from_physical,
    inner_product,
    l2_norm_spectral,
    leray_project,
    grad_l2_norm_squared,
    symmetry_error,
    to_physical,
    zero_field,
)
from .grid import Grid, fft_workers


class BlowUpError(RuntimeError):
    """A non-finite value appeared while stepping; carries time and peak size."""

    def __init__(self, t: float, peak: float):
        super().__init__(f"non-finite state at t={t:.6g} (peak magnitude {peak:.3e})")
        self.t = t
        self.peak = peak


@dataclass(frozen=True)
class PhysicsParams:
    """Kinematic viscosity and magnetic diffusivity; both zero marks the ideal system."""

    nu: float
    eta: float

    def __post_init__(self):
        if not (np.isfinite(self.nu) and np.isfinite(self.eta)):
            raise ValueError("nu and eta must be finite")
        if self.nu < 0.0 or self.eta < 0.0:
            raise ValueError("nu and eta must be non-negative")

    @property
    def is_ideal(self) -> bool:
        return self.nu == 0.0 and self.eta == 0.0


@dataclass(frozen=True)
class MHDState:
    """Snapshot (u, b, t) of the velocity and magnetic fields."""

    u: SpectralField
    b: SpectralField
    t: float

    @property
    def grid(self) -> Grid:
        return self.u.grid


@dataclass(frozen=True)
class InitialCondition:
    """Named initial-condition family with parameters and a seed."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None


@dataclass
class RunConfig:
    grid: Grid
    physics: PhysicsParams
    dt: float
    t_max: float
    ic: InitialCondition
    diag_every: int = 10
    checkpoint_every: int = 0
    cfl: float = 0.4

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.diag_every < 1:
            raise ValueError("diag_every must be >= 1")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be >= 0")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must lie in (0, 1]")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


def validate_state(state: MHDState, div_tol: float = 1e-11) -> None:
    """Raise unless both fields are finite, real-symmetric, and solenoidal."""
    for name, f in (("u", state.u), ("b", state.b)):
        if not np.all(np.isfinite(f.data)):
            raise ValueError(f"{name} contains non-finite coefficients")
        peak = float(np.max(np.abs(f.data)))
        if symmetry_error(f) > 1e-12 * max(peak, 1.0):
            raise ValueError(f"{name} violates conjugate symmetry")
        if divergence_residual(f) > div_tol:
            raise ValueError(f"{name} violates the divergence-free constraint")


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def _taylor_green(grid: Grid, amplitude: float, b_amplitude: float):
    x = grid.coords
    if grid.dims == 2:
        u = amplitude * np.stack([
            np.sin(x[0]) * np.cos(x[1]),
            -np.cos(x[0]) * np.sin(x[1]),
        ])
        b = b_amplitude * np.stack([
            np.cos(x[0]) * np.sin(x[1]),
            -np.sin(x[0]) * np.cos(x[1]),
        ])
    else:
        u = amplitude * np.stack([
            np.sin(x[0]) * np.cos(x[1]) * np.cos(x[2]),
            -np.cos(x[0]) * np.sin(x[1]) * np.cos(x[2]),
            np.zeros(grid.shape),
        ])
        b = b_amplitude * np.stack([
            np.sin(x[2]), np.sin(x[0]), np.sin(x[1]),
        ])
    return u, b


def _orszag_tang(grid: Grid, amplitude: float, b_amplitude: float):
    x = grid.coords
    u2 = [-np.sin(x[1]), np.sin(x[0])]
    b2 = [-np.sin(x[1]), np.sin(2.0 * x[0])]
    if grid.dims == 2:
        u = amplitude * np.stack(u2)
        b = b_amplitude * np.stack(b2)
    else:
        zero = np.zeros(grid.shape)
        u = amplitude * np.stack(u2 + [zero])
        b = b_amplitude * np.stack(b2 + [zero])
    return u, b


def _shell_index(grid: Grid) -> np.ndarray:
    return np.rint(grid.k_mag / grid.k_unit).astype(int)


def _random_band_field(grid: Grid, rng: np.random.Generator, slope: float,
                       band_lo: int, band_hi: int, rms: float) -> SpectralField:
    """Solenoidal random field whose shell energies follow m**slope exactly."""
    noise = rng.standard_normal((grid.dims,) + grid.shape)
    f = leray_project(from_physical(grid, noise))
    shells = _shell_index(grid)
    data = np.zeros_like(f.data)
    for m in range(band_lo, band_hi + 1):
        sel = shells == m
        cur = float(np.sum(np.abs(f.data[:, sel]) ** 2))
        if cur > 0.0:
            data[:, sel] = f.data[:, sel] * math.sqrt(float(m) ** slope / cur)
    out = SpectralField(grid, data, divergence_free=True)
    cur_rms = l2_norm_spectral(out) / math.sqrt(grid.volume)
    if cur_rms > 0.0 and rms > 0.0:
        out = SpectralField(grid, out.data * (rms / cur_rms), divergence_free=True)
    elif rms == 0.0:
        out = zero_field(grid, grid.dims)
    return out


_IC_PARAMS = {
    "taylor_green": {"amplitude", "b_amplitude"},
    "orszag_tang": {"amplitude", "b_amplitude"},
    "random_band": {"slope", "band_lo", "band_hi", "u_rms", "b_rms"},
}


def initial_state(grid: Grid, ic: InitialCondition) -> MHDState:
    """Construct the t = 0 state; fields come out dealiased and solenoidal."""
    if ic.kind not in _IC_PARAMS:
        raise ValueError(f"unknown initial-condition kind {ic.kind!r}")
    unknown = set(ic.params) - _IC_PARAMS[ic.kind]
    if unknown:
        raise ValueError(f"parameters {sorted(unknown)} not valid for ic kind {ic.kind!r}")

    if ic.kind == "taylor_green":
        u_p, b_p = _taylor_green(grid, ic.params.get("amplitude", 1.0),
                                 ic.params.get("b_amplitude", 0.0))
        u = from_physical(grid, u_p, divergence_free=True)
        b = from_physical(grid, b_p, divergence_free=True)
    elif ic.kind == "orszag_tang":
        u_p, b_p = _orszag_tang(grid, ic.params.get("amplitude", 1.0),
                                ic.params.get("b_amplitude", 1.0))
        u = from_physical(grid, u_p, divergence_free=True)
        b = from_physical(grid, b_p, divergence_free=True)
    else:
        if ic.seed is None:
            raise ValueError("random_band requires a seed")
        rng = np.random.default_rng(ic.seed)
        slope = float(ic.params.get("slope", -5.0 / 3.0))
        lo = int(ic.params.get("band_lo", 2))
        hi = int(ic.params.get("band_hi", 5))
        if not (1 <= lo <= hi):
            raise ValueError(f"invalid band range [{lo}, {hi}]")
        u = _random_band_field(grid, rng, slope, lo, hi, float(ic.params.get("u_rms", 1.0)))
        b = _random_band_field(grid, rng, slope, lo, hi, float(ic.params.get("b_rms", 0.0)))

    u = SpectralField(grid, dealias(leray_project(u)).data, divergence_free=True)
    b = SpectralField(grid, dealias(leray_project(b)).data, divergence_free=True)
    return MHDState(u=u, b=b, t=0.0)


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------

def _nonlinear(grid: Grid, u: SpectralField, b: SpectralField):
    """Rotational-form nonlinear terms and the peak speed (for CFL checks).

    Returns spectral (N_u, N_b) with N_u Leray-projected and both dealiased:
    N_u = P[-(curl u) x u + (curl b) x b], N_b = curl(u x b).
    """
    axes = tuple(range(1, grid.dims + 1))
    workers = fft_workers()
    size = grid.size
    k = grid.k_vectors

    u_p = sfft.ifftn(u.data * size, axes=axes, workers=workers).real
    b_p = sfft.ifftn(b.data * size, axes=axes, workers=workers).real

    if grid.dims == 2:
        w_hat = 1j * (k[0] * u.data[1] - k[1] * u.data[0])
        j_hat = 1j * (k[0] * b.data[1] - k[1] * b.data[0])
        w_p = sfft.ifftn(w_hat * size, workers=workers).real
        j_p = sfft.ifftn(j_hat * size, workers=workers).real
        nu_p = np.stack([
            w_p * u_p[1] - j_p * b_p[1],
            -w_p * u_p[0] + j_p * b_p[0],
        ])
        e_p = u_p[0] * b_p[1] - u_p[1] * b_p[0]
        e_hat = sfft.fftn(e_p, workers=workers) / size
        nb_data = np.stack([1j * k[1] * e_hat, -1j * k[0] * e_hat])
    else:
        w_p = _curl_phys(grid, u.data, axes, workers)
        j_p = _curl_phys(grid, b.data, axes, workers)
        nu_p = _cross(j_p, b_p) - _cross(w_p, u_p)
        c_p = _cross(u_p, b_p)
        c_hat = sfft.fftn(c_p, axes=axes, workers=workers) / size
        nb_data = np.stack([
            1j * (k[1] * c_hat[2] - k[2] * c_hat[1]),
            1j * (k[2] * c_hat[0] - k[0] * c_hat[2]),
            1j * (k[0] * c_hat[1] - k[1] * c_hat[0]),
        ])

    nu_hat = sfft.fftn(nu_p, axes=axes, workers=workers) / size
    n_u = leray_project(dealias(SpectralField(grid, nu_hat)))
    n_b = dealias(SpectralField(grid, nb_data, divergence_free=True))
    max_speed = float(np.max(np.sqrt(np.sum(u_p**2, axis=0))))
    return n_u, n_b, max_speed


def _curl_phys(grid, data, axes, workers):
    k = grid.k_vectors
    w = np.stack([
        1j * (k[1] * data[2] - k[2] * data[1]),
        1j * (k[2] * data[0] - k[0] * data[2]),
        1j * (k[0] * data[1] - k[1] * data[0]),
    ])
    return sfft.ifftn(w * grid.size, axes=axes, workers=workers).real


def _cross(a, b):
    return np.stack([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def rhs(state: MHDState, physics: PhysicsParams) -> tuple[SpectralField, SpectralField]:
    """Instantaneous tendencies (du/dt, db/dt) including diffusion."""
    grid = state.grid
    n_u, n_b, _ = _nonlinear(grid, state.u, state.b)
    du = SpectralField(grid, n_u.data - physics.nu * grid.k_squared * state.u.data,
                       divergence_free=True)
    db = SpectralField(grid, n_b.data - physics.eta * grid.k_squared * state.b.data,
                       divergence_free=True)
    return du, db


def advective_cfl_limit(state: MHDState, cfl: float = 0.4) -> float:
    """Largest advectively stable dt: cfl * dx / max|u|."""
    speed = float(np.max(np.sqrt(np.sum(to_physical(state.u) ** 2, axis=0))))
    if speed == 0.0:
        return math.inf
    return cfl * state.grid.dx / speed


class Stepper:
    """Integrating-factor RK4 stepper with cached diffusion multipliers."""

    def __init__(self, grid: Grid, physics: PhysicsParams, dt: float, cfl: float = 0.4):
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.physics = physics
        self.dt = float(dt)
        self.cfl = float(cfl)
        k2 = grid.k_squared
        self._eu_half = np.exp(-physics.nu * k2 * (0.5 * self.dt))
        self._eb_half = np.exp(-physics.eta * k2 * (0.5 * self.dt))
        self._eu_full = self._eu_half**2
        self._eb_full = self._eb_half**2

    def advance(self, state: MHDState) -> MHDState:
        grid, dt = self.grid, self.dt
        u0, b0 = state.u.data, state.b.data

        nu1, nb1, speed = _nonlinear(grid, state.u, state.b)
        limit = self.cfl * grid.dx / speed if speed > 0.0 else math.inf
        if dt > limit:
            warnings.warn(
                f"dt={dt:.3e} exceeds the advective CFL limit {limit:.3e} at t={state.t:.4g}",
                RuntimeWarning,
                stacklevel=2,
            )

        def wrap(ud, bd):
            return (SpectralField(grid, ud, divergence_free=True),
                    SpectralField(grid, bd, divergence_free=True))

        ua, ba = wrap(self._eu_half * (u0 + (0.5 * dt) * nu1.data),
                      self._eb_half * (b0 + (0.5 * dt) * nb1.data))
        nu2, nb2, _ = _nonlinear(grid, ua, ba)

        ub, bb = wrap(self._eu_half * u0 + (0.5 * dt) * nu2.data,
                      self._eb_half * b0 + (0.5 * dt) * nb2.data)
        nu3, nb3, _ = _nonlinear(grid, ub, bb)

        uc, bc = wrap(self._eu_full * u0 + dt * (self._eu_half * nu3.data),
                      self._eb_full * b0 + dt * (self._eb_half * nb3.data))
        nu4, nb4, _ = _nonlinear(grid, uc, bc)

        new_u = self._eu_full * u0 + (dt / 6.0) * (
            self._eu_full * nu1.data + 2.0 * self._eu_half * (nu2.data + nu3.data) + nu4.data
        )
        new_b = self._eb_full * b0 + (dt / 6.0) * (
            self._eb_full * nb1.data + 2.0 * self._eb_half * (nb2.data + nb3.data) + nb4.data
        )
        t_new = state.t + dt
        if not (np.all(np.isfinite(new_u)) and np.all(np.isfinite(new_b))):
            mags = np.abs(np.concatenate([new_u.ravel(), new_b.ravel()]))
            finite = mags[np.isfinite(mags)]
            peak = float(finite.max()) if finite.size else math.inf
            raise BlowUpError(t_new, peak)
        uf, bf = wrap(new_u, new_b)
        return MHDState(u=uf, b=bf, t=t_new)


def step(state: MHDState, physics: PhysicsParams, dt: float, cfl: float = 0.4) -> MHDState:
    """Advance one integrating-factor RK4 step (convenience wrapper)."""
    return Stepper(state.grid, physics, dt, cfl).advance(state)


def iter_states(config: RunConfig):
    """Yield (step_index, state) for every step from 0 through t_max."""
    state = initial_state(config.grid, config.ic)
    yield 0, state
    stepper = Stepper(config.grid, config.physics, config.dt, config.cfl)
    for i in range(1, config.n_steps + 1):
        state = stepper.advance(state)
        yield i, state


# ---------------------------------------------------------------------------
# budgets and invariants
# ---------------------------------------------------------------------------

def energy_budget(history, physics: PhysicsParams):
    """Residual of the energy equality along a sampled trajectory.

    residual(t) = [E(t) + int_0^t 2(nu ||grad u||^2 + eta ||grad b||^2) - E(0)] / E(0)
    with E = ||u||_2^2 + ||b||_2^2 and trapezoid time quadrature.
    """
    times, energies, dissipation = [], [], []
    for state in history:
        times.append(state.t)
        energies.append(l2_norm_spectral(state.u) ** 2 + l2_norm_spectral(state.b) ** 2)
        dissipation.append(
            2.0 * (physics.nu * grad_l2_norm_squared(state.u)
                   + physics.eta * grad_l2_norm_squared(state.b))
        )
    times = np.asarray(times)
    energies = np.asarray(energies)
    dissipation = np.asarray(dissipation)
    if times.size == 0:
        return times, np.asarray([])
    cumulative = np.concatenate([[0.0], np.cumsum(
        0.5 * (dissipation[1:] + dissipation[:-1]) * np.diff(times)
    )])
    e0 = energies[0] if energies[0] > 0.0 else 1.0
    return times, (energies + cumulative - energies[0]) / e0


@dataclass(frozen=True)
class IdealInvariants:
    energy: float
    cross_helicity: float
    magnetic_invariant: float  # mean-square potential (2D) or magnetic helicity (3D)


def ideal_invariants(state: MHDState) -> IdealInvariants:
    """Quadratic invariants of the ideal system, used as solver health checks."""
    grid = state.grid
    energy = 0.5 * (l2_norm_spectral(state.u) ** 2 + l2_norm_spectral(state.b) ** 2)
    cross = inner_product(state.u, state.b)
    k = grid.k_vectors
    bd = state.b.data
    if grid.dims == 2:
        curl_b = 1j * (k[0] * bd[1] - k[1] * bd[0])
        a_hat = curl_b * grid.inv_k_squared
        magnetic = float(grid.volume * np.sum(np.abs(a_hat) ** 2))
    else:
        a_hat = 1j * np.stack([
            k[1] * bd[2] - k[2] * bd[1],
            k[2] * bd[0] - k[0] * bd[2],
            k[0] * bd[1] - k[1] * bd[0],
        ]) * grid.inv_k_squared
        magnetic = float(grid.volume * np.real(np.sum(a_hat * np.conj(bd))))
    return IdealInvariants(energy=energy, cross_helicity=cross, magnetic_invariant=magnetic)
