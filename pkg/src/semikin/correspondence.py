"""Two-pipeline experiments: wave mechanics vs phase-space transport.

A scenario describes one physical setup — grid, packets, potential,
sample times, optionally a collision rate matrix.  `run_correspondence`
pushes it through both pipelines:

  quantum:    ψ(0) --split-step-→ ψ(tᵢ) --window projection-→ ρ_env(tᵢ)
  classical:  ρ_env(0) --Liouville backtrace-------------------→ ρ_cl(tᵢ)

and reports, per sample time, the L1/L2 distance between the two
phase-space densities, the quantum packet center against the classical
characteristic, and the mass carried by each branch.  Distances are
normalized by the initial envelope mass/norm so they read as relative
errors; the claimed-agreement window is bounded by the dispersion
horizon t_disp = 2mσ²/ħ, beyond which a tight envelope stops being
slowly varying and the comparison degrades by construction.

`barrier_split_experiment` drives a packet into a barrier, splits the
late-time envelope into transmitted/reflected lobes by the sign of p
(with a one-cell dead band), and tracks each lobe's center against a
free classical characteristic launched at the segmentation time.
`kinetic_scenario` runs the assembled collisional transport and logs
mass, entropy and current histories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    PhaseSpaceDensity,
    PhaseSpaceGrid,
    PhysicalConstants,
    SpatialGrid,
    l2_norm,
    phase_space_mass,
)
from .envelope import ScaleReport, envelope_density, extract_envelope, scale_check
from .errors import ScenarioError
from .kinetics import RateMatrix, current_density, entropy, evolve_boltzmann
from .liouville import FlowMap, HamiltonianSpec, evolve_liouville
from .schrodinger import (
    FreePotential,
    PotentialSpec,
    WaveFunction,
    evolve,
    expectation_p,
    expectation_x,
    init_gaussian_packet,
    transmission_reflection,
)

__all__ = [
    "PacketSpec",
    "Scenario",
    "CorrespondenceReport",
    "LobeTrack",
    "BarrierSummary",
    "KineticReport",
    "dispersion_time",
    "quantum_samples",
    "run_correspondence",
    "barrier_split_experiment",
    "kinetic_scenario",
]


@dataclass(frozen=True)
class PacketSpec:
    """One Gaussian packet: center, carrier momentum, width, weight."""

    x_center: float
    p_center: float
    sigma: float
    weight: float = 1.0


@dataclass(frozen=True, kw_only=True)
class Scenario:
    """A complete, self-consistent experiment description.

    Grid parameters mirror the constructors in `core`; `dt` is the
    quantum solver step and the characteristic substep of the classical
    branch.  The grids are built once at construction, so an
    inconsistent scenario fails immediately with `ScenarioError`.
    """

    name: str = "scenario"
    constants: PhysicalConstants = PhysicalConstants()
    potential: PotentialSpec = field(default_factory=FreePotential)
    packets: tuple[PacketSpec, ...]
    x_min: float = 0.0
    dx: float
    n_x: int
    window_cells: int
    n_p: Optional[int] = None
    grid_p_center: float = 0.0
    sample_times: tuple[float, ...]
    dt: float
    rates: Optional[RateMatrix] = None
    seed: int = 0
    periodic_x: bool = False

    def __post_init__(self) -> None:
        if not self.packets:
            raise ScenarioError("a scenario needs at least one packet")
        if self.dt <= 0.0:
            raise ScenarioError(f"dt must be positive, got {self.dt}")
        times = np.asarray(self.sample_times, dtype=float)
        if times.size == 0:
            raise ScenarioError("a scenario needs at least one sample time")
        if not np.all(np.isfinite(times)) or np.any(times < 0.0):
            raise ScenarioError("sample times must be finite and non-negative")
        if np.any(np.diff(times) <= 0.0):
            raise ScenarioError("sample times must be strictly increasing")
        try:
            grid = self.spatial_grid()
            self.phase_grid(grid)
        except ValueError as exc:
            raise ScenarioError(f"inconsistent grids: {exc}") from exc

    def spatial_grid(self) -> SpatialGrid:
        return SpatialGrid(x_min=self.x_min, dx=self.dx, n=self.n_x)

    def phase_grid(self, grid: Optional[SpatialGrid] = None) -> PhaseSpaceGrid:
        if grid is None:
            grid = self.spatial_grid()
        return PhaseSpaceGrid.from_spatial(
            grid,
            self.constants,
            window_cells=self.window_cells,
            p_center=self.grid_p_center,
            n_p=self.n_p,
        )

    def initial_wavefunction(self) -> WaveFunction:
        grid = self.spatial_grid()
        try:
            total = np.zeros(grid.n, dtype=np.complex128)
            for packet in self.packets:
                part = init_gaussian_packet(
                    grid, packet.x_center, packet.p_center, packet.sigma, self.constants
                )
                total = total + packet.weight * part.values
        except ValueError as exc:
            raise ScenarioError(f"bad packet: {exc}") from exc
        psi = WaveFunction(grid=grid, values=total, time=0.0, constants=self.constants)
        return WaveFunction(
            grid=grid, values=total / l2_norm(psi), time=0.0, constants=self.constants
        )

    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(mass=self.constants.mass, potential=self.potential)


@dataclass(frozen=True)
class LobeTrack:
    """Measured vs predicted center of one post-barrier lobe."""

    label: str
    times: np.ndarray
    x_measured: np.ndarray
    p_measured: np.ndarray
    x_predicted: np.ndarray
    p_predicted: np.ndarray
    mass_fraction: float


@dataclass(frozen=True)
class BarrierSummary:
    transmission: float
    reflection: float
    deadband_fraction: float
    separable: bool
    lobes: tuple[LobeTrack, ...]


@dataclass(frozen=True)
class KineticReport:
    """Histories of the assembled collisional run."""

    times: np.ndarray
    mass: np.ndarray
    entropy: np.ndarray
    current: np.ndarray  # (n_times, n_x)
    densities: tuple[PhaseSpaceDensity, ...]


@dataclass(frozen=True)
class CorrespondenceReport:
    """Per-sample agreement metrics between the two pipelines.

    `l1`/`l2` are relative distances (normalized by the initial
    envelope's mass/L2 norm).  Classical-branch fields are absent for
    experiments whose potential the classical engine cannot legally
    carry (the sharp barrier); metric arrays that are present must be
    finite, and distances non-negative.
    """

    times: np.ndarray
    x_quantum: np.ndarray
    p_quantum: np.ndarray
    mass_envelope: np.ndarray
    scale: ScaleReport
    l1: Optional[np.ndarray] = None
    l2: Optional[np.ndarray] = None
    x_classical: Optional[np.ndarray] = None
    p_classical: Optional[np.ndarray] = None
    mass_classical: Optional[np.ndarray] = None
    barrier: Optional[BarrierSummary] = None

    def __post_init__(self) -> None:
        for name in (
            "times",
            "x_quantum",
            "p_quantum",
            "mass_envelope",
            "l1",
            "l2",
            "x_classical",
            "p_classical",
            "mass_classical",
        ):
            arr = getattr(self, name)
            if arr is None:
                continue
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"report metric {name} contains non-finite entries")
        for name in ("l1", "l2"):
            arr = getattr(self, name)
            if arr is not None and np.any(arr < 0.0):
                raise ValueError(f"distance {name} must be non-negative")


def dispersion_time(sigma: float, constants: PhysicalConstants) -> float:
    """Horizon 2mσ²/ħ beyond which a width-σ packet stops being slow."""
    return 2.0 * constants.mass * sigma**2 / constants.hbar


def quantum_samples(scenario: Scenario):
    """Yield ψ(tᵢ) at every sample time, advancing incrementally."""
    psi = scenario.initial_wavefunction()
    t_prev = 0.0
    for t_i in scenario.sample_times:
        delta = t_i - t_prev
        if delta > 0.0:
            steps = max(1, int(round(delta / scenario.dt)))
            psi = evolve(psi, scenario.potential, delta / steps, steps)
        t_prev = t_i
        yield psi


def _relative_distances(
    rho_a: PhaseSpaceDensity, rho_b: PhaseSpaceDensity, mass_ref: float, l2_ref: float
) -> tuple[float, float]:
    diff = rho_a.values - rho_b.values
    cell = rho_a.grid.cell_area / (2.0 * np.pi * rho_a.grid.constants.hbar)
    l1 = float(np.sum(np.abs(diff)) * cell / mass_ref)
    l2 = float(np.sqrt(np.sum(diff**2)) / l2_ref)
    return l1, l2


def run_correspondence(scenario: Scenario, force: bool = False) -> CorrespondenceReport:
    """Evolve both pipelines and measure their agreement.

    Fails with `ScenarioError` when the initial packet flunks the scale
    separation check, unless `force` is set; everything downstream is
    deterministic in the scenario.
    """
    psi0 = scenario.initial_wavefunction()
    pg = scenario.phase_grid()
    report_scale = scale_check(psi0, pg)
    if not report_scale.satisfied and not force:
        raise ScenarioError(
            "initial packet fails the scale separation check (carrier ratio"
            f" {report_scale.carrier_ratio:.3g}, envelope ratio"
            f" {report_scale.envelope_ratio:.3g}); pass force=True to run anyway"
        )
    hamiltonian = scenario.hamiltonian()
    rho0 = envelope_density(
        extract_envelope(psi0, pg, potential=scenario.potential, warn_scales=False)
    )
    mass_ref = phase_space_mass(rho0)
    l2_ref = float(np.sqrt(np.sum(rho0.values**2)))
    flow_x0, flow_p0 = expectation_x(psi0), expectation_p(psi0)

    n = len(scenario.sample_times)
    times = np.asarray(scenario.sample_times, dtype=float)
    l1 = np.empty(n)
    l2 = np.empty(n)
    x_q = np.empty(n)
    p_q = np.empty(n)
    x_c = np.empty(n)
    p_c = np.empty(n)
    m_env = np.empty(n)
    m_cl = np.empty(n)

    for i, psi in enumerate(quantum_samples(scenario)):
        rho_env = envelope_density(
            extract_envelope(psi, pg, potential=scenario.potential, warn_scales=False)
        )
        rho_cl = evolve_liouville(
            rho0, hamiltonian, times[i], dt=scenario.dt, periodic_x=scenario.periodic_x
        )
        l1[i], l2[i] = _relative_distances(rho_env, rho_cl, mass_ref, l2_ref)
        x_q[i], p_q[i] = expectation_x(psi), expectation_p(psi)
        if times[i] > 0.0:
            flow = FlowMap(hamiltonian, times[i], scenario.dt)
            xc, pc = flow(flow_x0, flow_p0)
            x_c[i], p_c[i] = float(xc), float(pc)
        else:
            x_c[i], p_c[i] = flow_x0, flow_p0
        m_env[i] = phase_space_mass(rho_env)
        m_cl[i] = phase_space_mass(rho_cl)

    return CorrespondenceReport(
        times=times,
        x_quantum=x_q,
        p_quantum=p_q,
        mass_envelope=m_env,
        scale=report_scale,
        l1=l1,
        l2=l2,
        x_classical=x_c,
        p_classical=p_c,
        mass_classical=m_cl,
    )


def _lobe_center(rho: PhaseSpaceDensity, mask: np.ndarray) -> tuple[float, float, float]:
    """(⟨x⟩, ⟨p⟩, mass fraction) of the masked phase-space region."""
    g = rho.grid
    weights = rho.values * mask
    total = float(np.sum(weights))
    whole = float(np.sum(rho.values))
    if total <= 0.0:
        return float("nan"), float("nan"), 0.0
    x = float(np.sum(weights.sum(axis=1) * g.x_centers) / total)
    p = float(np.sum(weights.sum(axis=0) * g.p_centers) / total)
    return x, p, total / whole


def barrier_split_experiment(scenario: Scenario, force: bool = False) -> CorrespondenceReport:
    """Split a packet on a barrier and track each lobe classically.

    The first sample time is the segmentation time: the packet must
    have cleared the barrier by then.  Transmitted (p > Δp) and
    reflected (p < -Δp) lobes are identified in ρ_env; their centers at
    later samples are compared against free-flight characteristics
    started from the segmentation-time centers (the regions away from
    the barrier are potential-free, and the sharp barrier itself is not
    admissible for the classical engine).  Lobes sharing more than 10%
    of the mass with the dead band |p| ≤ Δp are flagged as inseparable,
    not fatal.
    """
    if len(scenario.sample_times) < 2:
        raise ScenarioError("barrier experiment needs a segmentation time plus samples")
    psi0 = scenario.initial_wavefunction()
    pg = scenario.phase_grid()
    report_scale = scale_check(psi0, pg)
    if not report_scale.satisfied and not force:
        raise ScenarioError(
            "initial packet fails the scale separation check;"
            " pass force=True to run anyway"
        )

    barrier_x = getattr(scenario.potential, "x_b", None)
    if barrier_x is None:
        raise ScenarioError("barrier experiment needs a potential with a barrier position x_b")

    dead = pg.p_halfwidth
    p_plus = pg.p_centers > dead
    p_minus = pg.p_centers < -dead
    mask_t = np.zeros(pg.shape)
    mask_t[:, p_plus] = 1.0
    mask_r = np.zeros(pg.shape)
    mask_r[:, p_minus] = 1.0

    n = len(scenario.sample_times)
    times = np.asarray(scenario.sample_times, dtype=float)
    x_q = np.empty(n)
    p_q = np.empty(n)
    m_env = np.empty(n)
    centers = {"transmitted": [], "reflected": []}
    fractions = {"transmitted": [], "reflected": []}
    deadband = 0.0
    psi_last = None

    for i, psi in enumerate(quantum_samples(scenario)):
        rho_env = envelope_density(
            extract_envelope(psi, pg, potential=scenario.potential, warn_scales=False)
        )
        x_q[i], p_q[i] = expectation_x(psi), expectation_p(psi)
        m_env[i] = phase_space_mass(rho_env)
        for label, mask in (("transmitted", mask_t), ("reflected", mask_r)):
            x, p, frac = _lobe_center(rho_env, mask)
            centers[label].append((x, p))
            fractions[label].append(frac)
        if i == 0:
            deadband = 1.0 - fractions["transmitted"][0] - fractions["reflected"][0]
        psi_last = psi

    transmission, reflection = transmission_reflection(psi_last, float(barrier_x))
    free_flow = HamiltonianSpec(mass=scenario.constants.mass, potential=FreePotential())

    lobes = []
    for label in ("transmitted", "reflected"):
        if fractions[label][0] <= 1e-6:
            continue  # e.g. no reflected lobe for a transparent barrier
        x0, p0 = centers[label][0]
        xs = np.array([c[0] for c in centers[label]])
        ps = np.array([c[1] for c in centers[label]])
        x_pred = np.empty(n)
        p_pred = np.empty(n)
        for i, t_i in enumerate(times):
            if t_i > times[0]:
                xc, pc = FlowMap(free_flow, t_i - times[0], scenario.dt)(x0, p0)
                x_pred[i], p_pred[i] = float(xc), float(pc)
            else:
                x_pred[i], p_pred[i] = x0, p0
        lobes.append(
            LobeTrack(
                label=label,
                times=times,
                x_measured=xs,
                p_measured=ps,
                x_predicted=x_pred,
                p_predicted=p_pred,
                mass_fraction=float(np.mean(fractions[label])),
            )
        )

    summary = BarrierSummary(
        transmission=transmission,
        reflection=reflection,
        deadband_fraction=deadband,
        separable=deadband <= 0.1,
        lobes=tuple(lobes),
    )
    return CorrespondenceReport(
        times=times,
        x_quantum=x_q,
        p_quantum=p_q,
        mass_envelope=m_env,
        scale=report_scale,
        barrier=summary,
    )


def kinetic_scenario(scenario: Scenario, force: bool = False) -> KineticReport:
    """Run the assembled collisional transport and log its histories.

    The initial distribution is the windowed projection of the
    scenario's packet, so a rate-free run coincides — sample by sample,
    bit for bit — with the classical branch of `run_correspondence`.
    Every sample is evolved from t = 0, keeping the histories
    deterministic and splitting-error accumulation out of late samples.
    """
    psi0 = scenario.initial_wavefunction()
    pg = scenario.phase_grid()
    report_scale = scale_check(psi0, pg)
    if not report_scale.satisfied and not force:
        raise ScenarioError(
            "initial packet fails the scale separation check;"
            " pass force=True to run anyway"
        )
    f0 = envelope_density(
        extract_envelope(psi0, pg, potential=scenario.potential, warn_scales=False)
    )
    hamiltonian = scenario.hamiltonian()

    times = np.asarray(scenario.sample_times, dtype=float)
    masses = np.empty(times.size)
    entropies = np.empty(times.size)
    currents = np.empty((times.size, pg.x_centers.size))
    densities = []
    for i, t_i in enumerate(times):
        f_i = evolve_boltzmann(
            f0,
            hamiltonian,
            scenario.rates,
            t_i,
            dt=scenario.dt,
            periodic_x=scenario.periodic_x,
        )
        masses[i] = phase_space_mass(f_i)
        entropies[i] = entropy(f_i.values)
        currents[i] = current_density(f_i)
        densities.append(f_i)
    return KineticReport(
        times=times,
        mass=masses,
        entropy=entropies,
        current=currents,
        densities=tuple(densities),
    )
