"""Command-line front end.

Each subcommand ingests a scenario file (except `manybody-check`, which
is self-contained), runs one pipeline or the paired comparison, and
drops plain CSV/JSON artifacts into the output directory.  Outputs are
written atomically and carry no timestamps, so identical invocations
produce byte-identical files.

Exit codes: 0 success; 1 scenario/configuration problems; 2 numerical
failure diagnostics (stability bound, norm drift, transport leakage).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io as artifacts
from .core import l2_norm, phase_space_mass
from .correspondence import (
    Scenario,
    barrier_split_experiment,
    kinetic_scenario,
    quantum_samples,
    run_correspondence,
)
from .envelope import envelope_density, extract_envelope, scale_check
from .errors import NumericalFailure, ScenarioError
from .kinetics import entropy
from .liouville import evolve_liouville
from .manybody import (
    CarrierState,
    EnvelopeFunctionND,
    kinetic_cross_term_check,
    position_minor_identity_check,
    windowed_orthogonality_check,
)
from .schrodinger import energy, expectation_p, expectation_x

OUTPUT_ROOT_ENV = "SEMIKIN_OUTPUT_ROOT"

_SCENARIO_COMMANDS = ("schrodinger", "envelope", "liouville", "kinetics", "compare", "barrier")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semikin",
        description="quantum-to-classical phase-space kinetics workbench",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out",
        help=f"output root (default: ${OUTPUT_ROOT_ENV} or ./semikin-out)",
    )
    common.add_argument(
        "--jobs", type=int, default=1, help="worker thread cap (reserved)"
    )
    common.add_argument("--seed", type=int, default=None, help="override the seed")
    common.add_argument(
        "--force",
        action="store_true",
        help="run even when the scale separation check fails",
    )
    common.add_argument(
        "--dump-binary",
        action="store_true",
        dest="dump_binary",
        help="also write raw float64 dumps with JSON sidecars",
    )
    common.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a scenario value, e.g. time.dt=0.01 (repeatable)",
    )
    scenario_arg = argparse.ArgumentParser(add_help=False)
    scenario_arg.add_argument("--scenario", required=True, help="scenario INI file")

    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "schrodinger": "run the wave solver and log packet observables",
        "envelope": "project the wave onto coarse phase-space envelopes",
        "liouville": "transport the initial envelope density classically",
        "kinetics": "run the collisional transport and log its histories",
        "compare": "run both pipelines and report their agreement",
        "barrier": "split a packet on a barrier and track the lobes",
    }
    for name in _SCENARIO_COMMANDS:
        sub.add_parser(name, parents=[common, scenario_arg], help=helps[name])
    sub.add_parser(
        "manybody-check",
        parents=[common],
        help="print the carrier-algebra residual table",
    )
    return parser


def _parse_overrides(pairs) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ScenarioError(f"override {pair!r} must look like section.key=value")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _output_dir(args) -> Path:
    root = Path(args.out) if args.out else Path(os.environ.get(OUTPUT_ROOT_ENV, "semikin-out"))
    outdir = root / args.command
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _load(args) -> Scenario:
    return artifacts.load_scenario(
        args.scenario, overrides=_parse_overrides(args.override), seed=args.seed
    )


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_schrodinger(scenario: Scenario, outdir: Path, args) -> None:
    rows = []
    psi = None
    for i, psi in enumerate(quantum_samples(scenario)):
        rows.append(
            (
                scenario.sample_times[i],
                l2_norm(psi),
                expectation_x(psi),
                expectation_p(psi),
                energy(psi, scenario.potential),
            )
        )
    artifacts.atomic_write_text(
        outdir / "observables.csv",
        artifacts._csv("t,norm,x,p,energy", rows),
    )
    artifacts.save_wavefunction(psi, outdir / "wavefunction", binary=args.dump_binary)


def _cmd_envelope(scenario: Scenario, outdir: Path, args) -> None:
    pg = scenario.phase_grid()
    report = scale_check(scenario.initial_wavefunction(), pg)
    artifacts.atomic_write_text(
        outdir / "scale.json",
        artifacts._json(
            {
                "wavelength": report.wavelength,
                "envelope_scale": report.envelope_scale,
                "carrier_ratio": report.carrier_ratio,
                "envelope_ratio": report.envelope_ratio,
                "satisfied": report.satisfied,
            }
        ),
    )
    index_rows = []
    for i, psi in enumerate(quantum_samples(scenario)):
        field = extract_envelope(psi, pg, potential=scenario.potential, warn_scales=False)
        artifacts.save_envelope(field, outdir / f"env_{i:03d}", binary=args.dump_binary)
        artifacts.save_density(
            envelope_density(field), outdir / f"rho_{i:03d}", binary=args.dump_binary
        )
        index_rows.append((i, scenario.sample_times[i]))
    artifacts.atomic_write_text(
        outdir / "samples.csv", artifacts._csv("index,t", index_rows)
    )


def _cmd_liouville(scenario: Scenario, outdir: Path, args) -> None:
    psi0 = scenario.initial_wavefunction()
    pg = scenario.phase_grid()
    rho0 = envelope_density(
        extract_envelope(psi0, pg, potential=scenario.potential, warn_scales=False)
    )
    hamiltonian = scenario.hamiltonian()
    mass_rows = []
    for i, t_i in enumerate(scenario.sample_times):
        rho = evolve_liouville(
            rho0, hamiltonian, t_i, dt=scenario.dt, periodic_x=scenario.periodic_x
        )
        artifacts.save_density(rho, outdir / f"rho_{i:03d}", binary=args.dump_binary)
        mass_rows.append((t_i, phase_space_mass(rho)))
    artifacts.atomic_write_text(outdir / "masses.csv", artifacts._csv("t,mass", mass_rows))


def _manybody_rows(seed: int) -> list[tuple[str, str, float]]:
    rng = np.random.default_rng(seed)

    def gaussian_of_sum(scale: float) -> EnvelopeFunctionND:
        return EnvelopeFunctionND(
            func=lambda xs: np.exp(-scale * np.sum(xs) ** 2),
            grad=lambda xs: np.full(
                xs.size, -2.0 * scale * np.sum(xs) * np.exp(-scale * np.sum(xs) ** 2)
            ),
            symmetric=True,
        )

    amplitude = gaussian_of_sum(0.35)
    numeric = EnvelopeFunctionND(
        func=amplitude.func, grad=None, symmetric=True
    )
    rows = []
    for statistics in ("fermion", "boson"):
        state = CarrierState(statistics, tuple(rng.uniform(-2.0, 2.0, size=2)))
        xs = rng.uniform(-1.0, 1.0, size=2)
        rows.append(
            (
                "kinetic_cross_term",
                f"n=2 {statistics} analytic gradient",
                kinetic_cross_term_check(state, amplitude, xs),
            )
        )
    state3 = CarrierState("fermion", tuple(rng.uniform(-2.0, 2.0, size=3)))
    xs3 = rng.uniform(-1.0, 1.0, size=3)
    for h in (1e-4, 5e-5):
        rows.append(
            (
                "kinetic_cross_term",
                f"n=3 fermion central differences h={h:g}",
                kinetic_cross_term_check(state3, numeric, xs3, h=h),
            )
        )
    state2 = CarrierState("fermion", tuple(rng.uniform(-2.0, 2.0, size=2)))
    rows.append(
        (
            "position_minor",
            "n=2 fermion",
            position_minor_identity_check(state2, rng.uniform(-1.0, 1.0, size=2), 0),
        )
    )
    state3b = CarrierState("boson", tuple(rng.uniform(-2.0, 2.0, size=3)))
    rows.append(
        (
            "position_minor",
            "n=3 boson",
            position_minor_identity_check(state3b, rng.uniform(-1.0, 1.0, size=3), 1),
        )
    )
    window = 32.0
    diag = windowed_orthogonality_check(1.0, 1.0, window, probe_slope=1.0)
    rows.append(("windowed_orthogonality", "same carrier, slope error", abs(diag - 1.0)))
    q = 2.0 * np.pi * 24.0 / window
    off = windowed_orthogonality_check(1.0, 1.0 + q, window)
    rows.append(("windowed_orthogonality", "distinct carriers, 24 beats", abs(off)))
    return rows


def _cmd_manybody(outdir: Path, args) -> None:
    rows = _manybody_rows(args.seed if args.seed is not None else 0)
    lines = ["check,detail,residual"]
    lines.extend(f"{check},{detail},{residual!r}" for check, detail, residual in rows)
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    artifacts.atomic_write_text(outdir / "residuals.csv", table)


def _cmd_kinetics(scenario: Scenario, outdir: Path, args) -> None:
    report = kinetic_scenario(scenario, force=args.force)
    artifacts.save_kinetic_report(report, outdir, binary=args.dump_binary)
    if scenario.rates is not None:
        pg = scenario.phase_grid()
        energies = pg.p_centers**2 / (2.0 * scenario.constants.mass)
        artifacts.save_rate_matrix(
            scenario.rates, energies, scenario.constants.hbar, outdir / "rates"
        )


def _cmd_compare(scenario: Scenario, outdir: Path, args) -> None:
    report = run_correspondence(scenario, force=args.force)
    artifacts.save_correspondence_report(report, outdir)


def _cmd_barrier(scenario: Scenario, outdir: Path, args) -> None:
    report = barrier_split_experiment(scenario, force=args.force)
    artifacts.save_correspondence_report(report, outdir)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        outdir = _output_dir(args)
        if args.command == "manybody-check":
            _cmd_manybody(outdir, args)
            return 0
        scenario = _load(args)
        handler = {
            "schrodinger": _cmd_schrodinger,
            "envelope": _cmd_envelope,
            "liouville": _cmd_liouville,
            "kinetics": _cmd_kinetics,
            "compare": _cmd_compare,
            "barrier": _cmd_barrier,
        }[args.command]
        handler(scenario, outdir, args)
        return 0
    except NumericalFailure as exc:
        print(f"semikin: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"semikin: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
