"""
DC Grid Virtual Inertia Stability Analyzer - Main Entry Point

Small-signal and time-domain stability of a droop-controlled source converter
with virtual inertia (a low-pass filter of bandwidth omega on the voltage
reference) feeding a constant power load (CPL) across an LC link.

Grid parameters come from a JSON config file and/or long flags; flags win.
`--omega inf` selects pure droop control.

Usage:
    python main.py equilibrium --config reference_grid.json --power 60000
    python main.py stability --config reference_grid.json --omega 716 --power 45000
    python main.py thresholds --config reference_grid.json --omega 716
    python main.py design --config reference_grid.json --capacitance 0.014
    python main.py simulate --scenario scenario_step.json --format csv --output step.csv
    python main.py simulate --config reference_grid.json --omega 125 --power 20000 --initial-offset 0.01
    python main.py sweep --kind curve --config reference_grid.json --axis1 omega:log:10:1e5:1000
    python main.py sweep --kind map --config reference_grid.json --axis1 omega:log:50:5000:40 \\
        --axis2 capacitance:linear:0.005:0.04:40 --cross-check
    python main.py critical-power --config reference_grid.json --omega 125
    python main.py critical-power --config reference_grid.json --omega 716 --method ramp --p-lo 40000
    python main.py verify --samples 10000 --seed 42

Exit codes:
    0 success, 1 verification failed, 2 invalid input,
    3 no equilibrium (P > P_max), 4 voltage collapse
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from analysis import (
    GridAnalysisError, InvalidParameterError, InvariantViolationError,
    NoEquilibriumError, SweepRunner, VoltageCollapseError, __version__,
    assess_stability, bandwidth_window, capacitance_thresholds, classify_inertia,
    compute_equilibrium, critical_power, design_for, large_inertia_error,
    machine_emulation_from_lpf, power_transfer_limit, run_verification, simulate,
    simulate_ramp, theorem1_stable,
)
from analysis.sweep import CURVE_COLUMNS, curve_minimum
from config import configure_logging, get_output_dir
from models import CellVerdict, GridParams, Scenario, SweepAxis, SweepGrid, Verdict
from utils import FileHandler, NumberUtils, render_csv, render_json, render_summary
from utils.file_handler import TRAJECTORY_COLUMNS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_NO_EQUILIBRIUM = 3
EXIT_VOLTAGE_COLLAPSE = 4

GRID_FIELDS = list(GridParams.model_fields)
CONFIG_KEYS = set(GRID_FIELDS) | {'power', 'scenario'}


@dataclass
class Artifact:
    """What one subcommand emits, in every output format."""
    data: Any
    header: List[str]
    rows: List[List[Any]]
    title: str
    stats: Dict[str, Any] = field(default_factory=dict)
    footer: Optional[str] = None
    exit_code: int = EXIT_OK
    trajectory: Any = None
    manifest: Optional[Dict[str, Any]] = None


def load_config(path: str) -> Dict[str, Any]:
    """
    Read a JSON config holding GridParams keys, optionally 'power' and 'scenario'.

    Args:
        path: Config file path

    Returns:
        Dict of config values
    """
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise InvalidParameterError(f"{path}: config must be a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise InvalidParameterError(f"{path}: unknown config keys {unknown}")
    return data


def parse_step(text: str) -> Dict[str, float]:
    """Parse a power step written as T:P (seconds:watts)."""
    parts = text.split(':')
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"step must look like T:P, got {text!r}")
    try:
        return {'time': float(parts[0]), 'power': float(parts[1])}
    except ValueError:
        raise argparse.ArgumentTypeError(f"step must look like T:P, got {text!r}")


def _verdict_line(stable: bool, marginal: bool) -> str:
    if marginal:
        return "⚠️  Marginal: on a stability boundary, not claimed stable"
    return "✅ Locally stable" if stable else "❌ Unstable"


class GridAnalyzer:
    """Command orchestrator: builds inputs, runs one analysis, emits the artifact."""

    def __init__(self, args):
        """
        Initialize analyzer.

        Args:
            args: Parsed command line arguments
        """
        self.args = args
        self.config = load_config(args.config) if args.config else {}

    def _flag_values(self) -> Dict[str, Any]:
        values = {}
        for name in GRID_FIELDS:
            value = getattr(self.args, name, None)
            if value is not None:
                values[name] = value
        return values

    def grid_params(self, base: Optional[Dict[str, Any]] = None) -> GridParams:
        """Defaults < config file (or scenario params) < flags."""
        values = {k: v for k, v in self.config.items() if k in GRID_FIELDS}
        values.update(base or {})
        values.update(self._flag_values())
        return GridParams(**values)

    def power(self, default: Optional[float] = None) -> float:
        power = self.args.power if self.args.power is not None else self.config.get('power', default)
        if power is None:
            raise InvalidParameterError("CPL power is required (--power or 'power' in the config)")
        return float(power)

    def scenario(self) -> Scenario:
        """Scenario from --scenario, the config's 'scenario' block or flags alone."""
        args = self.args
        if args.scenario:
            with open(args.scenario, 'r', encoding='utf-8') as f:
                base = json.load(f)
        else:
            base = dict(self.config.get('scenario', {}))
        if not isinstance(base, dict):
            raise InvalidParameterError("scenario must be a JSON object")

        params = self.grid_params(base.get('params'))
        base['params'] = params.model_dump(mode='json')

        if args.step:
            base['power_schedule'] = args.step
        elif 'power_schedule' not in base:
            base['power_schedule'] = [{'time': 0.0, 'power': self.power()}]

        base.setdefault('t_end', 1.0)
        overrides = {'t_end': args.t_end, 'dt': args.dt, 'decimation': args.decimation,
                     'initial_offset': args.initial_offset}
        base.update({k: v for k, v in overrides.items() if v is not None})

        if args.ripple_amplitude is not None:
            if args.ripple_frequency is None:
                raise InvalidParameterError("--ripple-amplitude needs --ripple-frequency")
            base['perturbation'] = {'amplitude': args.ripple_amplitude,
                                    'frequency': args.ripple_frequency, 'seed': args.seed}
        elif args.seed is not None and base.get('perturbation'):
            base['perturbation'] = {**base['perturbation'], 'seed': args.seed}

        if args.machine_form:
            base['machine'] = machine_emulation_from_lpf(
                params.lpf_bandwidth, params.droop_gain, params.v_nominal).model_dump()
        return Scenario.model_validate(base)

    def equilibrium(self) -> Artifact:
        p = self.grid_params()
        power = self.power()
        eq = compute_equilibrium(p, power)
        data = {**eq.model_dump(mode='json'), 'p_max': power_transfer_limit(p)}
        return Artifact(
            data=data, header=list(data), rows=[list(data.values())],
            title="EQUILIBRIUM",
            stats={
                'CPL power P [W]': power,
                'Capacitor voltage V_e [V]': eq.v_cap,
                'Line current [A]': eq.current,
                'Incremental resistance R_e [Ohm]': eq.r_effective,
                'Power transfer limit P_max [W]': data['p_max'],
            },
        )

    def stability(self) -> Artifact:
        p = self.grid_params()
        eq = compute_equilibrium(p, self.power())
        report = assess_stability(p, eq)
        data = report.model_dump(mode='json')

        scalars = ['stable', 'marginal', 'f2', 'f1', 'f0', 'c2', 'c1', 'c0_minus', 'c0']
        header = list(scalars)
        row = [data[key] for key in scalars]
        for n, eig in enumerate(report.eigs, 1):
            header += [f'eig{n}_re', f'eig{n}_im']
            row += [eig.re, eig.im]

        return Artifact(
            data=data, header=header, rows=[row], title="STABILITY REPORT",
            stats={
                'LPF bandwidth omega [rad/s]': NumberUtils.dump_float(p.lpf_bandwidth),
                'Capacitance C [F]': p.capacitance,
                'CPL power P [W]': eq.power,
                'Routh-Hurwitz': {'f2': report.f2, 'f1': report.f1, 'f0': report.f0},
                'Thresholds [F]': {'C2': report.c2, 'C1': report.c1,
                                   'C0-': report.c0_minus, 'C0': report.c0},
                'Eigenvalues': [f"{e.re:.6g}{e.im:+.6g}j" for e in report.eigs],
            },
            footer=_verdict_line(report.stable, report.marginal),
        )

    def thresholds(self) -> Artifact:
        p = self.grid_params()
        eq = compute_equilibrium(p, self.power())
        th = capacitance_thresholds(p, eq)
        data = {
            'omega': NumberUtils.dump_float(p.lpf_bandwidth),
            **th.model_dump(),
            'c_base': p.inductance / (p.droop_gain * eq.r_effective),
        }
        footer = None
        if p.capacitance is not None:
            data['stable'] = theorem1_stable(p, eq)
            footer = "✅ C > C0" if data['stable'] else "❌ C <= C0"
        return Artifact(
            data=data, header=list(data), rows=[list(data.values())],
            title="CAPACITANCE THRESHOLDS",
            stats={'LPF bandwidth omega [rad/s]': data['omega'],
                   'R_e [Ohm]': eq.r_effective,
                   'Thresholds [F]': {k: data[k] for k in ('c2', 'c1', 'c0_minus', 'c0', 'c_base')}},
            footer=footer,
        )

    def design(self) -> Artifact:
        p = self.grid_params()
        eq = compute_equilibrium(p, self.power())
        d = design_for(eq, p.inductance, p.droop_gain)
        data = d.model_dump()
        data['regime'] = classify_inertia(p.lpf_bandwidth, d)
        if not p.is_droop_only:
            data['large_inertia'] = large_inertia_error(p.lpf_bandwidth, eq, p.inductance,
                                                        p.droop_gain)
        if p.capacitance is not None:
            window = bandwidth_window(p.capacitance, eq, p.inductance, p.droop_gain)
            data['bandwidth_window'] = window.model_dump(mode='json')

        header = ['c_base', 'omega_opt', 'c_opt', 'omega_max', 'regime']
        row = [data[key] for key in header]
        if 'bandwidth_window' in data:
            header += ['omega_lo', 'omega_hi']
            row += [data['bandwidth_window']['omega_lo'], data['bandwidth_window']['omega_hi']]

        stats = {'Baseline C_base [F]': d.c_base, 'Optimal omega_opt [rad/s]': d.omega_opt,
                 'Minimum C_opt [F]': d.c_opt, 'Maximum inertia omega_max [rad/s]': d.omega_max,
                 'Regime of omega': data['regime']}
        if 'large_inertia' in data:
            stats['Large-inertia approximation'] = data['large_inertia']
        if 'bandwidth_window' in data:
            stats['Admissible bandwidths'] = {k: v for k, v in data['bandwidth_window'].items()}
        return Artifact(data=data, header=header, rows=[row], title="VIRTUAL INERTIA DESIGN",
                        stats=stats)

    def simulate(self) -> Artifact:
        scenario = self.scenario()
        traj = simulate(scenario)
        data = traj.metadata()
        collapsed = traj.verdict == Verdict.COLLAPSE
        icon = {Verdict.CONVERGED: "✅", Verdict.OSCILLATION: "⚠️ "}.get(traj.verdict, "❌")
        return Artifact(
            data=data, header=TRAJECTORY_COLUMNS, rows=traj.samples.tolist(),
            title="SIMULATION", trajectory=traj,
            stats={'Steps': len(scenario.power_schedule), 't_end [s]': scenario.t_end,
                   'dt [s]': scenario.dt, 'Samples': len(traj.samples),
                   'Final deviation': traj.final_deviation,
                   'Equilibrium V_e [V]': traj.v_equilibrium},
            footer=f"{icon} {traj.verdict.value}",
            exit_code=EXIT_VOLTAGE_COLLAPSE if collapsed else EXIT_OK,
        )

    def sweep(self) -> Artifact:
        args = self.args
        axis1 = SweepAxis.parse(args.axis1)
        axis2 = SweepAxis.parse(args.axis2) if args.axis2 else None
        names = {axis1.name, axis2.name if axis2 else None}
        power = self.power(default=0.0) if 'power' in names else self.power()
        grid = SweepGrid(axis1=axis1, axis2=axis2, fixed=self.grid_params(), power=power)
        runner = SweepRunner(threads=args.threads)

        if args.kind == 'curve':
            curve = runner.curve_c0_vs_omega(grid)
            header = CURVE_COLUMNS
            rows = [[getattr(r, col) for col in header] for r in curve]
            data = [r.model_dump() for r in curve]
            best = curve_minimum(curve)
            stats = {'Points': len(curve), 'Minimum C0 [F]': best.c0,
                     'At omega [rad/s]': best.omega, 'C_base [F]': best.c_base}
            footer = None
        else:
            if axis2 is None:
                raise InvalidParameterError("--kind map needs --axis2")
            smap = runner.stability_map(grid, cross_check=args.cross_check)
            header = [axis1.name, axis2.name, 'verdict']
            if args.cross_check:
                header.append('oracle_stable')
            rows = [[c.x, c.y, c.verdict] + ([c.oracle_stable] if args.cross_check else [])
                    for c in smap.cells]
            data = smap.model_dump(mode='json')
            counts = {v.value: sum(1 for c in smap.cells if c.verdict == v) for v in CellVerdict}
            stats = {'Cells': len(smap.cells), 'Verdicts': counts}
            footer = None
            if args.cross_check:
                disagreements = smap.oracle_disagreements()
                stats['Oracle disagreements'] = disagreements
                footer = ("✅ Eigenvalue oracle agrees on every decided cell" if disagreements == 0
                          else f"❌ Eigenvalue oracle disagrees on {disagreements} cells")

        manifest = {'kind': args.kind, 'columns': header,
                    'grid': grid.model_dump(mode='json'), 'version': __version__}
        return Artifact(data=data, header=header, rows=rows, title=f"SWEEP ({args.kind})",
                        stats=stats, footer=footer, manifest=manifest)

    def critical_power(self) -> Artifact:
        args = self.args
        p = self.grid_params()
        p.require_capacitance()
        p_lo = 0.0 if args.p_lo is None else args.p_lo
        p_hi = power_transfer_limit(p) if args.p_hi is None else args.p_hi

        if args.method == 'bisect':
            value = critical_power(p, p_lo, p_hi)
            data = {'method': 'bisect', 'p_lo': p_lo, 'p_hi': p_hi, 'critical_power': value}
            return Artifact(data=data, header=list(data), rows=[list(data.values())],
                            title="CRITICAL POWER",
                            stats={'Bracket [W]': [p_lo, p_hi], 'Critical power [W]': value},
                            footer=f"⚠️  Predicted instability above {value:.0f} W")

        report = simulate_ramp(p, p_lo, p_hi, p_step=args.p_step, dwell=args.dwell, dt=args.dt)
        data = report.model_dump(mode='json')
        header = ['power', 'start', 'end', 'verdict', 'final_deviation']
        rows = [[getattr(s, col) for col in header] for s in report.steps]
        return Artifact(
            data=data, header=header, rows=rows, title="POWER RAMP",
            stats={'Steps': len(report.steps),
                   'Observed instability [W]': report.observed_instability_power,
                   'Predicted critical power [W]': report.predicted_critical_power},
        )

    def verify(self) -> Artifact:
        report = run_verification(samples=self.args.samples, seed=self.args.seed)
        data = {**report.model_dump(), 'passed': report.passed}
        return Artifact(
            data=data, header=list(data), rows=[list(data.values())],
            title="VERIFICATION", stats=data,
            footer="✅ All property suites passed" if report.passed else "❌ Verification failed",
            exit_code=EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED,
        )

    def dispatch(self) -> Artifact:
        logger.info("Running %s", self.args.command)
        handler = getattr(self, self.args.command.replace('-', '_'))
        return handler()

    def emit(self, artifact: Artifact) -> None:
        """Write the artifact to --output (under VI_STAB_OUTPUT_DIR if relative) or stdout."""
        fmt = self.args.format
        if fmt == 'json':
            text = render_json(artifact.data)
        elif fmt == 'csv':
            text = render_csv(artifact.header, artifact.rows)
        else:
            text = render_summary(artifact.stats, artifact.title, artifact.footer)

        if not self.args.output:
            sys.stdout.write(text)
            return

        file_handler = FileHandler(get_output_dir())
        if fmt == 'csv' and artifact.trajectory is not None:
            paths = file_handler.save_trajectory(artifact.trajectory, self.args.output)
        elif fmt == 'csv' and artifact.manifest is not None:
            paths = file_handler.save_sweep(artifact.header, artifact.rows, self.args.output,
                                            artifact.manifest)
        else:
            paths = {fmt: file_handler.save_text(text, self.args.output)}
        for path in paths.values():
            print(f"✅ Saved {path}")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per analysis."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with grid parameters (and optional power)")
    common.add_argument("--v-nominal", dest='v_nominal', type=float, help="Nominal voltage V_n [V]")
    common.add_argument("--droop-gain", dest='droop_gain', type=float, help="Droop gain K [Ohm]")
    common.add_argument("--inductance", type=float, help="Line inductance L [H]")
    common.add_argument("--capacitance", type=float, help="Bus capacitance C [F]")
    common.add_argument("--omega", dest='lpf_bandwidth', type=NumberUtils.parse_float,
                        help="LPF bandwidth [rad/s]; 'inf' selects pure droop")
    common.add_argument("--power", type=float, help="CPL power P [W]")
    common.add_argument("--format", choices=['json', 'csv', 'human'], default='json',
                        help="Output format (default: json)")
    common.add_argument("--output", help="Output file (default: standard output)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action='store_true', help="Debug logging")
    verbosity.add_argument("--quiet", action='store_true', help="Errors only")

    parser = argparse.ArgumentParser(
        description="DC Grid Virtual Inertia Stability Analyzer",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    commands = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (('equilibrium', "Equilibrium for a CPL power"),
                            ('stability', "Routh-Hurwitz verdict, thresholds and eigenvalues"),
                            ('thresholds', "Capacitance thresholds C2, C1, C0-, C0")):
        commands.add_parser(name, parents=[common], help=help_text)

    commands.add_parser('design', parents=[common],
                        help="Virtual inertia sizing; with --capacitance also the bandwidth window")

    sim = commands.add_parser('simulate', parents=[common], help="Nonlinear RK4 simulation")
    sim.add_argument("--scenario", help="Scenario JSON file")
    sim.add_argument("--step", action='append', type=parse_step, metavar='T:P',
                     help="Power step at time T [s] to P [W]; repeatable, first at T = 0")
    sim.add_argument("--t-end", dest='t_end', type=float, help="Simulated time [s] (default: 1)")
    sim.add_argument("--dt", type=float, help="Integration step [s]")
    sim.add_argument("--decimation", type=int, help="Keep every n-th sample")
    sim.add_argument("--initial-offset", dest='initial_offset', type=float,
                     help="Relative offset of the initial capacitor voltage, e.g. 0.01")
    sim.add_argument("--ripple-amplitude", dest='ripple_amplitude', type=float,
                     help="Sinusoidal CPL ripple amplitude [W]")
    sim.add_argument("--ripple-frequency", dest='ripple_frequency', type=float,
                     help="Ripple frequency [Hz]")
    sim.add_argument("--seed", type=int, help="Seed for a random ripple phase")
    sim.add_argument("--machine-form", dest='machine_form', action='store_true',
                     help="Integrate the reference as an emulated DC machine")

    sweep = commands.add_parser('sweep', parents=[common], help="C0 curve or stability map")
    sweep.add_argument("--kind", choices=['curve', 'map'], default='curve')
    sweep.add_argument("--axis1", required=True, metavar='NAME:SCALE:MIN:MAX:N',
                       help="First axis, e.g. omega:log:10:1e5:1000")
    sweep.add_argument("--axis2", metavar='NAME:SCALE:MIN:MAX:N', help="Second axis (map only)")
    sweep.add_argument("--cross-check", dest='cross_check', action='store_true',
                       help="Attach the eigenvalue-sign verdict to every cell")
    sweep.add_argument("--threads", type=int,
                       help="Worker threads (default: VI_STAB_THREADS, 0 = one per CPU)")

    crit = commands.add_parser('critical-power', parents=[common],
                               help="CPL power where stability is lost")
    crit.add_argument("--method", choices=['bisect', 'ramp'], default='bisect')
    crit.add_argument("--p-lo", dest='p_lo', type=float, help="Stable power / ramp start [W]")
    crit.add_argument("--p-hi", dest='p_hi', type=float,
                      help="Unstable power / ramp stop [W] (default: P_max)")
    crit.add_argument("--p-step", dest='p_step', type=float, default=2000.0,
                      help="Ramp increment [W] (default: 2000)")
    crit.add_argument("--dwell", type=float, default=0.2, help="Ramp hold time [s] (default: 0.2)")
    crit.add_argument("--dt", type=float, help="Ramp integration step [s]")

    verify = commands.add_parser('verify', parents=[common], help="Randomized property suites")
    verify.add_argument("--samples", type=int, default=10000)
    verify.add_argument("--seed", type=int, default=42)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one subcommand and emit its artifact.

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID_INPUT

    configure_logging('DEBUG' if args.verbose else 'ERROR' if args.quiet else None)

    try:
        analyzer = GridAnalyzer(args)
        artifact = analyzer.dispatch()
        analyzer.emit(artifact)
        return artifact.exit_code
    except NoEquilibriumError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_NO_EQUILIBRIUM
    except VoltageCollapseError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_VOLTAGE_COLLAPSE
    except InvariantViolationError as exc:
        print(f"❌ Internal check failed: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION_FAILED
    except (ValidationError, GridAnalysisError, ValueError, OSError) as exc:
        print(f"❌ Invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


def main():
    """Main function."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
