"""Command line front end: ``run``, ``sweep`` and ``check``.

Exit codes: 0 success, 1 usage error, 2 integration failure,
3 validation-suite failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .evolve import DEFAULT_TOL, IntegrationError, check_truncation, evolve, rk4_fixed, write_trajectory
from .gates import GateKind, GateReport, Mode, analytic_fidelity, gate_operator, run_gate
from .hamiltonian import (
    GateParams,
    build_coherent,
    build_conditional_phase,
    build_conditional_swap,
    build_effective,
)
from .hilbert import QUBIT_STATES, NamedState, Space, StateVector, named_state, qubit_state

log = logging.getLogger("iongate")

EXIT_OK, EXIT_USAGE, EXIT_INTEGRATION, EXIT_VALIDATION = 0, 1, 2, 3

CSV_HEADER = (
    "omega_over_g2",
    "initial_state",
    "mode",
    "fidelity_numeric",
    "fidelity_analytic",
    "success_numeric",
    "success_analytic",
    "norm_final",
    "steps_taken",
    "status",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- initial states

def parse_initial_state(text: str, space: Space) -> StateVector:
    """Accept ``00``..``11``, sums like ``00+01`` / ``00-01``, or four
    comma-separated complex amplitudes ``c00,c01,c10,c11``."""
    text = text.strip()
    if "," in text:
        parts = text.split(",")
        if len(parts) != 4:
            raise UsageError(f"explicit initial state needs 4 amplitudes, got {len(parts)}")
        try:
            amps = [complex(p.strip().replace(" ", "")) for p in parts]
        except ValueError as exc:
            raise UsageError(f"bad amplitude in {text!r}: {exc}") from None
        psi = qubit_state(space, *amps)
    else:
        psi = None
        sign = 1.0
        token = ""
        for ch in text + "+":
            if ch in "+-" and token:
                try:
                    s = NamedState.parse(token)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                if s not in QUBIT_STATES:
                    raise UsageError(f"initial state must be a qubit state, got {token!r}")
                term = named_state(space, s) * sign
                psi = term if psi is None else psi + term
                token = ""
                sign = 1.0 if ch == "+" else -1.0
            elif ch in "+-":
                sign = 1.0 if ch == "+" else -1.0
            else:
                token += ch
        if psi is None:
            raise UsageError(f"empty initial state {text!r}")
    if psi.norm_squared == 0:
        raise UsageError(f"initial state {text!r} has zero norm")
    return psi.normalized()


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepSpec:
    gate: GateKind = GateKind.PHASE
    modes: tuple[Mode, ...] = (Mode.COHERENT,)
    start: float = 0.01
    stop: float = 0.4
    count: int = 40
    g3: float = 0.0
    gamma3: float = 0.0
    n_max: int = 3
    initial_states: tuple[str, ...] = ("00", "01")
    tol: float = DEFAULT_TOL
    out: str | None = None

    def __post_init__(self):
        if not self.start > 0:
            raise UsageError("sweep start must be > 0 (Omega = 0 has infinite gate time)")
        if not self.stop <= 1:
            raise UsageError("sweep stop must be <= 1")
        if self.count < 2:
            raise UsageError("sweep count must be >= 2")
        if not self.start < self.stop:
            raise UsageError("sweep start must be below stop")
        if not self.initial_states:
            raise UsageError("sweep needs at least one initial state")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


PRESETS = {
    "fig2": dict(gate=GateKind.PHASE, modes=(Mode.COHERENT,), g3=0.0, gamma3=0.0),
    "fig4": dict(gate=GateKind.PHASE, modes=(Mode.CONDITIONAL,), g3=1.0, gamma3=20.0),
    "fig5": dict(gate=GateKind.PHASE, modes=(Mode.CONDITIONAL, Mode.PROJECTION), g3=1.0, gamma3=20.0),
}
_PRESET_COMMON = dict(start=0.01, stop=0.4, count=40, initial_states=("00", "01"))


def preset(name: str, **overrides) -> SweepSpec:
    try:
        fields = dict(_PRESET_COMMON, **PRESETS[name])
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(**fields)


def _fmt(v) -> str:
    if v is None:
        return "na"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _sweep_point(args):
    spec, omega, mode, label = args
    params = GateParams(float(omega), spec.g3, spec.gamma3, spec.n_max)
    psi0 = parse_initial_state(label, params.space)
    om = _fmt(float(omega))
    try:
        r = run_gate(spec.gate, params, psi0, mode, tol=spec.tol, label=label)
    except (IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        log.warning("point omega=%s state=%s failed: %s", om, label, exc)
        return [om, label, mode.value, "", "", "", "", "", "", "error"]
    return [
        om,
        label,
        mode.value,
        _fmt(r.fidelity_numeric),
        _fmt(r.fidelity_analytic),
        _fmt(r.success_numeric),
        _fmt(r.success_analytic),
        _fmt(r.norm_final),
        str(r.steps_taken),
        "ok",
    ]


def sweep_rows(spec: SweepSpec, jobs: int = 1) -> list[list[str]]:
    """Rows ordered by omega, then mode, then initial state (declaration order)."""
    for label in spec.initial_states:
        parse_initial_state(label, Space(spec.n_max))  # fail fast on bad labels
    tasks = [(spec, om, mode, label) for om in spec.grid() for mode in spec.modes for label in spec.initial_states]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def sweep_csv(spec: SweepSpec, jobs: int = 1) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(sweep_rows(spec, jobs))
    return buf.getvalue()


def read_sweep_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- config files

def load_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_CONFIG_TYPES = {
    "gate": str, "mode": str, "omega": float, "g3": float, "gamma3": float, "nmax": int,
    "tol": float, "preset": str, "out": str, "start": float, "stop": float, "count": int,
    "jobs": int, "init": str, "trajectory": str, "checkpoints": int, "method": str,
}


def _config_defaults(cfg: dict[str, str]) -> dict:
    defaults = {}
    for key, value in cfg.items():
        if key not in _CONFIG_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        try:
            if key == "init":
                defaults[key] = value.split()
            else:
                defaults[key] = _CONFIG_TYPES[key](value)
        except ValueError:
            raise UsageError(f"bad value for {key!r}: {value!r}") from None
    return defaults


# ---------------------------------------------------------------- check suite

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class CheckSettings:
    n_max: int = 3
    tol: float = DEFAULT_TOL
    rng_seed: int = 1234
    results: list[CheckResult] = field(default_factory=list)


CONVERGENCE_CEILING = 1e-6


def _check_hermiticity(cs: CheckSettings) -> tuple[bool, str]:
    p = GateParams(0.1, 1.0, 20.0, cs.n_max)
    h = build_coherent(p.space, p).dense()
    herm = float(np.max(np.abs(h - h.conj().T)))
    worst = 0.0
    for build in (build_conditional_phase, build_conditional_swap):
        op = build(p.space, p)
        l1, l2 = p.space.levels()
        proj = np.diag(((l1 == 3).astype(float) + (l2 == 3)))
        worst = max(worst, float(np.max(np.abs(op.anti_hermitian_part() + 0.5j * p.gamma3 * proj))))
    ok = herm < 1e-15 and worst < 1e-15
    return ok, f"max|H-H+|={herm:.1e}, anti-Hermitian block error={worst:.1e}"


def _check_index(cs: CheckSettings) -> tuple[bool, str]:
    sp = Space(cs.n_max)
    ok = all(sp.basis(sp.index(b)) == b for b in sp) and [sp.index(b) for b in sp] == list(range(sp.dim))
    return ok, f"dimension {sp.dim}"


def _check_oracle(cs: CheckSettings) -> tuple[bool, str]:
    worst = 0.0
    for s in (NamedState.Q00, NamedState.Q01):
        p = GateParams(0.01, n_max=cs.n_max)
        psi = named_state(p.space, s)
        r = run_gate(GateKind.PHASE, p, psi, Mode.COHERENT, tol=cs.tol)
        worst = max(worst, abs(r.fidelity_numeric - analytic_fidelity(p, psi)))
    return worst < 1e-3, f"max |F_num - F_analytic| at Omega=0.01: {worst:.2e} (< 1e-3)"


def _check_norm(cs: CheckSettings) -> tuple[bool, str]:
    rng = np.random.default_rng(cs.rng_seed)
    p = GateParams(0.3, 1.0, 20.0, cs.n_max)
    sp = p.space
    v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
    psi = StateVector(sp, v).normalized()
    r = evolve(gate_operator(GateKind.SWAP, p, Mode.COHERENT), psi, 200.0, cs.tol)
    drift = abs(r.norm_squared - 1.0)
    rc = evolve(gate_operator(GateKind.PHASE, p, Mode.CONDITIONAL), psi, 50.0, cs.tol, checkpoints=100)
    norms = np.concatenate([[1.0], rc.checkpoint_norms])
    rise = float(np.max(np.diff(norms)))
    ok = drift < 1e-9 and rise <= 1e-9
    return ok, f"Hermitian drift={drift:.1e} (< 1e-9), max conditional norm rise={rise:.1e} (<= 1e-9)"


def _check_truncation(cs: CheckSettings) -> tuple[bool, str]:
    worst = 0.0
    cases = [
        (build_coherent, GateKind.PHASE, GateParams(0.2, n_max=cs.n_max)),
        (build_conditional_phase, GateKind.PHASE, GateParams(0.2, 1.0, 20.0, cs.n_max)),
        (build_conditional_swap, GateKind.SWAP, GateParams(0.2, 1.0, 20.0, cs.n_max)),
    ]
    for builder, kind, p in cases:
        for s in QUBIT_STATES:
            rep = check_truncation(builder, p, named_state(p.space, s), kind.gate_time(p.omega), cs.tol)
            worst = max(worst, rep.max_difference)
    return worst < 1e-6, f"max amplitude change n_max={cs.n_max} -> {cs.n_max + 1}: {worst:.1e} (< 1e-6)"


def _check_convergence(cs: CheckSettings) -> tuple[bool, str]:
    p = GateParams(0.2, 1.0, 20.0, cs.n_max)
    op = build_conditional_phase(p.space, p)
    psi = named_state(p.space, NamedState.Q00)
    t = GateKind.PHASE.gate_time(p.omega)
    r = evolve(op, psi, t, cs.tol)
    ref = evolve(op, psi, t, 1e-12, method="expm").final_state.amplitudes
    err = float(np.max(np.abs(r.final_state.amplitudes - ref)))
    # order: errors at 2 step counts in the asymptotic regime
    n = 4096
    e1 = np.max(np.abs(rk4_fixed(op, psi, t, n) - ref))
    e2 = np.max(np.abs(rk4_fixed(op, psi, t, 2 * n) - ref))
    order = math.log2(e1 / e2)
    ok = cs.tol <= CONVERGENCE_CEILING and err <= max(cs.tol, 1e-12) and 3.7 < order < 4.3
    return ok, (
        f"tol={cs.tol:.0e} (<= {CONVERGENCE_CEILING:.0e}), error vs expm={err:.1e}, observed order={order:.2f}"
    )


def _check_effective(cs: CheckSettings) -> tuple[bool, str]:
    p = GateParams(0.1, n_max=cs.n_max)
    psi = named_state(p.space, NamedState.Q01)
    r = evolve(build_effective(p.space, p, GateKind.PHASE), psi, GateKind.PHASE.gate_time(p.omega), cs.tol)
    err = float(np.max(np.abs(r.final_state.amplitudes + psi.amplitudes)))
    return err < 1e-6, f"effective phase gate maps Q01 -> -Q01 with error {err:.1e}"


CHECKS = (
    ("hermiticity", _check_hermiticity),
    ("index_bijection", _check_index),
    ("effective_phase_gate", _check_effective),
    ("oracle_equivalence", _check_oracle),
    ("norm_invariants", _check_norm),
    ("truncation", _check_truncation),
    ("convergence", _check_convergence),
)


def run_checks(n_max: int = 3, tol: float = DEFAULT_TOL) -> list[CheckResult]:
    cs = CheckSettings(n_max=n_max, tol=tol)
    for name, fn in CHECKS:
        try:
            ok, detail = fn(cs)
        except IntegrationError as exc:
            ok, detail = False, f"integration failure: {exc}"
        cs.results.append(CheckResult(name, bool(ok), detail))
    return cs.results


# ---------------------------------------------------------------- commands

def _params_from(args, omega=None) -> GateParams:
    try:
        return GateParams(args.omega if omega is None else omega, args.g3, args.gamma3, args.nmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_run(args) -> int:
    if args.omega is None:
        raise UsageError("run needs --omega")
    if not args.omega > 0:
        raise UsageError("--omega must be > 0")
    params = _params_from(args)
    inits = args.init or ["00"]
    if len(inits) != 1:
        raise UsageError("run takes exactly one --init")
    psi0 = parse_initial_state(inits[0], params.space)
    kind, mode = GateKind(args.gate), Mode(args.mode)
    report = run_gate(kind, params, psi0, mode, tol=args.tol, method=args.method, label=inits[0])
    text = report.to_text()
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    if args.trajectory:
        res = evolve(
            gate_operator(kind, params, mode), psi0, kind.gate_time(params.omega), args.tol,
            method=args.method, checkpoints=args.checkpoints,
        )
        write_trajectory(res, args.trajectory)
    return EXIT_OK


def cmd_sweep(args) -> int:
    given = {
        "g3": args.g3, "gamma3": args.gamma3, "n_max": args.nmax, "tol": args.tol, "out": args.out,
        "start": args.start, "stop": args.stop, "count": args.count,
        "initial_states": tuple(args.init) if args.init else None,
    }
    flag_of = {"n_max": "nmax", "initial_states": "init"}
    if args.preset:
        # presets only yield to values the user actually set
        chosen = {k: v for k, v in given.items() if flag_of.get(k, k) in args.explicit}
        spec = preset(args.preset, **chosen)
        if "gate" in args.explicit:
            spec = replace(spec, gate=GateKind(args.gate))
        if "mode" in args.explicit:
            spec = replace(spec, modes=(Mode(args.mode),))
    else:
        spec = SweepSpec(
            gate=GateKind(args.gate), modes=(Mode(args.mode),),
            **{k: v for k, v in given.items() if v is not None},
        )
    if not spec.out:
        raise UsageError("sweep needs --out")
    out = Path(spec.out)
    if not out.parent.exists():
        raise UsageError(f"output directory {out.parent} does not exist")
    t0 = time.perf_counter()
    text = sweep_csv(spec, jobs=args.jobs)
    try:
        out.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None
    log.info("wrote %d rows to %s in %.1f s", text.count("\n") - 1, out, time.perf_counter() - t0)
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks(n_max=args.nmax, tol=args.tol)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iongate", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value file; command-line flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    common = _Parser(add_help=False)
    common.add_argument("--gate", choices=[k.value for k in GateKind], default="phase")
    common.add_argument("--mode", choices=[m.value for m in Mode], default="coherent")
    common.add_argument("--omega", type=float, help="weak-laser Rabi frequency in units of g2")
    common.add_argument("--g3", type=float, default=0.0)
    common.add_argument("--gamma3", type=float, default=0.0)
    common.add_argument("--nmax", type=int, default=3)
    common.add_argument("--init", action="append", help="initial state (repeat for sweeps)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out")
    common.add_argument("--method", choices=["rk4", "expm"], default="rk4")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", parents=[common], help="simulate one gate and print a report")
    run.add_argument("--trajectory", help="write a population time series to this file")
    run.add_argument("--checkpoints", type=int, default=200)
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", parents=[common], help="sweep Omega/g2 and write a CSV")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--count", type=int)
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    ck = sub.add_parser("check", parents=[common], help="run the built-in validation suite")
    ck.set_defaults(func=cmd_check)
    return parser


def _explicit_flags(argv: list[str]) -> set[str]:
    return {a[2:].split("=", 1)[0].replace("-", "_") for a in argv if a.startswith("--")}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        args.explicit = _explicit_flags(argv)
        if args.config:
            for key, value in _config_defaults(load_config(args.config)).items():
                if key not in args.explicit and hasattr(args, key):
                    setattr(args, key, value)
                    args.explicit.add(key)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"iongate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"iongate: integration failure: {exc} (estimate {exc.estimate:.3g})", file=sys.stderr)
        return EXIT_INTEGRATION
    except FileNotFoundError as exc:
        print(f"iongate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
