"""Command-line entry point: ``kerrcat <command> [options]``.

Every run writes its artifacts plus ``manifest.json`` into the output
directory (``--out``, else ``$KERRCAT_OUT``, else ``./kerrcat_out``).

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 infeasible design.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit_map import CircuitParams, HardwareParams, acs_to_effective, circuit_to_effective, effective_to_drives
from .compiler import (
    compile_request,
    naive_preparation_schedule,
    plan_preparation,
    verify_gate,
)
from .cat_states import acs_states
from .dynamics import (
    ConvergenceError,
    Schedule,
    evolve_lindblad,
    evolve_schrodinger,
    state_from_json,
    state_to_json,
    steady_state_alpha,
)
from .errors import (
    DegenerateTargetError,
    InfeasibleTargetError,
    KerrCatError,
    PrecisionError,
    TruncationError,
)
from .fock import TruncatedSpace, coherent, husimi_peak, ket2dm, recommended_dim, wigner_grid, write_wigner_csv
from .hamiltonians import AcsParams, NoiseParams, build_acs_hamiltonian, parse_complex
from .spectrum import eigensystem, gap_sweep, write_gap_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 2, 3, 4
OUT_ENV = "KERRCAT_OUT"


class UsageError(Exception):
    """Schema violation; ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, pointer: str, detail: str):
        super().__init__(f"{pointer}: {detail}")
        self.pointer = pointer


# ---------------------------------------------------------------- helpers


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _complex_arg(value: str, pointer: str) -> complex:
    try:
        return parse_complex(value)
    except (ValueError, TypeError) as exc:
        raise UsageError(pointer, f"cannot parse complex literal {value!r}") from exc


def _require(cfg: dict, key: str, pointer: str = ""):
    if key not in cfg:
        raise UsageError(f"{pointer}/{key}", "required field is missing")
    return cfg[key]


def _range(spec: str, pointer: str) -> np.ndarray:
    """``start:stop:step`` inclusive of ``stop`` when it lands on the grid, or ``a,b,c``."""
    try:
        if "," in spec:
            return np.array([float(v) for v in spec.split(",")])
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise UsageError(pointer, f"expected start:stop:step or a comma list, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise UsageError(pointer, "need step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _cjson(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


class _Run:
    def __init__(self, command: str, config: dict, out: Path):
        self.command = command
        self.config = config
        self.out = out
        self.artifacts: list[str] = []
        self.extra: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def manifest(self) -> None:
        man = {
            "command": self.command,
            "config": self.config,
            "config_hash": hashlib.sha256(_canonical({"command": self.command, "config": self.config}).encode()).hexdigest(),
            "version": __version__,
            "artifacts": sorted(self.artifacts),
        }
        man.update(self.extra)
        _write_json(self.out / "manifest.json", man)


# ---------------------------------------------------------------- commands


def cmd_spectrum(args, run: _Run) -> int:
    K = float(args.K)
    if args.sweep_d2:
        d2 = _range(args.sweep_d2, "/sweep_d2")
        sweep = gap_sweep(d2, K=K)
        write_gap_csv(run.path("gap_sweep.csv"), sweep)
        run.extra["truncation"] = "auto: ceil(a^2 + 6a + 10) + 20 per point"
        return EXIT_OK
    if args.alpha0 is None or args.alpha1 is None:
        raise UsageError("/alpha0", "spectrum needs --alpha0 and --alpha1, or --sweep-d2")
    p = AcsParams(_complex_arg(args.alpha0, "/alpha0"), _complex_arg(args.alpha1, "/alpha1"), K)
    dim = args.dim or max(recommended_dim(p.max_amplitude) + 20, args.levels + 1)
    es = eigensystem(build_acs_hamiltonian(TruncatedSpace(dim), p), args.levels)
    with open(run.path("eigenvalues.csv"), "w") as fh:
        fh.write("index,energy\n")
        for i, e in enumerate(es.eigenvalues):
            fh.write(f"{i},{float(e):.12g}\n")
    run.extra["truncation"] = dim
    return EXIT_OK


def cmd_wigner(args, run: _Run) -> int:
    if not args.state:
        raise UsageError("/state", "wigner needs --state")
    try:
        state = state_from_json(Path(args.state).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError("/state", f"cannot read state file: {exc}") from exc
    xs = _range(args.grid, "/grid")
    ps = xs if args.pgrid is None else _range(args.pgrid, "/pgrid")
    w = wigner_grid(state, xs, ps)
    write_wigner_csv(run.path("wigner.csv"), xs, ps, w)
    run.extra["truncation"] = int(state.shape[0])
    return EXIT_OK


def _load_config(args) -> dict:
    if not args.config:
        return {}
    try:
        return json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError("", f"cannot read config {args.config}: {exc}") from exc


def _initial_state(cfg, space, a0, a1):
    kind = cfg.get("initial", "plus")
    if isinstance(kind, dict):
        return state_from_json(kind)
    if kind == "vacuum":
        psi = np.zeros(space.dim, dtype=complex)
        psi[0] = 1.0
        return psi
    if kind in ("plus", "minus"):
        plus, minus = acs_states(space, a0, a1)
        return plus if kind == "plus" else minus
    if kind == "coherent0":
        return coherent(space, a0)
    raise UsageError("/initial", f"unknown initial state {kind!r}")


def cmd_evolve(args, run: _Run) -> int:
    cfg = run.config
    if "schedule" in cfg:
        try:
            sched = Schedule.from_json(cfg["schedule"])
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError("/schedule", str(exc)) from exc
    else:
        a0 = _complex_arg(_require(cfg, "alpha0"), "/alpha0")
        a1 = _complex_arg(_require(cfg, "alpha1"), "/alpha1")
        sched = Schedule.static(a0, a1, float(_require(cfg, "T")))
    a0, a1 = sched.start
    K = float(cfg.get("K", 1.0))
    noise = NoiseParams(float(cfg.get("kappa", 0.0)), float(cfg.get("kappa_phi", 0.0)))
    dim = int(cfg.get("dim", recommended_dim(sched.max_amplitude()) + 10))
    space = TruncatedSpace(dim)
    psi0 = _initial_state(cfg, space, a0, a1)
    report: dict = {"total_time": sched.total_time, "dim": dim}
    if noise.kappa > 0 or noise.kappa_phi > 0:
        rho0 = psi0 if psi0.ndim == 2 else ket2dm(psi0)
        res = evolve_lindblad(space, sched, rho0, noise, K=K)
        final = res.final_state
        end0, end1 = sched.end
        roots = steady_state_alpha(AcsParams(end0, end1, K), noise)
        peaks = [husimi_peak(final, r) for r in roots]
        report["steady_state_roots"] = [_cjson(r) for r in roots]
        report["husimi_peaks"] = [_cjson(z) for z in peaks]
        report["peak_offsets"] = [float(abs(z - r)) for z, r in zip(peaks, roots)]
        report["trace"] = float(np.real(np.trace(final)))
    else:
        res = evolve_schrodinger(space, sched, psi0, dt=float(cfg.get("dt", 0.2)), K=K)
        final = res.final_state
        report["norm"] = float(np.linalg.norm(final))
    _write_json(run.path("final_state.json"), state_to_json(final))
    res.write_csv(run.path("monitor.csv"))
    report["max_leakage"] = res.max_leakage
    _write_json(run.path("report.json"), report)
    run.extra["truncation"] = dim
    return EXIT_OK


def cmd_prepare(args, run: _Run) -> int:
    if args.alpha0 is None or args.alpha1 is None:
        raise UsageError("/alpha0", "prepare needs --alpha0 and --alpha1")
    a0 = _complex_arg(args.alpha0, "/alpha0")
    a1 = _complex_arg(args.alpha1, "/alpha1")
    plan = plan_preparation(a0, a1, args.parity, budget=args.budget)
    sched = naive_preparation_schedule(a0, a1, args.budget) if args.naive else plan.schedule
    dim = args.dim or recommended_dim(sched.max_amplitude()) + 6
    space = TruncatedSpace(dim)
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    plus, minus = acs_states(space, a0, a1)
    target = plus if args.parity == "plus" else minus
    res = evolve_schrodinger(space, sched, psi0, dt=args.dt, reference=target, converge=not args.naive)
    fid = float(abs(np.vdot(target, res.final_state)) ** 2)
    _write_json(run.path("plan.json"), {
        "theta": plan.theta, "h1": plan.h1, "h2": plan.h2, "k": plan.k,
        "predicted_phase": plan.predicted_phase, "schedule": sched.to_json(), "naive": bool(args.naive),
    })
    _write_json(run.path("final_state.json"), state_to_json(res.final_state))
    res.write_csv(run.path("monitor.csv"))
    _write_json(run.path("report.json"), {"fidelity": fid, "total_time": sched.total_time, "parity": args.parity})
    run.extra["truncation"] = dim
    run.extra["tolerances"] = {"step_halving": 1e-6}
    return EXIT_OK


def cmd_gate(args, run: _Run) -> int:
    req = {"gate": args.name, "params": args.param or [], "alpha": args.alpha, "budget": args.budget}
    try:
        g = compile_request(req)
    except ValueError as exc:
        raise UsageError("/name", str(exc)) from exc
    _write_json(run.path("compiled.json"), g.to_json())
    if args.verify:
        rep = verify_gate(g, dt=args.dt)
        _write_json(run.path("report.json"), rep.to_json())
        run.extra["tolerances"] = {"step_halving": 1e-6}
    return EXIT_OK


_HW_FIELDS = ("E_C", "E_J", "E_J1", "E_J2", "N")


def cmd_circuit(args, run: _Run) -> int:
    cfg = run.config
    if not cfg:
        raise UsageError("", "circuit needs --config")
    try:
        if not args.invert:
            for k in CircuitParams.__dataclass_fields__:
                _require(cfg, k)
            eff = circuit_to_effective(CircuitParams.from_json(cfg))
            _write_json(run.path("effective.json"), eff.to_json())
            return EXIT_OK
        hw_cfg = _require(cfg, "hardware")
        for k in _HW_FIELDS:
            _require(hw_cfg, k, "/hardware")
        hw = HardwareParams(*(float(hw_cfg[k]) if k != "N" else int(hw_cfg[k]) for k in _HW_FIELDS))
        tgt = _require(cfg, "target")
        if "alpha0" in tgt:
            p = AcsParams(_complex_arg(tgt["alpha0"], "/target/alpha0"), _complex_arg(_require(tgt, "alpha1", "/target"), "/target/alpha1"))
            Delta, beta, eta, eps = acs_to_effective(p, hw)
        else:
            Delta = float(_require(tgt, "Delta", "/target"))
            beta, eta, eps = (_complex_arg(_require(tgt, k, "/target"), f"/target/{k}") for k in ("beta", "eta", "epsilon"))
        bound = float(cfg.get("bound", 0.1))
        circ = effective_to_drives(Delta, beta, eta, eps, hw, bound=bound)
    except InfeasibleTargetError as exc:
        _write_json(run.path("infeasible.json"), {"feasible": False, "constraint": exc.constraint, "detail": str(exc)})
        raise
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError("", str(exc)) from exc
    _write_json(run.path("circuit.json"), dict(circ.to_json(), feasible=True))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerrcat", description="Arbitrary cat states in a driven Kerr resonator.")
    ap.add_argument("--version", action="version", version=f"kerrcat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./kerrcat_out)")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common(sub.add_parser("spectrum", help="eigenvalues or gap sweep"))
    p.add_argument("--alpha0")
    p.add_argument("--alpha1")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=20)
    p.add_argument("--dim", type=int)
    p.add_argument("--sweep-d2", dest="sweep_d2")

    p = common(sub.add_parser("wigner", help="Wigner function of a stored state"))
    p.add_argument("--state")
    p.add_argument("--grid", default="-6:6:0.05")
    p.add_argument("--pgrid")

    p = common(sub.add_parser("evolve", help="run a schedule (Schrodinger or Lindblad)"))
    p.add_argument("--config", required=True)

    p = common(sub.add_parser("prepare", help="holonomy-free cat preparation from vacuum"))
    p.add_argument("--alpha0")
    p.add_argument("--alpha1")
    p.add_argument("--parity", choices=["plus", "minus"], default="plus")
    p.add_argument("--budget", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.2)
    p.add_argument("--dim", type=int)
    p.add_argument("--naive", action="store_true", help="use the straight ramp instead of the plan")

    p = common(sub.add_parser("gate", help="compile (and optionally simulate) a single-qubit gate"))
    p.add_argument("--name", required=True)
    p.add_argument("--param", type=float, action="append")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--budget", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.2)
    p.add_argument("--verify", action="store_true")

    p = common(sub.add_parser("circuit", help="circuit <-> rotating-frame parameter map"))
    p.add_argument("--config", required=True)
    p.add_argument("--invert", action="store_true")
    return ap


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "wigner": cmd_wigner,
    "evolve": cmd_evolve,
    "prepare": cmd_prepare,
    "gate": cmd_gate,
    "circuit": cmd_circuit,
}


def _config_of(args) -> dict:
    if getattr(args, "config", None):
        return _load_config(args)
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")}


_VALUE_OPTS = ("--grid", "--pgrid", "--sweep-d2", "--alpha0", "--alpha1", "--param")


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-6:6:0.05" or "-2@30deg" as an option; bind it to its flag
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in "0123456789.":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out or os.environ.get(OUT_ENV) or "kerrcat_out")
    run = None
    try:
        run = _Run(args.command, _config_of(args), out)
        code = _COMMANDS[args.command](args, run)
        return code
    except UsageError as exc:
        print(json.dumps({"error": "usage", "pointer": exc.pointer, "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleTargetError as exc:
        print(json.dumps({"feasible": False, "constraint": exc.constraint, "detail": str(exc)}), file=sys.stderr)
        return EXIT_INFEASIBLE
    except DegenerateTargetError as exc:
        print(json.dumps({"error": "usage", "pointer": "/alpha1", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, ConvergenceError, PrecisionError, ArithmeticError, KerrCatError) as exc:
        print(json.dumps({"error": "numerical", "type": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(json.dumps({"error": "usage", "pointer": "", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    finally:
        if run is not None:
            run.manifest()


if __name__ == "__main__":
    sys.exit(main())
