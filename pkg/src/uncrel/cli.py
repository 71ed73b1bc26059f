"""``uncrel``: evaluate noise-disturbance relations for optical measuring devices.

Subcommands::

    uncrel run    --device transducer --system vacuum --probe vacuum --backend affine
    uncrel sweep  --device bae --sweep gain:0.1:10:50:log --out bae.json
    uncrel verify --suite full --seed 7

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 a relation that
is a theorem (UVUR, GNDUR, Robertson) came out violated, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import acceptance
from . import fock as fk
from . import model as md
from . import optics as op
from . import symplectic as sp
from .errors import InternalConsistencyError, NumericError

log = logging.getLogger("uncrel")

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3
EXIT_NUMERIC = 4

CSV_HEADER = ["param", "epsilon", "eta", "product", "rhs", "sigma_a", "sigma_b", "uvur_lhs", "gndur_lhs"]
SWEEP_AXES = {
    "gain": ("bae",),
    "r": ("five_step",),
    "theta": ("five_step",),
    "squeeze": op.DEVICES,
    "probe-squeeze": op.DEVICES,
}
DEFAULT_FOCK_DIM_MAX = 64


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class StateSpec:
    kind: str = "vacuum"
    alpha: complex = 0j
    squeeze: float = 0.0
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("vacuum", "coherent", "squeezed"):
            raise UsageError(f"unknown state kind {self.kind!r}")
        if not 0.0 <= self.angle < math.pi:
            raise UsageError(f"squeeze angle must lie in [0, pi), got {self.angle}")

    def gaussian(self) -> sp.GaussianState:
        basis = sp.QuadBasis(1)
        if self.kind == "coherent":
            return sp.gaussian_coherent(basis, self.alpha)
        if self.kind == "squeezed":
            return sp.gaussian_squeezed_mode(basis, 0, self.squeeze, self.angle)
        return sp.gaussian_vacuum(basis)

    def fock(self, dim: int) -> fk.FockState:
        space = fk.FockSpace(dim, 1)
        if self.kind == "coherent":
            return fk.coherent_state(space, self.alpha)
        if self.kind == "squeezed":
            return fk.squeezed_vacuum(space, self.squeeze, self.angle)
        return fk.fock_basis_state(space, 0)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "coherent":
            out["alpha"] = format_complex(self.alpha)
        if self.kind == "squeezed":
            out.update(squeeze=self.squeeze, angle=self.angle)
        return out


@dataclass(frozen=True)
class Sweep:
    param: str
    lo: float
    hi: float
    count: int
    log: bool = False

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.lo]
        if self.log:
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.count)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.count)]


@dataclass(frozen=True)
class Scenario:
    device: str
    gain: float = 1.0
    r: float | None = None
    theta: float | None = None
    reference: str = "Y"
    system: StateSpec = field(default_factory=StateSpec)
    probe: StateSpec = field(default_factory=StateSpec)
    backend: str = "affine"
    fock_dim: int = fk.DEFAULT_DIM
    sweep: Sweep | None = None
    seed: int = 0

    def device_spec(self) -> op.DeviceSpec:
        if self.device == "bae":
            return op.DeviceSpec("bae", {"gain": self.gain})
        if self.device == "transducer":
            return op.DeviceSpec("transducer")
        r = op.transducer_params()[0] if self.r is None else self.r
        theta = op.constrained_theta(r) if self.theta is None else self.theta
        return op.DeviceSpec("five_step", {"r": r, "theta": theta})

    def at(self, value: float) -> Scenario:
        """The scenario with the sweep parameter set to ``value``."""
        param = self.sweep.param
        if param == "gain":
            return replace(self, gain=value)
        if param == "r":
            return replace(self, r=value)
        if param == "theta":
            return replace(self, theta=value)
        if param == "squeeze":
            return replace(self, system=replace(self.system, kind="squeezed", squeeze=value))
        return replace(self, probe=replace(self.probe, kind="squeezed", squeeze=value))

    def to_json(self) -> dict[str, Any]:
        out = {
            "device": self.device_spec().name,
            "parameters": self.device_spec().parameters,
            "reference": f"{self.reference}_a",
            "system": self.system.to_json(),
            "probe": self.probe.to_json(),
            "backend": self.backend,
            "seed": self.seed,
        }
        if self.backend != "affine":
            out["fock_dim"] = self.fock_dim
        if self.sweep is not None:
            out["sweep"] = asdict(self.sweep)
        return out


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use e.g. 0.4+0.2i)")


def parse_sweep(text: str) -> Sweep:
    parts = text.split(":")
    if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "log"):
        raise argparse.ArgumentTypeError("sweep must look like PARAM:LO:HI:COUNT[:log]")
    param = parts[0]
    if param not in SWEEP_AXES:
        raise argparse.ArgumentTypeError(f"unknown sweep parameter {param!r}; choose from {sorted(SWEEP_AXES)}")
    try:
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sweep range in {text!r}")
    is_log = len(parts) == 5
    if not (math.isfinite(lo) and math.isfinite(hi)) or count < 1:
        raise argparse.ArgumentTypeError("sweep range must be finite with COUNT >= 1")
    if is_log and (lo <= 0 or hi <= 0):
        raise argparse.ArgumentTypeError("log sweeps need positive endpoints")
    return Sweep(param, lo, hi, count, is_log)


# --- evaluation ------------------------------------------------------------------


def _point(scenario: Scenario, backend: str) -> tuple[dict[str, Any], bool]:
    """Evaluate one scenario on one backend; returns (point, consistent)."""
    spec = scenario.device_spec()
    if backend == "affine":
        m = op.affine_model(spec, scenario.probe.gaussian(), scenario.reference)
        psi = scenario.system.gaussian()
    else:
        m = op.fock_model(spec, scenario.fock_dim, scenario.probe.fock(scenario.fock_dim), scenario.reference)
        psi = scenario.system.fock(scenario.fock_dim)
    consistent = True
    try:
        report = md.evaluate(m, psi)
    except InternalConsistencyError as exc:
        report, consistent = exc.report, False
        log.error("%s", exc)
    point = {
        "epsilon": report.epsilon,
        "eta": report.eta,
        "sigma_a": report.sigma_a,
        "sigma_b": report.sigma_b,
        "rhs": report.rhs,
        "correlation_term": report.correlation_term,
        "product": report.product,
        "uvur_lhs": report.uvur_lhs,
        "gndur_lhs": report.gndur_lhs,
        "verdicts": {k: v.status for k, v in report.verdicts.items()},
        "margins": {k: v.margin for k, v in report.verdicts.items()},
        "warnings": list(report.warnings),
    }
    if spec.name == "five_step":
        point["transducer_deviation"] = op.transducer_deviation(spec.parameters["r"], spec.parameters["theta"])
    return point, consistent


ORACLE_KEYS = ("epsilon", "eta", "sigma_a", "sigma_b", "rhs", "correlation_term")


def run(scenario: Scenario, timing: bool = False) -> tuple[dict[str, Any], bool]:
    """Build the report document; the flag is False if any theorem was violated."""
    start = time.perf_counter()
    if scenario.sweep is None:
        grid: list[tuple[float | None, Scenario]] = [(None, scenario)]
    else:
        grid = [(v, scenario.at(v)) for v in scenario.sweep.values()]

    points, consistent, max_dev = [], True, 0.0
    for value, sc in grid:
        primary = "fock" if scenario.backend == "fock" else "affine"
        point, ok = _point(sc, primary)
        consistent &= ok
        if scenario.backend == "both":
            fock_point, ok = _point(sc, "fock")
            consistent &= ok
            point["fock"] = fock_point
            point["warnings"] = point["warnings"] + fock_point["warnings"]
            max_dev = max(max_dev, *(abs(point[k] - fock_point[k]) for k in ORACLE_KEYS))
        point["param"] = value
        points.append(point)

    document: dict[str, Any] = {
        "version": __version__,
        "scenario": scenario.to_json(),
        "points": points,
        "oracle": {"max_abs_dev": max_dev} if scenario.backend == "both" else None,
        "timing_ms": round(1000 * (time.perf_counter() - start), 3) if timing else None,
    }
    _check_finite(document)
    return document, consistent


def _check_finite(obj: Any) -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise NumericError("report contains a non-finite number")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v)
    elif isinstance(obj, list):
        for v in obj:
            _check_finite(v)


def to_csv(document: dict[str, Any]) -> str:
    points = document["points"]
    header = list(CSV_HEADER)
    if points and "transducer_deviation" in points[0]:
        header.append("transducer_deviation")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for p in points:
        writer.writerow(["" if p[k] is None else f"{p[k]:.17g}" for k in header])
    return buf.getvalue()


def dumps(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


# --- argument handling ---------------------------------------------------------


def _add_state_flags(parser: argparse.ArgumentParser, prefix: str, label: str) -> None:
    dash = f"{prefix}-" if prefix else ""
    dest = f"{prefix}_" if prefix else ""
    parser.add_argument(f"--{dash}alpha", dest=f"{dest}alpha", type=parse_complex, default=None,
                        help=f"coherent amplitude of the {label}, e.g. 0.4+0.2i")
    parser.add_argument(f"--{dash}squeeze", dest=f"{dest}squeeze", type=float, default=None,
                        help=f"squeeze parameter of the {label}")
    parser.add_argument(f"--{dash}angle", dest=f"{dest}angle", type=float, default=None,
                        help=f"squeezed-quadrature angle of the {label}, in [0, pi)")


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON file of flag defaults")
    parser.add_argument("--device", choices=["bae", "transducer", "five_step"], default=None)
    parser.add_argument("--gain", type=float, default=None, help="BAE gain G > 0")
    parser.add_argument("--r", type=float, default=None, help="five_step squeezing parameter")
    parser.add_argument("--theta", type=float, default=None,
                        help="five_step rotator angle (default: sin 2theta = tanh r)")
    parser.add_argument("--reference", choices=["X", "Y"], default=None,
                        help="system quadrature used as the disturbed observable B (default Y)")
    parser.add_argument("--system", choices=["vacuum", "coherent", "squeezed"], default=None)
    _add_state_flags(parser, "", "system")
    parser.add_argument("--probe", choices=["vacuum", "coherent", "squeezed"], default=None)
    _add_state_flags(parser, "probe", "probe")
    parser.add_argument("--backend", choices=["affine", "fock", "both"], default=None)
    parser.add_argument("--fock-dim", type=int, default=None)
    parser.add_argument("--sweep", type=parse_sweep, default=None, metavar="PARAM:LO:HI:COUNT[:log]")
    parser.add_argument("--out", type=Path, default=None, help="JSON report path (default stdout)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uncrel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"uncrel {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run_cmd = sub.add_parser("run", help="evaluate one scenario (or a sweep) and emit JSON")
    _add_scenario_flags(run_cmd)

    sweep_cmd = sub.add_parser("sweep", help="evaluate a sweep and emit JSON plus CSV")
    _add_scenario_flags(sweep_cmd)
    sweep_cmd.add_argument("--csv", type=Path, default=None,
                           help="CSV path (default: --out with .csv suffix, else stdout)")

    verify_cmd = sub.add_parser("verify", help="run the acceptance criteria")
    verify_cmd.add_argument("--suite", choices=acceptance.SUITES, default="fast")
    verify_cmd.add_argument("--seed", type=int, default=7)
    return parser


def _load_config(path: Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _state_spec(kind: str | None, alpha, squeeze, angle) -> StateSpec:
    if kind is None:
        kind = "coherent" if alpha is not None else "squeezed" if squeeze is not None else "vacuum"
    if isinstance(alpha, str):
        alpha = parse_complex(alpha)
    return StateSpec(kind, alpha or 0j, float(squeeze or 0.0), float(angle or 0.0))


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    config = _load_config(args.config)
    unknown = set(config) - set(vars(args))
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")

    def get(name: str, default=None):
        value = getattr(args, name)
        if value is None:
            value = config.get(name, default)
        return value

    device = get("device")
    if device is None:
        raise UsageError("--device is required")
    sweep = get("sweep")
    if isinstance(sweep, str):
        sweep = parse_sweep(sweep)
    if sweep is not None and device not in SWEEP_AXES[sweep.param]:
        raise UsageError(f"sweep axis {sweep.param!r} does not apply to device {device!r}")
    gain = float(get("gain", 1.0))
    if not gain > 0:
        raise UsageError("--gain must be positive")
    theta = get("theta")
    if theta is not None and not -math.pi / 2 < theta < math.pi / 2:
        raise UsageError("--theta must lie in (-pi/2, pi/2)")

    backend = get("backend", "affine")
    fock_dim = int(get("fock_dim", fk.DEFAULT_DIM))
    cap = int(os.environ.get("UNCREL_FOCK_DIM_MAX", DEFAULT_FOCK_DIM_MAX))
    if not 4 <= fock_dim <= cap:
        raise UsageError(f"--fock-dim must lie in [4, {cap}] (UNCREL_FOCK_DIM_MAX)")

    return Scenario(
        device=device,
        gain=gain,
        r=get("r"),
        theta=theta,
        reference=get("reference", "Y"),
        system=_state_spec(get("system"), get("alpha"), get("squeeze"), get("angle")),
        probe=_state_spec(get("probe"), get("probe_alpha"), get("probe_squeeze"), get("probe_angle")),
        backend=backend,
        fock_dim=fock_dim,
        sweep=sweep,
        seed=int(get("seed", 0)),
    )


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _verify(args: argparse.Namespace) -> int:
    results = []
    for number, _, _ in acceptance.CRITERIA:
        result = acceptance.run_criterion(number, args.seed, args.suite)
        print(result.line(), flush=True)
        results.append(result)
    failed = [r for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    if failed:
        names = ", ".join(f"{r.number}. {r.name}" for r in failed)
        print(f"FAILED ({len(failed)}/{len(results)}): {names} [{total:.1f} s]")
        return EXIT_FAILED
    print(f"all {len(results)} criteria passed ({args.suite} suite, seed {args.seed}) [{total:.1f} s]")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="uncrel: %(levelname)s: %(message)s")
    if args.command == "verify":
        return _verify(args)

    try:
        scenario = scenario_from_args(args)
        if args.command == "sweep" and scenario.sweep is None:
            raise UsageError("sweep needs --sweep PARAM:LO:HI:COUNT[:log]")
        document, consistent = run(scenario, timing=args.timing)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        parser.error(str(exc))
    except ValueError as exc:  # parameter validation inside the library
        parser.error(str(exc))
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"uncrel: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    _write(dumps(document), args.out)
    if args.command == "sweep":
        csv_path = args.csv or (args.out.with_suffix(".csv") if args.out else None)
        _write(to_csv(document), csv_path)
    if not consistent:
        print("uncrel: internal-consistency error: a universally valid relation was violated",
              file=sys.stderr)
        return EXIT_INCONSISTENT
    return 0


if __name__ == "__main__":
    sys.exit(main())
