"""Acceptance checks shared by ``uncrel verify`` and the test-suite.

Each check returns a :class:`CriterionResult`; none of them raise on failure.
The ``fast`` suite uses fewer random draws and skips the 32-level Fock rung.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fock as fk
from . import model as md
from . import optics as op
from . import sampling
from . import symplectic as sp
from .errors import InternalConsistencyError

SUITES = ("fast", "full")
ORACLE_ALPHA = 0.4 + 0.2j


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number}. {self.name}: {self.detail} ({self.seconds:.2f} s)"


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


def _draws(suite: str, full: int, fast: int) -> int:
    return full if suite == "full" else fast


def _vacuum1() -> sp.GaussianState:
    return sp.gaussian_vacuum(sp.QuadBasis(1))


def _random_pairs(rng: np.random.Generator, n: int):
    one = sp.QuadBasis(1)
    for _ in range(n):
        yield sampling.random_gaussian_state(rng, one), sampling.random_gaussian_state(rng, one)


def _random_model_margins(rng: np.random.Generator, n: int, relation: str) -> list[float]:
    margins = []
    one = sp.QuadBasis(1)
    for _ in range(n):
        m = sampling.random_affine_model(rng)
        psi = sampling.random_gaussian_state(rng, one)
        try:
            report = md.evaluate(m, psi)
        except InternalConsistencyError as exc:
            report = exc.report
        margins.append(report.verdicts[relation].margin)
    return margins


def heisenberg_violation(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 1)
    start = time.perf_counter()
    worst_eps, statuses, rhs = 0.0, set(), set()
    for psi, xi in _random_pairs(rng, 100):
        report = md.heisenberg_nd_check(op.noiseless_transducer(xi), psi)
        worst_eps = max(worst_eps, report.epsilon)
        statuses.add(report.verdicts["heisenberg_nd"].status)
        rhs.add(round(report.rhs, 15))
    elapsed = time.perf_counter() - start
    ok = worst_eps <= 1e-12 and statuses == {md.VIOLATED} and rhs == {0.25} and elapsed < 1.0
    return ok, f"max eps={worst_eps:.1e}, verdicts={sorted(statuses)}, rhs={sorted(rhs)}, {elapsed:.2f}s<1s"


def uvur_safety(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 2)
    margins = []
    for psi, xi in _random_pairs(rng, 100):
        margins.append(md.uvur_check(op.noiseless_transducer(xi), psi).verdicts["uvur"].margin)
    margins += _random_model_margins(rng, _draws(suite, 1000, 200), "uvur")
    vac = md.uvur_check(op.noiseless_transducer(), _vacuum1()).verdicts["uvur"]
    ok = (
        min(margins) >= -1e-9
        and abs(vac.lhs - 0.25) <= 1e-12
        and abs(vac.rhs - 0.25) <= 1e-12
        and vac.status == md.EQUALITY
    )
    return ok, f"min margin={min(margins):.3e} over {len(margins)}; vacuum lhs={vac.lhs!r} {vac.status}"


def gndur(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 3)
    margins = _random_model_margins(rng, _draws(suite, 1000, 200), "gndur")
    vac = md.gndur_check(op.noiseless_transducer(), _vacuum1()).verdicts["gndur"]
    ok = min(margins) >= -1e-9 and abs(vac.lhs - 0.35355339) <= 1e-8 and vac.rhs == 0.25
    return ok, f"min margin={min(margins):.3e} over {len(margins)}; vacuum lhs={vac.lhs:.10f}"


def bae_product(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 4)
    worst, independent = 0.0, True
    psi = sampling.random_gaussian_state(rng, sp.QuadBasis(1))
    for gain in np.logspace(-1, 1, 50):
        m = op.bae_amplifier(float(gain))
        for state in (_vacuum1(), psi):
            report = md.heisenberg_nd_check(m, state)
            worst = max(worst, abs(report.product - 0.25))
        independent &= bool(md.independent_intervention_test(m))
    unit = md.evaluate(op.bae_amplifier(1.0), _vacuum1())
    ok = (
        worst <= 1e-12
        and independent
        and abs(unit.epsilon - 0.5) <= 1e-12
        and abs(unit.eta - 0.5) <= 1e-12
    )
    return ok, (
        f"max |eps*eta-0.25|={worst:.1e}, independent={independent}, "
        f"G=1 eps={unit.epsilon!r} eta={unit.eta!r}"
    )


def parametric_realization(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 5)
    dev = op.transducer_deviation(*op.transducer_params())
    worst = 0.0
    for r in rng.uniform(-1, 1, 20):
        theta = op.constrained_theta(r)
        worst = max(
            worst,
            op.bae_realization_check(r, theta).max_deviation,
            op.conjugate_bae_check(r, theta).max_deviation,
        )
    ok = dev < 1e-12 and worst < 1e-10
    return ok, f"five-step vs transducer {dev:.1e}<1e-12; U-/U+ max deviation {worst:.1e}<1e-10"


def shipped_models() -> list[md.MeasurementModel]:
    r, theta = op.transducer_params()
    models = [op.bae_amplifier(g) for g in (0.1, 1.0, 2.0, 10.0)]
    models += [op.noiseless_transducer(), op.five_step_model(r, theta)]
    models += [op.noiseless_transducer(reference="X"), op.bae_amplifier(2.0, reference="X")]
    return models


def commutation_identity(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 6)
    models = shipped_models() + [sampling.random_affine_model(rng) for _ in range(100)]
    worst = max(md.commutation_identity_residual(m) for m in models)
    return worst < 1e-10, f"max residual={worst:.1e} over {len(models)} models"


def oracle_errors(dims: tuple[int, ...]) -> dict[str, list[tuple[float, float]]]:
    """``(|d eps|, |d eta|)`` per dim for transducer and BAE(G=1)."""
    psi_aff = sp.gaussian_coherent(sp.QuadBasis(1), ORACLE_ALPHA)
    errors: dict[str, list[tuple[float, float]]] = {}
    for spec in (op.DeviceSpec("transducer"), op.DeviceSpec("bae", {"gain": 1.0})):
        ref = md.evaluate(op.affine_model(spec), psi_aff)
        rows = []
        for dim in dims:
            psi = fk.coherent_state(fk.FockSpace(dim, 1), ORACLE_ALPHA)
            rep = md.evaluate(op.fock_model(spec, dim), psi)
            rows.append((abs(rep.epsilon - ref.epsilon), abs(rep.eta - ref.eta)))
        errors[spec.name] = rows
    return errors


def oracle_equivalence(seed: int, suite: str) -> tuple[bool, str]:
    dims = (16, 24, 32) if suite == "full" else (16, 24)
    start = time.perf_counter()
    errors = oracle_errors(dims)
    elapsed = time.perf_counter() - start
    at24 = {k: max(v[dims.index(24)]) for k, v in errors.items()}
    monotone = all(
        rows[i + 1][q] <= rows[i][q] for rows in errors.values() for i in range(len(rows) - 1) for q in (0, 1)
    )
    ok = max(at24.values()) < 1e-3 and monotone and elapsed < 30.0
    detail = ", ".join(f"{k}@24={v:.1e}" for k, v in at24.items())
    return ok, f"{detail}; non-increasing over {dims}={monotone}; {elapsed:.1f}s<30s"


def born_precision(seed: int, suite: str) -> tuple[bool, str]:
    dim = 24
    space = fk.FockSpace(dim, 1)
    states = {
        "coherent(0.4+0.2i)": fk.coherent_state(space, ORACLE_ALPHA),
        "squeezed(0.3)": fk.squeezed_vacuum(space, 0.3),
        "number(1)": fk.fock_basis_state(space, 1),
    }
    m = op.fock_model(op.DeviceSpec("transducer"), dim)
    worst, clean = 0.0, True
    for psi in states.values():
        clean &= psi.tail < 1e-6 and psi.edge_population < 1e-6
        worst = max(worst, fk.born_test(m, psi, 4).max_abs_diff)
    return worst < 1e-3 and clean, f"max moment diff={worst:.1e} over {len(states)} states, tails<1e-6={clean}"


def robertson(seed: int, suite: str) -> tuple[bool, str]:
    rng = _rng(seed, 9)
    basis = sp.QuadBasis(2)
    margins = []
    for _ in range(_draws(suite, 1000, 200)):
        state = sampling.random_gaussian_state(rng, basis)
        o1 = sampling.random_observable(rng, basis, range(2))
        o2 = sampling.random_observable(rng, basis, range(2))
        try:
            margins.append(md.robertson_check(o1, o2, state).margin)
        except InternalConsistencyError as exc:
            margins.append(exc.report.margin)
    vac = md.robertson_check(
        sp.LinearObservable.quadrature(basis, "X", 0),
        sp.LinearObservable.quadrature(basis, "Y", 0),
        sp.gaussian_vacuum(basis),
    )
    ok = min(margins) >= -1e-9 and vac.status == md.EQUALITY and abs(vac.lhs - 0.25) <= 1e-12
    return ok, f"min margin={min(margins):.3e} over {len(margins)}; vacuum {vac.status} at {vac.lhs!r}"


CRITERIA: list[tuple[int, str, Callable[[int, str], tuple[bool, str]]]] = [
    (1, "Heisenberg bound violated by the transducer", heisenberg_violation),
    (2, "UVUR holds everywhere", uvur_safety),
    (3, "GNDUR holds everywhere", gndur),
    (4, "BAE noise-disturbance product", bae_product),
    (5, "five-step parametric realization", parametric_realization),
    (6, "noise/disturbance commutation identity", commutation_identity),
    (7, "Fock oracle equivalence", oracle_equivalence),
    (8, "Born-formula precision of the transducer", born_precision),
    (9, "Robertson relation", robertson),
]


def run_criterion(number: int, seed: int = 7, suite: str = "full") -> CriterionResult:
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    _, name, check = next(c for c in CRITERIA if c[0] == number)
    start = time.perf_counter()
    try:
        passed, detail = check(seed, suite)
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - start)


def run_all(seed: int = 7, suite: str = "full") -> list[CriterionResult]:
    return [run_criterion(number, seed, suite) for number, _, _ in CRITERIA]


def total_ok(results: list[CriterionResult]) -> bool:
    return all(r.passed for r in results)
