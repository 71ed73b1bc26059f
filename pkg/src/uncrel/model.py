"""Measurement models, noise and disturbance, and the uncertainty relations.

A model is the state-independent part of an indirect measurement: probe
preparation ``xi``, interaction ``U``, probe observable ``M``, the measured
system observable ``A`` and a reference system observable ``B``. The system
state ``psi`` is passed separately to every evaluator.

Two backends share this module. The affine backend uses
:mod:`uncrel.symplectic` and is exact; the Fock backend uses dense matrices
from :mod:`uncrel.fock` and is limited by truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import fock as fk
from . import symplectic as sp
from .errors import InternalConsistencyError

AFFINE = "affine"
FOCK = "fock"

TOL_RELATION = {AFFINE: 1e-9, FOCK: 1e-4}
# commutators of system-dependent N, D with system quadratures are O(1/2)
TOL_INTERVENTION_FOCK = 1e-3

HOLDS = "holds"
EQUALITY = "equality"
VIOLATED = "violated"

RELATIONS = ("robertson", "heisenberg_nd", "uvur", "gndur")

Observable = Union[sp.LinearObservable, fk.FockOperator]
State = Union[sp.GaussianState, fk.FockState]


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """The apparatus ``(xi, U, M)`` together with the pair ``(A, B)``.

    All observables live on the composite system+probe space; the first
    ``n_system_modes`` modes belong to the system. ``probe`` is the probe's own
    state (Gaussian marginal or Fock vector).
    """

    interaction: sp.SymplecticTransform | fk.FockOperator
    probe: State
    meter: Observable
    measured: Observable
    reference: Observable
    n_system_modes: int = 1
    name: str = ""

    def __post_init__(self) -> None:
        kinds = {
            _backend_of(x)
            for x in (self.interaction, self.probe, self.meter, self.measured, self.reference)
        }
        if len(kinds) != 1:
            raise ValueError(f"model mixes backends: {sorted(kinds)}")
        if self.backend == AFFINE:
            self._validate_affine()
        else:
            self._validate_fock()

    @property
    def backend(self) -> str:
        return _backend_of(self.interaction)

    @property
    def tol(self) -> float:
        return TOL_RELATION[self.backend]

    def _validate_affine(self) -> None:
        basis = self.interaction.basis
        for obs in (self.meter, self.measured, self.reference):
            if obs.basis != basis:
                raise ValueError("observables must share the interaction's basis")
        if self.probe.n_modes + self.n_system_modes != basis.n_modes:
            raise ValueError("probe and system modes do not add up to the interaction's modes")
        system = range(self.n_system_modes)
        probe = range(self.n_system_modes, basis.n_modes)
        if np.any(self.meter.mode_coeffs(system)):
            raise ValueError("probe observable M must not act on system modes")
        for label, obs in (("A", self.measured), ("B", self.reference)):
            if np.any(obs.mode_coeffs(probe)):
                raise ValueError(f"observable {label} must act on system modes only")

    def _validate_fock(self) -> None:
        space = self.interaction.space
        for op in (self.meter, self.measured, self.reference):
            if op.space != space:
                raise ValueError("operators must share the interaction's Fock space")
            if not op.is_hermitian():
                raise ValueError("observables must be Hermitian")
        if self.probe.space.n_modes + self.n_system_modes != space.n_modes:
            raise ValueError("probe and system modes do not add up to the interaction's modes")
        if self.probe.space.dim_per_mode != space.dim_per_mode:
            raise ValueError("probe state cutoff differs from the interaction's")
        system = range(self.n_system_modes)
        probe = range(self.n_system_modes, space.n_modes)
        if not fk.is_local(self.meter, probe):
            raise ValueError("probe observable M must act on probe modes only")
        for label, op in (("A", self.measured), ("B", self.reference)):
            if not fk.is_local(op, system):
                raise ValueError(f"observable {label} must act on system modes only")

    def joint_state(self, psi: State) -> State:
        if _backend_of(psi) != self.backend:
            raise ValueError(f"{self.backend} model cannot evaluate a {_backend_of(psi)} state")
        if self.backend == AFFINE:
            if psi.n_modes != self.n_system_modes:
                raise ValueError("system state has the wrong number of modes")
            return sp.product_state(psi, self.probe)
        if psi.space.n_modes != self.n_system_modes:
            raise ValueError("system state has the wrong number of modes")
        return fk.tensor(psi, self.probe)


def _backend_of(obj) -> str:
    if isinstance(
        obj, (sp.SymplecticTransform, sp.GaussianState, sp.LinearObservable)
    ):
        return AFFINE
    if isinstance(obj, (fk.FockOperator, fk.FockState)):
        return FOCK
    raise TypeError(f"not a model component: {type(obj).__name__}")


def heisenberg_out(m: MeasurementModel, obs: Observable) -> Observable:
    """``U^dag O U``."""
    if m.backend == AFFINE:
        return sp.apply_heisenberg(m.interaction, obs)
    return fk.heisenberg(m.interaction, obs)


def noise_operator(m: MeasurementModel) -> Observable:
    """``N(A) = M_out - A_in``."""
    return heisenberg_out(m, m.meter) - m.measured


def disturbance_operator(m: MeasurementModel) -> Observable:
    """``D(B) = B_out - B_in``."""
    return heisenberg_out(m, m.reference) - m.reference


# --- moments and commutators shared by both backends -------------------------


def _second_moment(obs: Observable, state: State) -> float:
    if isinstance(obs, sp.LinearObservable):
        return sp.second_moment(obs, state)
    v = obs.apply(state)
    return float(np.vdot(v, v).real)


def _mean(obs: Observable, state: State) -> float:
    if isinstance(obs, sp.LinearObservable):
        return sp.mean(obs, state)
    return fk.expectation(obs, state).real


def rms(obs: Observable, state: State) -> float:
    """``<O^2>^{1/2}``."""
    return math.sqrt(max(_second_moment(obs, state), 0.0))


def std(obs: Observable, state: State) -> float:
    if isinstance(obs, sp.LinearObservable):
        return math.sqrt(sp.variance(obs, state))
    return math.sqrt(max(_second_moment(obs, state) - _mean(obs, state) ** 2, 0.0))


def commutator_expectation(o1: Observable, o2: Observable, state: State) -> float:
    """``c`` with ``<[o1, o2]> = i c`` on ``state``."""
    if isinstance(o1, sp.LinearObservable):
        return sp.commutator_scalar(o1, o2)
    v1, v2 = o1.apply(state), o2.apply(state)
    # <[o1,o2]> = <o1 psi|o2 psi> - <o2 psi|o1 psi> = 2i Im<o1 psi|o2 psi>
    return 2.0 * float(np.vdot(v1, v2).imag)


def noise(m: MeasurementModel, psi: State) -> float:
    """``epsilon(A) = <(M_out - A_in)^2>^{1/2}`` on ``psi (x) xi``."""
    joint = m.joint_state(psi)
    if m.backend == FOCK:
        return float(np.linalg.norm(_fock_vectors(m, joint)["N"]))
    return rms(noise_operator(m), joint)


def disturbance(m: MeasurementModel, psi: State) -> float:
    """``eta(B) = <(B_out - B_in)^2>^{1/2}`` on ``psi (x) xi``."""
    joint = m.joint_state(psi)
    if m.backend == FOCK:
        return float(np.linalg.norm(_fock_vectors(m, joint)["D"]))
    return rms(disturbance_operator(m), joint)


# --- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    lhs: float
    rhs: float
    margin: float
    status: str

    @classmethod
    def judge(cls, lhs: float, rhs: float, tol: float) -> Verdict:
        margin = lhs - rhs
        if margin > tol:
            status = HOLDS
        elif margin >= -tol:
            status = EQUALITY
        else:
            status = VIOLATED
        return cls(lhs, rhs, margin, status)

    @property
    def satisfied(self) -> bool:
        return self.status != VIOLATED

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "status": self.status}


@dataclass(frozen=True)
class RelationReport:
    epsilon: float
    eta: float
    sigma_a: float
    sigma_b: float
    rhs: float
    correlation_term: float
    backend: str
    tol: float
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def product(self) -> float:
        return self.epsilon * self.eta

    @property
    def uvur_lhs(self) -> float:
        return self.product + self.correlation_term

    @property
    def gndur_lhs(self) -> float:
        return self.product + self.epsilon * self.sigma_b + self.sigma_a * self.eta

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "sigma_a": self.sigma_a,
            "sigma_b": self.sigma_b,
            "rhs": self.rhs,
            "correlation_term": self.correlation_term,
            "verdicts": {k: v.status for k, v in self.verdicts.items()},
            "margins": {k: v.margin for k, v in self.verdicts.items()},
            "backend": self.backend,
            "tol": self.tol,
            "warnings": list(self.warnings),
        }


def robertson_check(a: Observable, b: Observable, state: State, tol: float | None = None) -> Verdict:
    """``sigma(A) sigma(B) >= |<[A, B]>| / 2``; raises if violated beyond ``tol``."""
    if tol is None:
        tol = TOL_RELATION[_backend_of(state)]
    verdict = Verdict.judge(
        std(a, state) * std(b, state), abs(commutator_expectation(a, b, state)) / 2, tol
    )
    if not verdict.satisfied:
        raise InternalConsistencyError(
            f"Robertson relation violated by {-verdict.margin:.3e}", verdict
        )
    return verdict


def _fock_vectors(m: MeasurementModel, joint: fk.FockState) -> dict[str, np.ndarray]:
    """``N|Psi>``, ``D|Psi>``, ``A|Psi>``, ``B|Psi>`` without forming ``U^dag O U``."""
    u = m.interaction.matrix
    psi = joint.amplitudes
    phi = u @ psi
    a_vec = m.measured.matrix @ psi
    b_vec = m.reference.matrix @ psi
    return {
        "N": u.conj().T @ (m.meter.matrix @ phi) - a_vec,
        "D": u.conj().T @ (m.reference.matrix @ phi) - b_vec,
        "A": a_vec,
        "B": b_vec,
    }


def _base_report(m: MeasurementModel, psi: State) -> RelationReport:
    joint = m.joint_state(psi)
    a, b = m.measured, m.reference
    if m.backend == AFFINE:
        n_op, d_op = noise_operator(m), disturbance_operator(m)
        corr = sp.commutator_scalar(n_op, b) + sp.commutator_scalar(a, d_op)
        return RelationReport(
            epsilon=rms(n_op, joint),
            eta=rms(d_op, joint),
            sigma_a=std(a, joint),
            sigma_b=std(b, joint),
            rhs=abs(sp.commutator_scalar(a, b)) / 2,
            correlation_term=abs(corr) / 2,
            backend=m.backend,
            tol=m.tol,
        )

    v = _fock_vectors(m, joint)
    # <[X, Y]> = 2i Im<X psi|Y psi> for Hermitian X, Y
    comm = lambda x, y: 2.0 * float(np.vdot(v[x], v[y]).imag)  # noqa: E731
    psi_amp = joint.amplitudes
    mean_a = float(np.vdot(psi_amp, v["A"]).real)
    mean_b = float(np.vdot(psi_amp, v["B"]).real)
    return RelationReport(
        epsilon=float(np.linalg.norm(v["N"])),
        eta=float(np.linalg.norm(v["D"])),
        sigma_a=math.sqrt(max(float(np.vdot(v["A"], v["A"]).real) - mean_a**2, 0.0)),
        sigma_b=math.sqrt(max(float(np.vdot(v["B"], v["B"]).real) - mean_b**2, 0.0)),
        rhs=abs(comm("A", "B")) / 2,
        correlation_term=abs(comm("N", "B") + comm("A", "D")) / 2,
        backend=m.backend,
        tol=m.tol,
        warnings=tuple(joint.warnings),
    )


def _judge(report: RelationReport, names: tuple[str, ...]) -> RelationReport:
    lhs = {
        "robertson": report.sigma_a * report.sigma_b,
        "heisenberg_nd": report.product,
        "uvur": report.uvur_lhs,
        "gndur": report.gndur_lhs,
    }
    verdicts = dict(report.verdicts)
    for name in names:
        verdicts[name] = Verdict.judge(lhs[name], report.rhs, report.tol)
    out = RelationReport(**{**report.__dict__, "verdicts": verdicts})
    for name in ("robertson", "uvur", "gndur"):
        if name in names and not verdicts[name].satisfied:
            raise InternalConsistencyError(
                f"{name} relation violated by {-verdicts[name].margin:.3e} "
                f"({report.backend} backend)",
                out,
            )
    return out


def heisenberg_nd_check(m: MeasurementModel, psi: State) -> RelationReport:
    """``epsilon(A) eta(B) >= |<[A, B]>| / 2``. A violation is a legitimate outcome."""
    return _judge(_base_report(m, psi), ("heisenberg_nd",))


def uvur_check(m: MeasurementModel, psi: State) -> RelationReport:
    """``epsilon eta + |<[N(A), B_in]> + <[A_in, D(B)]>| / 2 >= |<[A, B]>| / 2``.

    Holds for every model; a violation raises :class:`InternalConsistencyError`.
    """
    return _judge(_base_report(m, psi), ("uvur",))


def gndur_check(m: MeasurementModel, psi: State) -> RelationReport:
    """``epsilon eta + epsilon sigma(B) + sigma(A) eta >= |<[A, B]>| / 2``; raises if violated."""
    return _judge(_base_report(m, psi), ("gndur",))


def evaluate(m: MeasurementModel, psi: State) -> RelationReport:
    """All four relations on one ``(model, psi)`` point."""
    return _judge(_base_report(m, psi), RELATIONS)


# Commutators of observables linear in quadratures are c-numbers, so the vacuum
# element already determines them; it is also the element truncation touches last.
LOW_CUTOFF = 1


def commutation_identity_residual(m: MeasurementModel, cutoff: int | None = None) -> float:
    """Size of ``[N,D] + [N,B_in] + [A_in,D] + [A_in,B_in]``, which must vanish.

    Affine models give a scalar; Fock models the max-norm of the operator
    restricted to basis states with all levels below ``cutoff``.
    """
    n_op, d_op = noise_operator(m), disturbance_operator(m)
    a, b = m.measured, m.reference
    pairs = ((n_op, d_op), (n_op, b), (a, d_op), (a, b))
    if m.backend == AFFINE:
        return abs(sum(sp.commutator_scalar(x, y) for x, y in pairs))
    total = sum(x.matrix @ y.matrix - y.matrix @ x.matrix for x, y in pairs)
    space = m.interaction.space
    idx = space.low_indices(cutoff or LOW_CUTOFF)
    return float(np.max(np.abs(total[np.ix_(idx, idx)])))


@dataclass(frozen=True)
class InterventionResult:
    independent: bool
    witness: dict[str, dict[str, float]]

    def __bool__(self) -> bool:
        return self.independent


def independent_intervention_test(
    m: MeasurementModel, tol: float | None = None, cutoff: int | None = None
) -> InterventionResult:
    """Whether ``N(A)`` and ``D(B)`` act on the probe alone.

    The witness maps ``"N"``/``"D"`` to the offending system components: the
    coefficients (affine) or commutator norms with system quadratures (Fock).
    """
    n_op, d_op = noise_operator(m), disturbance_operator(m)
    witness: dict[str, dict[str, float]] = {}
    if m.backend == AFFINE:
        tol = sp.TOL_SYMPLECTIC if tol is None else tol
        labels = m.interaction.basis.ordering[: 2 * m.n_system_modes]
        for key, op in (("N", n_op), ("D", d_op)):
            coeffs = op.mode_coeffs(range(m.n_system_modes))
            bad = {lab: float(c) for lab, c in zip(labels, coeffs) if abs(c) > tol}
            if bad:
                witness[key] = bad
    else:
        tol = TOL_INTERVENTION_FOCK if tol is None else tol
        space = m.interaction.space
        idx = space.low_indices(cutoff or LOW_CUTOFF)
        for key, op in (("N", n_op), ("D", d_op)):
            bad = {}
            for mode in range(m.n_system_modes):
                for label, q in zip("XY", fk.quadratures(space, mode)):
                    c = op.matrix @ q.matrix - q.matrix @ op.matrix
                    size = float(np.max(np.abs(c[np.ix_(idx, idx)])))
                    if size > tol:
                        bad[f"[{key},{label}_{mode + 1}]"] = size
            if bad:
                witness[key] = bad
    return InterventionResult(not witness, witness)
