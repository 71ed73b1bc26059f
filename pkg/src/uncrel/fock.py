"""Truncated number-basis representation of bosonic modes.

This is the brute-force oracle for :mod:`uncrel.symplectic`: operators are
dense complex matrices on ``dim_per_mode ** n_modes`` amplitudes, with mode 0
the slowest-varying tensor index. Truncation is the dominant systematic error,
so every constructed state carries the probability lost to the cutoff and the
population of its two highest number levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from .errors import NumericError

TOL_FOCK_HERMITIAN = 1e-10
TOL_FOCK_UNITARY = 1e-9
TAIL_TOL = 1e-6
EIG_MERGE_TOL = 1e-8
DEFAULT_DIM = 24


@dataclass(frozen=True)
class FockSpace:
    dim_per_mode: int
    n_modes: int = 1

    def __post_init__(self) -> None:
        if self.dim_per_mode < 1 or self.n_modes < 1:
            raise ValueError("dim_per_mode and n_modes must be positive")
        if self.total_dim < 4:
            raise ValueError(f"total dimension {self.total_dim} is below the minimum of 4")

    @property
    def total_dim(self) -> int:
        return self.dim_per_mode**self.n_modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim_per_mode,) * self.n_modes

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode index {mode} out of range for {self.n_modes} modes")

    def low_indices(self, cutoff: int) -> np.ndarray:
        """Flat indices of basis states with every mode's level below ``cutoff``."""
        grids = np.meshgrid(*[np.arange(self.dim_per_mode)] * self.n_modes, indexing="ij")
        mask = np.all([g < cutoff for g in grids], axis=0).ravel()
        return np.flatnonzero(mask)


def _check_same_space(*spaces: FockSpace) -> None:
    for other in spaces[1:]:
        if other != spaces[0]:
            raise ValueError(f"Fock space mismatch: {spaces[0]} vs {other}")


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    space: FockSpace
    hermitian: bool = False

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        n = self.space.total_dim
        if matrix.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, space: FockSpace) -> FockOperator:
        return cls(np.eye(space.total_dim), space, hermitian=True)

    @property
    def dag(self) -> FockOperator:
        return FockOperator(self.matrix.conj().T, self.space, self.hermitian)

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = TOL_FOCK_HERMITIAN) -> bool:
        return self.hermitian_defect() < tol

    def __matmul__(self, other: FockOperator) -> FockOperator:
        _check_same_space(self.space, other.space)
        return FockOperator(self.matrix @ other.matrix, self.space)

    def __add__(self, other: FockOperator) -> FockOperator:
        _check_same_space(self.space, other.space)
        return FockOperator(
            self.matrix + other.matrix, self.space, self.hermitian and other.hermitian
        )

    def __sub__(self, other: FockOperator) -> FockOperator:
        return self + (-other)

    def __neg__(self) -> FockOperator:
        return FockOperator(-self.matrix, self.space, self.hermitian)

    def __mul__(self, scalar: complex) -> FockOperator:
        real = np.isreal(scalar)
        return FockOperator(scalar * self.matrix, self.space, self.hermitian and bool(real))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> FockOperator:
        return self * (1.0 / scalar)

    def apply(self, state: FockState) -> np.ndarray:
        _check_same_space(self.space, state.space)
        return self.matrix @ state.amplitudes


@dataclass(frozen=True, eq=False)
class FockState:
    """Normalized amplitude vector plus truncation metadata.

    ``tail`` is the probability the cutoff discarded before renormalization;
    ``edge_population`` is the largest per-mode weight on the top two levels.
    """

    amplitudes: np.ndarray
    space: FockSpace
    tail: float = 0.0
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.total_dim,):
            raise ValueError(f"expected {self.space.total_dim} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("state vector has zero or non-finite norm")
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm {norm:.15f})")
        object.__setattr__(self, "amplitudes", amps)
        warnings = list(self.warnings)
        if self.tail > TAIL_TOL:
            warnings.append(f"truncation tail {self.tail:.2e} exceeds {TAIL_TOL:.0e}")
        edge = self.edge_population
        if edge > TAIL_TOL:
            warnings.append(f"top-two-level population {edge:.2e} exceeds {TAIL_TOL:.0e}")
        object.__setattr__(self, "warnings", tuple(dict.fromkeys(warnings)))

    @property
    def edge_population(self) -> float:
        probs = np.abs(self.amplitudes.reshape(self.space.shape)) ** 2
        d = self.space.dim_per_mode
        worst = 0.0
        for mode in range(self.space.n_modes):
            marginal = probs.sum(axis=tuple(k for k in range(self.space.n_modes) if k != mode))
            worst = max(worst, float(marginal[max(d - 2, 0) :].sum()))
        return worst


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def _embed(single: np.ndarray, space: FockSpace, mode: int) -> np.ndarray:
    space.check_mode(mode)
    eye = np.eye(space.dim_per_mode)
    factors = [single if k == mode else eye for k in range(space.n_modes)]
    return reduce(np.kron, factors)


def annihilation(space: FockSpace, mode: int = 0) -> FockOperator:
    return FockOperator(_embed(_ladder(space.dim_per_mode), space, mode), space)


def number_operator(space: FockSpace, mode: int = 0) -> FockOperator:
    a = annihilation(space, mode)
    return FockOperator(a.dag.matrix @ a.matrix, space, hermitian=True)


def quadratures(space: FockSpace, mode: int = 0) -> tuple[FockOperator, FockOperator]:
    """``X = (a + a^dag)/2`` and ``Y = (a - a^dag)/(2i)``."""
    a = annihilation(space, mode).matrix
    ad = a.conj().T
    return (
        FockOperator((a + ad) / 2, space, hermitian=True),
        FockOperator((a - ad) / 2j, space, hermitian=True),
    )


def is_local(op: FockOperator, modes: Sequence[int], tol: float = TOL_FOCK_HERMITIAN) -> bool:
    """Whether ``op`` acts as the identity on every mode outside ``modes``."""
    space = op.space
    d, n = space.dim_per_mode, space.n_modes
    keep = sorted(modes)
    rest = [k for k in range(n) if k not in keep]
    if not rest:
        return True
    t = op.matrix.reshape(space.shape * 2)
    # partial trace over the other modes, then rebuild I_rest (x) reduced
    reduced = t
    for k in sorted(rest, reverse=True):
        m = reduced.ndim // 2
        reduced = np.trace(reduced, axis1=k, axis2=k + m)
    reduced = reduced / d ** len(rest)
    k_dim = d ** len(keep)
    rebuilt = np.kron(np.eye(d ** len(rest)), reduced.reshape(k_dim, k_dim))
    # rebuilt is ordered (rest, keep); permute back to natural mode order
    order = rest + keep
    perm = np.argsort(order)
    r = rebuilt.reshape(space.shape * 2).transpose(list(perm) + [p + n for p in perm])
    return float(np.max(np.abs(r.reshape(op.matrix.shape) - op.matrix))) < tol


def embed_operator(op: FockOperator, space: FockSpace, mode: int) -> FockOperator:
    """Lift a single-mode operator into ``mode`` of a multi-mode space."""
    if op.space.n_modes != 1 or op.space.dim_per_mode != space.dim_per_mode:
        raise ValueError("can only embed single-mode operators of matching cutoff")
    return FockOperator(_embed(op.matrix, space, mode), space, op.hermitian)


def _two_mode(op_i: np.ndarray, op_j: np.ndarray, space: FockSpace, modes: tuple[int, int]) -> np.ndarray:
    i, j = modes
    space.check_mode(i)
    space.check_mode(j)
    if i == j:
        raise ValueError(f"mode pair must be distinct, got {modes}")
    eye = np.eye(space.dim_per_mode)
    factors = [op_i if k == i else op_j if k == j else eye for k in range(space.n_modes)]
    return reduce(np.kron, factors)


def mixer_generator(space: FockSpace, theta: float, modes: tuple[int, int] = (0, 1)) -> FockOperator:
    """``theta (a b^dag - a^dag b)``."""
    low = _ladder(space.dim_per_mode)
    return FockOperator(
        theta * (_two_mode(low, low.T, space, modes) - _two_mode(low.T, low, space, modes)), space
    )


def squeeze_generator(space: FockSpace, r: float, modes: tuple[int, int] = (0, 1)) -> FockOperator:
    """``r (a b - a^dag b^dag)``."""
    low = _ladder(space.dim_per_mode)
    return FockOperator(
        r * (_two_mode(low, low, space, modes) - _two_mode(low.T, low.T, space, modes)), space
    )


def unitary_exp(generator: FockOperator, tol: float = TOL_FOCK_UNITARY) -> FockOperator:
    """``exp(G)`` for anti-Hermitian ``G`` by Pade scaling and squaring.

    ``G`` is split into the connected components of its sparsity graph and
    each invariant block is exponentiated on its own. Mixer and squeezer
    generators conserve total and relative photon number, so the blocks are
    at most ``dim_per_mode`` wide.
    """
    g = generator.matrix
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g + g.conj().T)) > 1e-12 * scale:
        raise ValueError("generator is not anti-Hermitian")
    n_blocks, labels = connected_components(
        scipy.sparse.csr_matrix(np.abs(g) > 0), directed=False
    )
    u = np.zeros_like(g)
    for block in range(n_blocks):
        idx = np.flatnonzero(labels == block)
        u[np.ix_(idx, idx)] = scipy.linalg.expm(g[np.ix_(idx, idx)])
    if not np.all(np.isfinite(u)):
        raise NumericError("matrix exponential produced non-finite entries")
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if defect >= tol:
        raise NumericError(
            f"exp(G) is not unitary: max|U^dag U - I| = {defect:.3e} "
            f"(dim {u.shape[0]}, max|G| = {scale:.3e}, {n_blocks} blocks)"
        )
    return FockOperator(u, generator.space)


def heisenberg(unitary: FockOperator, op: FockOperator) -> FockOperator:
    """``U^dag A U``."""
    _check_same_space(unitary.space, op.space)
    u = unitary.matrix
    return FockOperator(u.conj().T @ op.matrix @ u, op.space, op.hermitian)


def expectation(op: FockOperator, state: FockState) -> complex:
    _check_same_space(op.space, state.space)
    psi = state.amplitudes
    return complex(np.vdot(psi, op.matrix @ psi))


def _truncated_state(series: np.ndarray, space: FockSpace, label: str) -> FockState:
    kept = float(np.sum(np.abs(series) ** 2))
    tail = max(0.0, 1.0 - kept)
    warnings = (f"{label}: truncation tail {tail:.2e}",) if tail > TAIL_TOL else ()
    return FockState(series / np.sqrt(kept), space, tail=tail, warnings=warnings)


def fock_basis_state(space: FockSpace, levels: int | Sequence[int] = 0) -> FockState:
    levels = (levels,) if np.isscalar(levels) else tuple(levels)
    if len(levels) != space.n_modes or any(not 0 <= n < space.dim_per_mode for n in levels):
        raise ValueError(f"invalid number levels {levels} for {space}")
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[np.ravel_multi_index(levels, space.shape)] = 1.0
    return FockState(amps, space)


def coherent_state(space: FockSpace, alpha: complex) -> FockState:
    """``e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>``, renormalized after truncation."""
    if space.n_modes != 1:
        raise ValueError("coherent_state builds single-mode states; combine with tensor()")
    n = np.arange(space.dim_per_mode)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mag = abs(alpha)
    if mag == 0:
        series = (n == 0).astype(complex)
    else:
        series = np.exp(-(mag**2) / 2 + n * np.log(mag) - log_fact / 2) * np.exp(
            1j * n * np.angle(alpha)
        )
    return _truncated_state(series, space, f"coherent({alpha})")


def squeezed_vacuum(space: FockSpace, s_p: float, angle: float = 0.0) -> FockState:
    """Vacuum squeezed by ``s_p`` along the quadrature ``X cos(angle) + Y sin(angle)``.

    Even-level amplitudes ``(-e^{2i angle} tanh s)^m sqrt((2m)!) / (2^m m! sqrt(cosh s))``.
    """
    if space.n_modes != 1:
        raise ValueError("squeezed_vacuum builds single-mode states; combine with tensor()")
    series = np.zeros(space.dim_per_mode, dtype=complex)
    t = np.tanh(s_p)
    for m in range((space.dim_per_mode + 1) // 2):
        log_mag = 0.5 * math.lgamma(2 * m + 1) - m * math.log(2) - math.lgamma(m + 1)
        series[2 * m] = (-np.exp(2j * angle) * t) ** m * math.exp(log_mag)
    series /= math.sqrt(math.cosh(s_p))
    return _truncated_state(series, space, f"squeezed({s_p}, {angle})")


def tensor(system: FockState, probe: FockState) -> FockState:
    """``system (x) probe``; system modes are the slowest-varying indices."""
    if system.space.dim_per_mode != probe.space.dim_per_mode:
        raise ValueError("tensor factors must share dim_per_mode")
    space = FockSpace(system.space.dim_per_mode, system.space.n_modes + probe.space.n_modes)
    amps = np.kron(system.amplitudes, probe.amplitudes)
    amps /= np.linalg.norm(amps)
    return FockState(
        amps,
        space,
        tail=1.0 - (1.0 - system.tail) * (1.0 - probe.tail),
        warnings=system.warnings + probe.warnings,
    )


@dataclass(frozen=True)
class SpectralDistribution:
    eigenvalues: np.ndarray
    weights: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {np.sum(self.weights)!r}, expected 1")

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.eigenvalues**k))

    def moments(self, n: int) -> np.ndarray:
        """Raw moments 1..n."""
        return np.array([self.moment(k) for k in range(1, n + 1)])

    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def probability(self, lo: float, hi: float) -> float:
        """Weight of eigenvalues in the closed interval ``[lo, hi]``."""
        mask = (self.eigenvalues >= lo) & (self.eigenvalues <= hi)
        return float(self.weights[mask].sum())


def spectral_distribution(
    op: FockOperator, state: FockState, merge_tol: float = EIG_MERGE_TOL, source: str = ""
) -> SpectralDistribution:
    """Distribution of outcomes of a precise measurement of ``op`` on ``state``."""
    _check_same_space(op.space, state.space)
    if not op.is_hermitian():
        raise ValueError(f"operator is not Hermitian (defect {op.hermitian_defect():.2e})")
    try:
        vals, vecs = np.linalg.eigh(op.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    weights = np.abs(vecs.conj().T @ state.amplitudes) ** 2

    scale = max(1.0, float(np.max(np.abs(vals))))
    merged_vals, merged_w = [vals[0]], [weights[0]]
    for v, w in zip(vals[1:], weights[1:]):
        if v - merged_vals[-1] <= merge_tol * scale:
            merged_w[-1] += w
        else:
            merged_vals.append(v)
            merged_w.append(w)
    w = np.array(merged_w)
    return SpectralDistribution(np.array(merged_vals), w / w.sum(), source)


@dataclass(frozen=True)
class BornReport:
    """Raw moments 1..n of the meter readout and of ``A`` on the input state."""

    meter_moments: np.ndarray
    target_moments: np.ndarray
    meter: SpectralDistribution
    target: SpectralDistribution
    warnings: tuple[str, ...] = ()

    @property
    def abs_diff(self) -> np.ndarray:
        return np.abs(self.meter_moments - self.target_moments)

    @property
    def max_abs_diff(self) -> float:
        return float(np.max(self.abs_diff))


def born_test(model, psi: FockState, n_moments: int = 4) -> BornReport:
    """Compare the readout distribution of ``M_out`` on ``psi (x) xi`` with that of ``A`` on ``psi``.

    ``model`` is a Fock-backend :class:`uncrel.model.MeasurementModel`. The
    spectral measure of ``U^dag M U`` on ``Psi`` is the measure of ``M`` on
    ``U Psi``, which is what is diagonalized here.
    """
    if not isinstance(model.interaction, FockOperator):
        raise ValueError("born_test needs a Fock-backend model")
    joint = tensor(psi, model.probe)
    out = model.interaction.matrix @ joint.amplitudes
    evolved = FockState(out / np.linalg.norm(out), joint.space)
    meter = spectral_distribution(model.meter, evolved, source="M_out")
    target = spectral_distribution(model.measured, joint, source="A_in")
    warnings = joint.warnings + tuple(f"evolved state: {w}" for w in evolved.warnings)
    return BornReport(
        meter.moments(n_moments), target.moments(n_moments), meter, target, warnings
    )
