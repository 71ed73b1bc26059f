"""Closed-form engine for linear bosonic dynamics.

Quadratures are ordered ``(X_1, Y_1, X_2, Y_2, ...)`` with ``a_k = X_k + i Y_k``
so that ``[X_k, Y_k] = i/2``. A transform matrix ``L`` acts in the Heisenberg
picture: ``r_out[i] = sum_j L[i, j] r_in[j]``.

Observables are affine in the quadratures, so their commutators are c-numbers
and their first and second moments are exact functions of a state's mean
vector and symmetrized covariance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import NumericError

#: ``s`` in ``[X_k, Y_k] = i s``. Every relation right-hand side is derived from it.
COMMUTATOR_SCALE = 0.5

TOL_SYMPLECTIC = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal form with ``[[0, 1], [-1, 0]]`` per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class QuadBasis:
    n_modes: int
    commutator_scale: float = field(default=COMMUTATOR_SCALE, init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.n_modes, (int, np.integer)) or self.n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    @property
    def ordering(self) -> tuple[str, ...]:
        return tuple(f"{q}_{k + 1}" for k in range(self.n_modes) for q in "XY")

    def index(self, quadrature: str, mode: int) -> int:
        """Position of quadrature ``"X"`` or ``"Y"`` of ``mode`` (0-based)."""
        self.check_mode(mode)
        if quadrature not in ("X", "Y"):
            raise ValueError(f"quadrature must be 'X' or 'Y', got {quadrature!r}")
        return 2 * mode + (quadrature == "Y")

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode index {mode} out of range for {self.n_modes} modes")

    @property
    def omega(self) -> np.ndarray:
        return symplectic_form(self.n_modes)


def _check_same_basis(*bases: QuadBasis) -> None:
    first = bases[0]
    for other in bases[1:]:
        if other != first:
            raise ValueError(f"basis mismatch: {first} vs {other}")


@dataclass(frozen=True, eq=False)
class LinearObservable:
    """The self-adjoint operator ``coeffs . r + offset``."""

    coeffs: np.ndarray
    basis: QuadBasis
    offset: float = 0.0

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.dim,):
            raise ValueError(
                f"expected {self.basis.dim} coefficients, got shape {coeffs.shape}"
            )
        if not (np.all(np.isfinite(coeffs)) and np.isfinite(self.offset)):
            raise ValueError("observable coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def quadrature(cls, basis: QuadBasis, quadrature: str, mode: int) -> LinearObservable:
        coeffs = np.zeros(basis.dim)
        coeffs[basis.index(quadrature, mode)] = 1.0
        return cls(coeffs, basis)

    @classmethod
    def zero(cls, basis: QuadBasis) -> LinearObservable:
        return cls(np.zeros(basis.dim), basis)

    def __add__(self, other: LinearObservable) -> LinearObservable:
        _check_same_basis(self.basis, other.basis)
        return LinearObservable(self.coeffs + other.coeffs, self.basis, self.offset + other.offset)

    def __sub__(self, other: LinearObservable) -> LinearObservable:
        return self + (-other)

    def __neg__(self) -> LinearObservable:
        return LinearObservable(-self.coeffs, self.basis, -self.offset)

    def __mul__(self, scalar: float) -> LinearObservable:
        return LinearObservable(scalar * self.coeffs, self.basis, scalar * self.offset)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> LinearObservable:
        return self * (1.0 / scalar)

    def mode_coeffs(self, modes: Sequence[int]) -> np.ndarray:
        """Coefficients on the quadratures of ``modes``, in basis order."""
        idx = [2 * m + q for m in sorted(modes) for q in (0, 1)]
        return self.coeffs[idx]

    def as_dict(self, tol: float = 0.0) -> dict[str, float]:
        return {
            label: float(c)
            for label, c in zip(self.basis.ordering, self.coeffs)
            if abs(c) > tol
        }

    def allclose(self, other: LinearObservable, atol: float = TOL_SYMPLECTIC) -> bool:
        _check_same_basis(self.basis, other.basis)
        return bool(
            np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol)
            and abs(self.offset - other.offset) <= atol
        )

    def __repr__(self) -> str:
        terms = " ".join(f"{c:+.6g}*{k}" for k, c in self.as_dict().items()) or "0"
        if self.offset:
            terms += f" {self.offset:+.6g}"
        return f"LinearObservable({terms})"


def symplectic_defect(matrix: np.ndarray) -> float:
    """``max |L Omega L^T - Omega|``."""
    omega = symplectic_form(matrix.shape[0] // 2)
    return float(np.max(np.abs(matrix @ omega @ matrix.T - omega)))


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    matrix: np.ndarray
    basis: QuadBasis

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=float)
        if matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"expected a {self.basis.dim}x{self.basis.dim} matrix")
        if not np.all(np.isfinite(matrix)):
            raise NumericError("transform matrix has non-finite entries")
        defect = symplectic_defect(matrix)
        if defect >= TOL_SYMPLECTIC:
            raise ValueError(f"matrix is not symplectic (defect {defect:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, basis: QuadBasis) -> SymplecticTransform:
        return cls(np.eye(basis.dim), basis)

    @property
    def defect(self) -> float:
        return symplectic_defect(self.matrix)

    def inverse(self) -> SymplecticTransform:
        # L^{-1} = -Omega L^T Omega for symplectic L
        omega = self.basis.omega
        return SymplecticTransform(-omega @ self.matrix.T @ omega, self.basis)

    def max_deviation(self, other: SymplecticTransform | np.ndarray) -> float:
        target = other.matrix if isinstance(other, SymplecticTransform) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - target)))


def _embed_two_mode(block: np.ndarray, mode_pair: tuple[int, int], basis: QuadBasis) -> np.ndarray:
    i, j = mode_pair
    basis.check_mode(i)
    basis.check_mode(j)
    if i == j:
        raise ValueError(f"mode pair must be distinct, got {mode_pair}")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    matrix = np.eye(basis.dim)
    matrix[np.ix_(idx, idx)] = block
    return matrix


def mixer_transform(
    theta: float, mode_pair: tuple[int, int] = (0, 1), basis: QuadBasis = QuadBasis(2)
) -> SymplecticTransform:
    """Heisenberg action of ``exp[theta (a b^dag - a^dag b)]``.

    ``a -> a cos(theta) - b sin(theta)`` and ``b -> b cos(theta) + a sin(theta)``,
    applied identically to the X and Y quadratures.
    """
    c, s = np.cos(theta), np.sin(theta)
    block = np.array(
        [
            [c, 0, -s, 0],
            [0, c, 0, -s],
            [s, 0, c, 0],
            [0, s, 0, c],
        ]
    )
    return SymplecticTransform(_embed_two_mode(block, mode_pair, basis), basis)


def squeeze_transform(
    r: float, mode_pair: tuple[int, int] = (0, 1), basis: QuadBasis = QuadBasis(2)
) -> SymplecticTransform:
    """Heisenberg action of the two-mode squeezer ``exp[r (a b - a^dag b^dag)]``.

    ``a -> a cosh(r) - b^dag sinh(r)``, hence ``X_a -> cosh X_a - sinh X_b`` and
    ``Y_a -> cosh Y_a + sinh Y_b`` (symmetrically for mode b).
    """
    if not np.isfinite(r):
        raise ValueError("squeezing parameter must be finite")
    c, s = np.cosh(r), np.sinh(r)
    block = np.array(
        [
            [c, 0, -s, 0],
            [0, c, 0, s],
            [-s, 0, c, 0],
            [0, s, 0, c],
        ]
    )
    return SymplecticTransform(_embed_two_mode(block, mode_pair, basis), basis)


def phase_transform(phi: float, mode: int, basis: QuadBasis) -> SymplecticTransform:
    """Heisenberg action of the phase shift ``exp[i phi a^dag a]``: ``a -> a e^{i phi}``."""
    basis.check_mode(mode)
    c, s = np.cos(phi), np.sin(phi)
    matrix = np.eye(basis.dim)
    k = 2 * mode
    matrix[k : k + 2, k : k + 2] = [[c, -s], [s, c]]
    return SymplecticTransform(matrix, basis)


def single_squeeze_transform(s_p: float, mode: int, basis: QuadBasis) -> SymplecticTransform:
    """Single-mode squeezer contracting X by ``e^{-s_p}`` and stretching Y."""
    basis.check_mode(mode)
    matrix = np.eye(basis.dim)
    k = 2 * mode
    matrix[k, k] = np.exp(-s_p)
    matrix[k + 1, k + 1] = np.exp(s_p)
    return SymplecticTransform(matrix, basis)


def compose(transforms: Sequence[SymplecticTransform]) -> SymplecticTransform:
    """Transfer matrix of ``transforms`` applied in temporal order.

    ``compose([U1, U2])`` means U1 acts first, so the result is ``L2 @ L1``.
    """
    if not transforms:
        raise ValueError("compose needs at least one transform")
    _check_same_basis(*(t.basis for t in transforms))
    matrix = reduce(lambda acc, t: t.matrix @ acc, transforms[1:], transforms[0].matrix)
    return SymplecticTransform(matrix, transforms[0].basis)


def apply_heisenberg(transform: SymplecticTransform, obs: LinearObservable) -> LinearObservable:
    """``U^dag O U`` for affine ``O``: coefficients pushed through the rows of L."""
    _check_same_basis(transform.basis, obs.basis)
    return LinearObservable(obs.coeffs @ transform.matrix, obs.basis, obs.offset)


def commutator_scalar(o1: LinearObservable, o2: LinearObservable) -> float:
    """Return ``c`` with ``[o1, o2] = i c``."""
    _check_same_basis(o1.basis, o2.basis)
    return float(o1.basis.commutator_scale * (o1.coeffs @ o1.basis.omega @ o2.coeffs))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and symmetrized covariance ``cov_ij = <{dr_i, dr_j}>/2``."""

    mean: np.ndarray
    cov: np.ndarray
    basis: QuadBasis

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        d = self.basis.dim
        if mean.shape != (d,) or cov.shape != (d, d):
            raise ValueError(f"expected mean ({d},) and cov ({d}, {d})")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("state moments must be finite")
        if np.max(np.abs(cov - cov.T)) >= TOL_SYMPLECTIC * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if self.physicality_defect(cov, self.basis) < -TOL_SYMPLECTIC * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance matrix violates the uncertainty principle")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @staticmethod
    def physicality_defect(cov: np.ndarray, basis: QuadBasis) -> float:
        """Smallest eigenvalue of ``cov + (i s / 2) Omega``; negative means unphysical."""
        herm = cov + 0.5j * basis.commutator_scale * basis.omega
        return float(np.linalg.eigvalsh(herm)[0])

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    def transformed(self, transform: SymplecticTransform) -> GaussianState:
        """Moments of ``r_out = L r_in`` evaluated on this state."""
        _check_same_basis(self.basis, transform.basis)
        L = transform.matrix
        return GaussianState(L @ self.mean, L @ self.cov @ L.T, self.basis)


def mean(obs: LinearObservable, state: GaussianState) -> float:
    _check_same_basis(obs.basis, state.basis)
    return float(obs.coeffs @ state.mean + obs.offset)


def variance(obs: LinearObservable, state: GaussianState) -> float:
    _check_same_basis(obs.basis, state.basis)
    # clip tiny negative round-off; the quadratic form is PSD for physical states
    return max(float(obs.coeffs @ state.cov @ obs.coeffs), 0.0)


def second_moment(obs: LinearObservable, state: GaussianState) -> float:
    return variance(obs, state) + mean(obs, state) ** 2


def gaussian_vacuum(basis: QuadBasis) -> GaussianState:
    return GaussianState(np.zeros(basis.dim), 0.25 * np.eye(basis.dim), basis)


def gaussian_coherent(basis: QuadBasis, mean: Sequence[float] | complex) -> GaussianState:
    """Coherent state; ``mean`` is either the quadrature mean vector or, for one
    mode, the complex amplitude ``alpha`` (``<X> = Re alpha``, ``<Y> = Im alpha``)."""
    if np.iscomplexobj(mean) or np.isscalar(mean):
        if basis.n_modes != 1:
            raise ValueError("complex amplitude only accepted for single-mode bases")
        alpha = complex(mean)
        mean = [alpha.real, alpha.imag]
    return GaussianState(np.asarray(mean, dtype=float), 0.25 * np.eye(basis.dim), basis)


def gaussian_squeezed_mode(
    basis: QuadBasis, mode: int, s_p: float, angle: float = 0.0
) -> GaussianState:
    """Vacuum with ``mode`` squeezed by ``s_p`` along ``X cos(angle) + Y sin(angle)``.

    The squeezed quadrature has variance ``e^{-2 s_p}/4`` and its conjugate
    ``e^{2 s_p}/4``; other modes stay in vacuum.
    """
    basis.check_mode(mode)
    if not np.isfinite(s_p):
        raise ValueError("squeeze parameter must be finite")
    if not 0.0 <= angle < np.pi:
        raise ValueError(f"angle must lie in [0, pi), got {angle}")
    u = np.array([np.cos(angle), np.sin(angle)])
    v = np.array([-np.sin(angle), np.cos(angle)])
    block = 0.25 * (np.exp(-2 * s_p) * np.outer(u, u) + np.exp(2 * s_p) * np.outer(v, v))
    cov = 0.25 * np.eye(basis.dim)
    k = 2 * mode
    cov[k : k + 2, k : k + 2] = block
    return GaussianState(np.zeros(basis.dim), cov, basis)


def product_state(system: GaussianState, probe: GaussianState) -> GaussianState:
    """``system (x) probe`` with the system modes first."""
    basis = QuadBasis(system.n_modes + probe.n_modes)
    d = system.basis.dim
    cov = np.zeros((basis.dim, basis.dim))
    cov[:d, :d] = system.cov
    cov[d:, d:] = probe.cov
    return GaussianState(np.concatenate([system.mean, probe.mean]), cov, basis)
