"""Seeded random interactions, observables, states and models for property runs.

Interactions are products of mixers, two-mode squeezers, phase shifts and
single-mode squeezers, so they are symplectic by construction.
"""

from __future__ import annotations

import numpy as np

from . import symplectic as sp
from .model import MeasurementModel

MAX_SQUEEZE = 1.0


def random_transform(
    rng: np.random.Generator, basis: sp.QuadBasis = sp.QuadBasis(2), n_layers: int = 3
) -> sp.SymplecticTransform:
    steps = []
    for _ in range(n_layers):
        for mode in range(basis.n_modes):
            steps.append(sp.phase_transform(rng.uniform(0, 2 * np.pi), mode, basis))
            steps.append(
                sp.single_squeeze_transform(rng.uniform(-MAX_SQUEEZE, MAX_SQUEEZE) / 2, mode, basis)
            )
        for i in range(basis.n_modes):
            for j in range(i + 1, basis.n_modes):
                steps.append(sp.mixer_transform(rng.uniform(-np.pi, np.pi), (i, j), basis))
                steps.append(sp.squeeze_transform(rng.uniform(-MAX_SQUEEZE, MAX_SQUEEZE), (i, j), basis))
    return sp.compose(steps)


def random_observable(
    rng: np.random.Generator, basis: sp.QuadBasis, modes: range | list[int], scale: float = 1.0
) -> sp.LinearObservable:
    """Random affine observable supported on ``modes``; never identically zero."""
    coeffs = np.zeros(basis.dim)
    idx = [2 * m + q for m in modes for q in (0, 1)]
    while not np.any(coeffs[idx]):
        coeffs[idx] = rng.normal(scale=scale, size=len(idx))
    return sp.LinearObservable(coeffs, basis, offset=rng.normal())


def random_gaussian_state(
    rng: np.random.Generator, basis: sp.QuadBasis, max_thermal: float = 1.0
) -> sp.GaussianState:
    """Random mixed Gaussian state: thermal occupations, random symplectic, random mean."""
    occupations = rng.uniform(0, max_thermal, size=basis.n_modes)
    cov = np.diag(np.repeat(0.25 * (1 + 2 * occupations), 2))
    state = sp.GaussianState(rng.normal(size=basis.dim), cov, basis)
    return state.transformed(random_transform(rng, basis, n_layers=1))


def random_affine_model(
    rng: np.random.Generator, n_system_modes: int = 1, n_probe_modes: int = 1
) -> MeasurementModel:
    basis = sp.QuadBasis(n_system_modes + n_probe_modes)
    system = range(n_system_modes)
    probe = range(n_system_modes, basis.n_modes)
    return MeasurementModel(
        interaction=random_transform(rng, basis),
        probe=random_gaussian_state(rng, sp.QuadBasis(n_probe_modes)),
        meter=random_observable(rng, basis, probe),
        measured=random_observable(rng, basis, system),
        reference=random_observable(rng, basis, system),
        n_system_modes=n_system_modes,
        name="random",
    )


def random_probe_only_model(rng: np.random.Generator) -> MeasurementModel:
    """Two-mode model of independent intervention: ``N(A)`` and ``D(B)`` act on the probe.

    Uses a BAE-type interaction ``X_b += g X_a``, ``Y_a -= g Y_b`` with
    ``A = X_a``, ``B = Y_a`` and a meter ``X_b / g`` with a random offset.
    """
    basis = sp.QuadBasis(2)
    g = float(np.exp(rng.uniform(np.log(0.1), np.log(10))))
    L = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, -g],
            [g, 0, 1, 0],
            [0, 0, 0, 1],
        ],
        dtype=float,
    )
    xa = sp.LinearObservable.quadrature(basis, "X", 0)
    ya = sp.LinearObservable.quadrature(basis, "Y", 0)
    xb = sp.LinearObservable.quadrature(basis, "X", 1)
    return MeasurementModel(
        interaction=sp.SymplecticTransform(L, basis),
        probe=random_gaussian_state(rng, sp.QuadBasis(1)),
        meter=xb / g + sp.LinearObservable(np.zeros(4), basis, rng.normal()),
        measured=xa,
        reference=ya,
        name="random_probe_only",
    )
