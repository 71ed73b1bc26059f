"""Two-mode optical measuring devices and their parametric realization.

Mode ``a`` (index 0) is the signal, mode ``b`` (index 1) the probe. Devices
are built two ways: from their target input-output matrices, and as products
of polarization rotators ``T(theta)`` and two-mode squeezers ``S(r)``. The
two constructions are compared in tests, never assumed equal.

Note on the BAE amplifier with a vacuum probe: ``N(X_a) = X_b / G`` and
``D(Y_a) = -G Y_b`` give ``epsilon = 1/(2G)`` and ``eta = G/2``. Only at
``G = 1`` are both equal to 1/2; the product is 1/4 for every gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import fock as fk
from . import symplectic as sp
from .model import MeasurementModel

BASIS = sp.QuadBasis(2)
DEVICES = ("bae", "transducer", "five_step")
DEVICE_ALIASES = {"bae_amplifier": "bae", "noiseless_transducer": "transducer"}

X_A = sp.LinearObservable.quadrature(BASIS, "X", 0)
Y_A = sp.LinearObservable.quadrature(BASIS, "Y", 0)
X_B = sp.LinearObservable.quadrature(BASIS, "X", 1)
Y_B = sp.LinearObservable.quadrature(BASIS, "Y", 1)


@dataclass(frozen=True)
class DeviceSpec:
    name: str
    parameters: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", DEVICE_ALIASES.get(self.name, self.name))
        if self.name not in DEVICES:
            raise ValueError(f"unknown device {self.name!r}; expected one of {DEVICES}")
        p = self.parameters
        if self.name == "bae":
            if "gain" not in p or not p["gain"] > 0 or not math.isfinite(p["gain"]):
                raise ValueError("bae needs a finite gain > 0")
        elif self.name == "five_step":
            r, theta = p.get("r"), p.get("theta")
            if r is None or not math.isfinite(r):
                raise ValueError("five_step needs a finite r")
            if theta is None or not -math.pi / 2 < theta < math.pi / 2:
                raise ValueError("five_step needs theta in (-pi/2, pi/2)")

    @property
    def target_matrix(self) -> np.ndarray | None:
        if self.name == "bae":
            return bae_matrix(self.parameters["gain"])
        if self.name == "transducer":
            return TRANSDUCER_MATRIX
        return None

    @property
    def target_relations(self) -> list[tuple[str, dict[str, float]]]:
        """``(output coordinate, input coefficients)`` rows of the target map."""
        target = self.target_matrix
        if target is None:
            return []
        labels = ("X_a", "Y_a", "X_b", "Y_b")
        return [
            (labels[i], {labels[j]: float(c) for j, c in enumerate(row) if c != 0})
            for i, row in enumerate(target)
        ]


def bae_matrix(gain: float) -> np.ndarray:
    # rows: X_a, Y_a, X_b, Y_b outputs in terms of the inputs
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, -gain],
            [gain, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def conjugate_bae_matrix(gain: float) -> np.ndarray:
    return np.array(
        [
            [1.0, 0.0, -gain, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, gain, 0.0, 1.0],
        ]
    )


TRANSDUCER_MATRIX = np.array(
    [
        [1.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
    ]
)
TRANSDUCER_MATRIX.setflags(write=False)


def _reference(quadrature: str) -> sp.LinearObservable:
    return {"X": X_A, "Y": Y_A}[quadrature]


def _probe_or_vacuum(probe: sp.GaussianState | None) -> sp.GaussianState:
    return sp.gaussian_vacuum(sp.QuadBasis(1)) if probe is None else probe


def bae_amplifier(
    gain: float, probe: sp.GaussianState | None = None, reference: str = "Y"
) -> MeasurementModel:
    """Back-action evading amplifier read out through ``M = X_b / G``."""
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    return MeasurementModel(
        interaction=sp.SymplecticTransform(bae_matrix(gain), BASIS),
        probe=_probe_or_vacuum(probe),
        meter=X_B / gain,
        measured=X_A,
        reference=_reference(reference),
        name=f"bae(G={gain:g})",
    )


def noiseless_transducer(
    probe: sp.GaussianState | None = None, reference: str = "Y"
) -> MeasurementModel:
    """Transducer copying ``X_a`` onto ``X_b`` exactly; read out through ``M = X_b``."""
    return MeasurementModel(
        interaction=sp.SymplecticTransform(TRANSDUCER_MATRIX, BASIS),
        probe=_probe_or_vacuum(probe),
        meter=X_B,
        measured=X_A,
        reference=_reference(reference),
        name="transducer",
    )


def transducer_params() -> tuple[float, float]:
    """``(r, theta)`` with ``sinh r = 1/2`` and ``sin 2 theta = tanh r``."""
    r = math.log((1 + math.sqrt(5)) / 2)
    theta = 0.5 * math.asin(1 / math.sqrt(5))
    return r, theta


def constrained_theta(r: float) -> float:
    """Rotator angle satisfying ``sin 2 theta = tanh r``."""
    return 0.5 * math.asin(math.tanh(r))


def u_plus(r: float, theta: float) -> sp.SymplecticTransform:
    """``T(theta) S(r) T(theta)``: rotator, squeezer, rotator."""
    t = sp.mixer_transform(theta)
    return sp.compose([t, sp.squeeze_transform(r), t])


def u_minus(r: float, theta: float) -> sp.SymplecticTransform:
    """``T(theta) S(-r) T(theta)``."""
    t = sp.mixer_transform(theta)
    return sp.compose([t, sp.squeeze_transform(-r), t])


def five_step_composition(r: float, theta: float) -> sp.SymplecticTransform:
    """Rotator ``theta``, squeezer ``r``, rotator ``2 theta`` (as two ``theta``
    rotators), squeezer ``-r``, rotator ``theta``, in that temporal order."""
    t = sp.mixer_transform(theta)
    return sp.compose(
        [t, sp.squeeze_transform(r), t, t, sp.squeeze_transform(-r), t]
    )


def five_step_model(
    r: float, theta: float, probe: sp.GaussianState | None = None, reference: str = "Y"
) -> MeasurementModel:
    return MeasurementModel(
        interaction=five_step_composition(r, theta),
        probe=_probe_or_vacuum(probe),
        meter=X_B,
        measured=X_A,
        reference=_reference(reference),
        name=f"five_step(r={r:g}, theta={theta:g})",
    )


@dataclass(frozen=True)
class RealizationCheck:
    r: float
    theta: float
    gain: float
    max_deviation: float


def _check_constraint(r: float, theta: float) -> None:
    if abs(math.sin(2 * theta) - math.tanh(r)) > 1e-12:
        raise ValueError(
            f"parameters violate sin(2 theta) = tanh(r): "
            f"{math.sin(2 * theta)!r} vs {math.tanh(r)!r}"
        )


def bae_realization_check(r: float, theta: float) -> RealizationCheck:
    """Compare ``T S(-r) T`` with the BAE rows at ``G = 2 sinh r``."""
    _check_constraint(r, theta)
    gain = 2 * math.sinh(r)
    return RealizationCheck(r, theta, gain, u_minus(r, theta).max_deviation(bae_matrix(gain)))


def conjugate_bae_check(r: float, theta: float) -> RealizationCheck:
    """Compare ``T S(r) T`` with the conjugate-BAE rows at ``G = 2 sinh r``."""
    _check_constraint(r, theta)
    gain = 2 * math.sinh(r)
    return RealizationCheck(
        r, theta, gain, u_plus(r, theta).max_deviation(conjugate_bae_matrix(gain))
    )


def transducer_deviation(r: float, theta: float) -> float:
    return five_step_composition(r, theta).max_deviation(TRANSDUCER_MATRIX)


# --- model construction by spec ------------------------------------------------


def affine_model(
    spec: DeviceSpec, probe: sp.GaussianState | None = None, reference: str = "Y"
) -> MeasurementModel:
    p = spec.parameters
    if spec.name == "bae":
        return bae_amplifier(p["gain"], probe, reference)
    if spec.name == "transducer":
        return noiseless_transducer(probe, reference)
    return five_step_model(p["r"], p["theta"], probe, reference)


@lru_cache(maxsize=32)
def _fock_factor(kind: str, dim: int, param: float) -> fk.FockOperator:
    space = fk.FockSpace(dim, 2)
    gen = fk.mixer_generator(space, param) if kind == "T" else fk.squeeze_generator(space, param)
    u = fk.unitary_exp(gen)
    u.matrix.setflags(write=False)
    return u


def fock_five_step_unitary(r: float, theta: float, dim: int) -> fk.FockOperator:
    """``T(theta) S(-r) T(theta) T(theta) S(r) T(theta)`` as a product of matrix exponentials."""
    t = _fock_factor("T", dim, theta)
    return t @ _fock_factor("S", dim, -r) @ t @ t @ _fock_factor("S", dim, r) @ t


def fock_bae_unitary(gain: float, dim: int) -> fk.FockOperator:
    """``T(theta) S(-r) T(theta)`` with ``2 sinh r = G`` and ``sin 2 theta = tanh r``."""
    r = math.asinh(gain / 2)
    t = _fock_factor("T", dim, constrained_theta(r))
    return t @ _fock_factor("S", dim, -r) @ t


def fock_model(
    spec: DeviceSpec, dim: int, probe: fk.FockState | None = None, reference: str = "Y"
) -> MeasurementModel:
    """Fock-backend model realizing ``spec`` through its parametric circuit."""
    space = fk.FockSpace(dim, 2)
    if probe is None:
        probe = fk.fock_basis_state(fk.FockSpace(dim, 1), 0)
    p = spec.parameters
    if spec.name == "bae":
        unitary, meter_scale = fock_bae_unitary(p["gain"], dim), 1 / p["gain"]
    elif spec.name == "transducer":
        unitary, meter_scale = fock_five_step_unitary(*transducer_params(), dim), 1.0
    else:
        unitary, meter_scale = fock_five_step_unitary(p["r"], p["theta"], dim), 1.0
    xa, ya = fk.quadratures(space, 0)
    xb, _ = fk.quadratures(space, 1)
    return MeasurementModel(
        interaction=unitary,
        probe=probe,
        meter=xb * meter_scale,
        measured=xa,
        reference={"X": xa, "Y": ya}[reference],
        name=f"{spec.name}[fock {dim}]",
    )
