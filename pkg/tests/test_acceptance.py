"""Acceptance criteria 1-9 on the full suite, one printed pass/fail line each.

Each criterion's thresholds live in ``uncrel.acceptance``; the checks below
also recompute the pinned values directly so a regression in the criterion
code cannot hide a regression in the library.
"""

import math
import time

import numpy as np
import pytest

from uncrel import acceptance, cli
from uncrel import fock as fk
from uncrel import model as md
from uncrel import optics as op
from uncrel import symplectic as sp

SEED = 7
_elapsed: dict[int, float] = {}


@pytest.mark.parametrize("number", [c[0] for c in acceptance.CRITERIA])
def test_criterion(number, capsys):
    result = acceptance.run_criterion(number, SEED, "full")
    _elapsed[number] = result.seconds
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_total_runtime_under_two_minutes(capsys):
    start = time.perf_counter()
    results = acceptance.run_all(SEED, "full")
    total = time.perf_counter() - start
    with capsys.disabled():
        print(f"\n[{'PASS' if total < 120 else 'FAIL'}] full suite runtime: {total:.1f} s < 120 s")
    assert acceptance.total_ok(results)
    assert total < 120


def test_verify_command_exits_zero(capsys):
    assert cli.main(["verify", "--suite", "full", "--seed", str(SEED)]) == 0
    assert capsys.readouterr().out.count("[PASS]") == 9


class TestPinnedValues:
    """Direct recomputation of the numbers each criterion pins."""

    vac = sp.gaussian_vacuum(sp.QuadBasis(1))

    def test_c1_transducer_noise_is_exactly_zero(self, rng):
        from uncrel.sampling import random_gaussian_state

        for _ in range(100):
            xi, psi = random_gaussian_state(rng, sp.QuadBasis(1)), random_gaussian_state(rng, sp.QuadBasis(1))
            rep = md.heisenberg_nd_check(op.noiseless_transducer(xi), psi)
            assert rep.epsilon <= 1e-12
            assert rep.rhs == pytest.approx(0.25, abs=1e-15)

    def test_c2_uvur_vacuum_equality(self):
        v = md.uvur_check(op.noiseless_transducer(), self.vac).verdicts["uvur"]
        assert abs(v.lhs - 0.25) <= 1e-12 and abs(v.rhs - 0.25) <= 1e-12

    def test_c3_gndur_vacuum_lhs(self):
        v = md.gndur_check(op.noiseless_transducer(), self.vac).verdicts["gndur"]
        assert abs(v.lhs - 0.35355339) <= 1e-8
        assert v.lhs == pytest.approx(math.sqrt(2) / 4, abs=1e-15)

    def test_c4_bae_unit_gain(self):
        rep = md.evaluate(op.bae_amplifier(1.0), self.vac)
        assert abs(rep.epsilon - 0.5) <= 1e-12 and abs(rep.eta - 0.5) <= 1e-12

    def test_c5_transducer_entrywise(self):
        r = math.log((1 + math.sqrt(5)) / 2)
        theta = 0.5 * math.asin(5 ** -0.5)
        built = op.five_step_composition(r, theta).matrix
        assert np.max(np.abs(built - op.TRANSDUCER_MATRIX)) <= 1e-12

    def test_c6_shipped_devices(self):
        for m in acceptance.shipped_models():
            assert md.commutation_identity_residual(m) < 1e-10, m.name

    def test_c7_coherent_oracle_at_24(self):
        alpha = 0.4 + 0.2j
        for spec in (op.DeviceSpec("transducer"), op.DeviceSpec("bae", {"gain": 1.0})):
            aff = md.evaluate(op.affine_model(spec), sp.gaussian_coherent(sp.QuadBasis(1), alpha))
            foc = md.evaluate(op.fock_model(spec, 24), fk.coherent_state(fk.FockSpace(24, 1), alpha))
            assert abs(foc.epsilon - aff.epsilon) < 1e-3
            assert abs(foc.eta - aff.eta) < 1e-3

    def test_c8_born_moments(self):
        space = fk.FockSpace(24, 1)
        m = op.fock_model(op.DeviceSpec("transducer"), 24)
        psi = fk.squeezed_vacuum(space, 0.3)
        assert psi.tail < 1e-6
        rep = fk.born_test(m, psi, 4)
        # even moments of a squeezed quadrature: <X^2> = e^{-2s}/4, <X^4> = 3 <X^2>^2
        v = math.exp(-0.6) / 4
        np.testing.assert_allclose(rep.target_moments, [0, v, 0, 3 * v * v], atol=1e-9)
        assert rep.max_abs_diff < 1e-3

    def test_c9_vacuum_robertson(self):
        basis = sp.QuadBasis(2)
        v = md.robertson_check(
            sp.LinearObservable.quadrature(basis, "X", 0),
            sp.LinearObservable.quadrature(basis, "Y", 0),
            sp.gaussian_vacuum(basis),
        )
        assert v.status == md.EQUALITY and abs(v.lhs - 0.25) <= 1e-12
