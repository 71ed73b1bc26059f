import numpy as np
import pytest

from uncrel import fock as fk


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def linear_coeffs(op_matrix: np.ndarray, dim: int) -> np.ndarray:
    """Read off (c_Xa, c_Ya, c_Xb, c_Yb) of a two-mode operator that is linear in quadratures.

    Uses <1,0|O|0,0> = (c_Xa + i c_Ya)/2 and <0,1|O|0,0> = (c_Xb + i c_Yb)/2,
    which follow from <1|X|0> = 1/2 and <1|Y|0> = i/2.
    """
    space = fk.FockSpace(dim, 2)
    vac = np.ravel_multi_index((0, 0), space.shape)
    one_a = np.ravel_multi_index((1, 0), space.shape)
    one_b = np.ravel_multi_index((0, 1), space.shape)
    za = 2 * op_matrix[one_a, vac]
    zb = 2 * op_matrix[one_b, vac]
    return np.array([za.real, za.imag, zb.real, zb.imag])


@pytest.fixture
def read_coeffs():
    return linear_coeffs
