import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsmff.errors import InvalidArgument
from dsmff.spectral import f_sharp, half_power_matrix, svd
from dsmff.verify import random_unitary

from .conftest import random_complex


def check_contract(F, d):
    s1 = d.s[0]
    assert np.all(np.diff(d.s) <= 0)
    assert np.all(d.s >= 0)
    assert np.linalg.norm(F - d.reconstruct(), 2) <= 1e-10 * max(s1, 1e-300)
    eye = np.eye(F.shape[0])
    assert np.abs(d.U.conj().T @ d.U - eye).max() <= 1e-10
    assert np.abs(d.V.conj().T @ d.V - eye).max() <= 1e-10


def test_diagonal():
    d = svd(np.diag([2.0, 1.0, 0.0]))
    np.testing.assert_allclose(d.s, [2, 1, 0], atol=1e-15)


def test_constructed_rotations():
    c, s = np.cos(0.3), np.sin(0.3)
    Q = np.array([[c, -s], [s, c]])
    P = np.array([[np.cos(1.1), 1j * np.sin(1.1)], [1j * np.sin(1.1), np.cos(1.1)]])
    d = svd(Q @ np.diag([3.0, 1.0]) @ P.conj().T)
    np.testing.assert_allclose(d.s, [3, 1], rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), m=st.sampled_from([2, 8, 32, 64]))
def test_random_residual_contract(seed, m):
    F = random_complex(np.random.default_rng(seed), (m, m))
    check_contract(F, svd(F))


def test_rejects_non_square():
    with pytest.raises(InvalidArgument):
        svd(np.zeros((3, 2)))


def test_half_power_examples():
    np.testing.assert_allclose(half_power_matrix(svd(np.diag([4.0, 1.0]))), np.diag([2.0, 1.0]), atol=1e-15)
    assert not np.any(half_power_matrix(svd(np.zeros((3, 3)))))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_half_power_squares_to_abs(seed):
    F = random_complex(np.random.default_rng(seed), (16, 16))
    d = svd(F)
    H = half_power_matrix(d)
    assert np.abs(H - H.conj().T).max() < 1e-10
    assert np.linalg.eigvalsh(H).min() > -1e-10
    # oracle: (F^* F)^{1/2} from the Hermitian eigendecomposition
    lam, Q = np.linalg.eigh(F.conj().T @ F)
    abs_f = (Q * np.sqrt(np.clip(lam, 0, None))) @ Q.conj().T
    assert np.abs(H @ H - abs_f).max() < 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_normal_matrix_singular_values_are_eigenvalue_moduli(seed):
    rng = np.random.default_rng(seed)
    lam = random_complex(rng, 12)
    psi = random_unitary(12, seed)
    F = (psi * lam) @ psi.conj().T
    np.testing.assert_allclose(svd(F).s, np.sort(np.abs(lam))[::-1], atol=1e-9)


def test_f_sharp_examples():
    np.testing.assert_allclose(f_sharp(np.diag([1.0, -2.0])), np.diag([1.0, 2.0]), atol=1e-15)
    np.testing.assert_allclose(f_sharp(1j * np.eye(3)), np.eye(3), atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_f_sharp_hermitian_psd(seed):
    A = f_sharp(random_complex(np.random.default_rng(seed), (10, 10)))
    assert np.abs(A - A.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(A).min() >= -1e-10
