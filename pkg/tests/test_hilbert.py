import numpy as np
import pytest

from nhqc_sim import hilbert
from nhqc_sim.hilbert import (
    SubsystemLayout,
    annihilation_op,
    embed,
    logical_basis,
    lowering_op,
    product_state,
    projector_op,
)


def test_lowering_op_definitions():
    np.testing.assert_array_equal(lowering_op(1, 2), [[0, 1], [0, 0]])
    expected = np.zeros((3, 3))
    expected[1, 2] = 1
    np.testing.assert_array_equal(lowering_op(2, 3), expected)


def test_lowering_op_maps_basis_state_down():
    for d in (2, 3, 4):
        for k in range(1, d):
            ket = np.zeros(d)
            ket[k] = 1
            out = lowering_op(k, d) @ ket
            expect = np.zeros(d)
            expect[k - 1] = 1
            np.testing.assert_array_equal(out, expect)


@pytest.mark.parametrize("k,d", [(0, 3), (3, 3), (-1, 2), (5, 4)])
def test_lowering_op_rejects_bad_index(k, d):
    with pytest.raises(ValueError):
        lowering_op(k, d)


def test_projector_op_diagonals():
    np.testing.assert_array_equal(projector_op(0, 3), np.diag([1, 0, 0]))
    np.testing.assert_array_equal(projector_op(2, 3), np.diag([0, 0, 1]))
    with pytest.raises(ValueError):
        projector_op(3, 3)


def test_projectors_complete():
    for d in (2, 3, 5):
        total = sum(projector_op(k, d) for k in range(d))
        np.testing.assert_allclose(total, np.eye(d), atol=1e-15)


def test_annihilation_weights():
    a = annihilation_op(3)
    assert a[0, 1] == 1.0
    assert a[1, 2] == pytest.approx(np.sqrt(2))


def test_layout_defaults_and_strides():
    lay = SubsystemLayout(("T1", "T2", "Ta"))
    assert lay.dims == (3, 3, 3)
    assert lay.total_dim == 27
    assert lay.strides == (9, 3, 1)
    assert lay.basis_index({"T1": 1}) == 9
    assert lay.basis_index({"T2": 2, "Ta": 1}) == 7


def test_layout_rejects_duplicates_and_bad_dims():
    with pytest.raises(ValueError):
        SubsystemLayout(("a", "a"))
    with pytest.raises(ValueError):
        SubsystemLayout(("a", "b"), (3, 1))
    with pytest.raises(ValueError):
        SubsystemLayout(("a",), (2, 2))


def test_embed_identity_is_global_identity():
    lay = SubsystemLayout(("x", "y"), (3, 3))
    np.testing.assert_array_equal(embed(np.eye(3), "y", lay), np.eye(9))


def test_embed_kron_structure():
    lay = SubsystemLayout(("x", "y"), (3, 3))
    op = np.diag([0.0, 1.0, 2.0])
    out = embed(op, "x", lay)
    np.testing.assert_allclose(np.diag(out).real, [0, 0, 0, 1, 1, 1, 2, 2, 2])


def test_embed_trace_scaling(rng):
    lay = SubsystemLayout(("x", "y", "z"), (2, 3, 2))
    op = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    out = embed(op, "y", lay)
    assert np.trace(out) == pytest.approx(np.trace(op) * lay.total_dim / 3)


def test_embed_rejects_unknown_site_and_mismatch():
    lay = SubsystemLayout(("x", "y"), (3, 3))
    with pytest.raises(ValueError):
        embed(np.eye(3), "q", lay)
    with pytest.raises(ValueError):
        embed(np.eye(2), "x", lay)


def test_site_levels_enumeration():
    lay = SubsystemLayout(("x", "y"), (2, 3))
    np.testing.assert_array_equal(lay.site_levels("x"), [0, 0, 0, 1, 1, 1])
    np.testing.assert_array_equal(lay.site_levels("y"), [0, 1, 2, 0, 1, 2])


def test_logical_basis_single_qubit_patterns():
    lay = SubsystemLayout(("T1", "T2", "Ta"))
    zero, one = logical_basis("S1", lay)
    np.testing.assert_array_equal(zero, product_state(lay, {"T1": 1}))
    np.testing.assert_array_equal(one, product_state(lay, {"T2": 1}))


def test_logical_basis_two_qubit_patterns():
    lay = SubsystemLayout(("T1", "T2", "T3", "T4"))
    states = logical_basis("S2", lay)
    expect = [
        {"T1": 1, "T3": 1},
        {"T1": 1, "T4": 1},
        {"T2": 1, "T3": 1},
        {"T2": 1, "T4": 1},
    ]
    for got, pattern in zip(states, expect):
        np.testing.assert_array_equal(got, product_state(lay, pattern))


def test_logical_basis_orthonormal():
    lay = SubsystemLayout(("T1", "T2", "T3", "T4"))
    basis = np.column_stack(logical_basis("S2", lay))
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(4), atol=1e-12)


def test_logical_basis_missing_label():
    lay = SubsystemLayout(("T1", "T2"))
    with pytest.raises(ValueError):
        logical_basis("S2", lay)
    with pytest.raises(ValueError):
        logical_basis("S3", lay)


def test_density_matrix_checks(rng):
    good = np.diag([0.25, 0.25, 0.5]).astype(complex)
    hilbert.check_density_matrix(good)
    with pytest.raises(ValueError):
        hilbert.check_density_matrix(2 * good)
    bad = good.copy()
    bad[0, 1] = 0.1
    with pytest.raises(ValueError):
        hilbert.check_density_matrix(bad)


def test_state_vector_check():
    hilbert.check_state_vector(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        hilbert.check_state_vector(np.array([1.0, 1.0]))
