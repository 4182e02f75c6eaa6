import json

import numpy as np
import pytest

from noiseless import catalog, linalg
from noiseless.channel import (
    Projector,
    apply_adjoint,
    apply_channel,
    channel_from_json,
    channel_to_json,
    choi_matrix,
    compress_kraus,
    invariance_residual,
    is_unital,
    leakage_residual,
    load_channel,
    save_channel,
    superoperator,
    validate_channel,
)
from noiseless.errors import (
    InvalidProjector,
    NotCompletelyPositive,
    NotInvariant,
    NotTracePreserving,
    ParseError,
    ShapeMismatch,
    ValidationError,
)

from conftest import proj


def test_validate_identity():
    ch = validate_channel([np.eye(3)])
    assert ch.dim == 3 and ch.num_kraus == 1
    assert ch.unital and ch.tp_residual == 0.0


def test_validate_rejects_non_tp():
    with pytest.raises(NotTracePreserving) as err:
        validate_channel([np.eye(2) / np.sqrt(2)])
    # ||1/2 - 1||_F on C^2
    assert err.value.residual == pytest.approx(np.sqrt(2) / 2)


def test_validate_rejects_shapes():
    with pytest.raises(ShapeMismatch):
        validate_channel([np.eye(2), np.eye(3)])
    with pytest.raises(ShapeMismatch):
        validate_channel([])
    with pytest.raises(ShapeMismatch):
        validate_channel([np.ones((2, 3))])


def test_choi_matches_definition(rng):
    ch = catalog.kl97(0.3)
    d = ch.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            eij = np.zeros((d, d))
            eij[i, j] = 1.0
            c += np.kron(eij, apply_channel(ch, eij))
    np.testing.assert_allclose(choi_matrix(ch.kraus), c, atol=1e-14)


def test_choi_psd_guard(monkeypatch):
    # Kraus input always gives a PSD Choi matrix; force the guard with a fake one
    import noiseless.channel as chmod

    monkeypatch.setattr(chmod, "choi_matrix", lambda k: -np.eye(4))
    with pytest.raises(NotCompletelyPositive) as err:
        chmod.validate_channel([np.eye(2)])
    assert err.value.min_eigenvalue == pytest.approx(-1.0)


def test_superoperator_row_major(rng):
    ch = catalog.kl97(0.2)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(superoperator(ch) @ x.reshape(-1), apply_channel(ch, x).reshape(-1), atol=1e-13)


def test_adjoint_duality(rng):
    ch = catalog.kl97(0.3)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    y = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lhs = np.trace(y.conj().T @ apply_channel(ch, x))
    rhs = np.trace(apply_adjoint(ch, y).conj().T @ x)
    assert abs(lhs - rhs) < 1e-12


def test_z_dephasing_unital():
    ch = catalog.z_dephasing()
    assert ch.dim == 4 and ch.num_kraus == 2 and ch.unital
    assert is_unital(ch).residual < 1e-14


def test_kl97_unitality_oracle():
    q = 0.3
    ch = catalog.kl97(q)
    e1 = sum(k @ k.conj().T for k in ch.kraus)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(e1)), [0.7, 0.7, 1.3, 1.3], atol=1e-12)
    assert not ch.unital
    # E(1) - 1 = diag(q, -q, -q, q) up to ordering: Frobenius norm 2q
    assert ch.unitality_residual == pytest.approx(2 * q, abs=1e-12)


def test_projector_from_matrix_checks():
    p = Projector.from_matrix(proj("01", "10"))
    assert p.rank == 2
    with pytest.raises(InvalidProjector):
        Projector.from_matrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidProjector):
        Projector.from_matrix(0.5 * np.eye(2))
    with pytest.raises(InvalidProjector):
        Projector.from_matrix(np.ones((2, 3)))


def test_projector_isometry(rng):
    v = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    p = Projector.from_vectors(v)
    w = p.isometry()
    assert w.shape == (5, 2)
    assert np.linalg.norm(w.conj().T @ w - np.eye(2)) < 1e-12
    assert np.linalg.norm(w @ w.conj().T - p.matrix) < 1e-12
    np.testing.assert_array_equal(w, p.isometry())
    assert p.complement().rank == 3


def test_invariance_kl97():
    ch = catalog.kl97(0.3)
    dfs = Projector.from_matrix(proj("01", "10"))
    assert invariance_residual(ch, dfs) < 1e-15
    assert leakage_residual(ch, dfs) < 1e-15
    np.testing.assert_allclose(apply_channel(ch, dfs.matrix), dfs.matrix, atol=1e-15)
    bad = Projector.from_matrix(proj("00"))
    # E1|00> = beta(|00> + |10>) leaves span{|00>}
    assert invariance_residual(ch, bad) > 0.1
    assert leakage_residual(ch, bad) > 0.1
    with pytest.raises(NotInvariant):
        compress_kraus(ch, bad)


def test_compress_kraus_shapes():
    ch = catalog.kl97(0.3)
    ks = compress_kraus(ch, Projector.from_matrix(proj("01", "10")))
    assert [k.shape for k in ks] == [(2, 2)] * 3
    # E0 acts as the identity there and E1, E2 vanish
    np.testing.assert_allclose(ks[0].conj().T @ ks[0], np.eye(2), atol=1e-14)
    assert np.linalg.norm(ks[1]) < 1e-15 and np.linalg.norm(ks[2]) < 1e-15


def test_json_round_trip(tmp_path):
    ch = catalog.kl97(0.3)
    path = tmp_path / "kl97.json"
    save_channel(ch, path)
    back = load_channel(path)
    assert back.dim == 4 and back.num_kraus == 3 and back.label == ch.label
    for a, b in zip(ch.kraus, back.kraus):
        np.testing.assert_array_equal(a, b)


def test_json_truncated_offset(tmp_path):
    path = tmp_path / "bad.json"
    text = json.dumps(channel_to_json(catalog.identity(2)))
    path.write_text(text[:25])
    with pytest.raises(ParseError) as err:
        load_channel(path)
    assert err.value.offset == 25
    assert "byte offset 25" in str(err.value)


def test_json_validation_error(tmp_path):
    path = tmp_path / "ntp.json"
    path.write_text(json.dumps({"dim": 1, "kraus": [[[[0.5, 0.0]]]]}))
    with pytest.raises(ValidationError) as err:
        load_channel(path)
    assert isinstance(err.value.cause, NotTracePreserving)


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"dim": 2},
        {"dim": "2", "kraus": [[[[1, 0]]]]},
        {"dim": 2, "kraus": []},
        {"dim": 2, "kraus": [[[[1, 0], [0, 0]]]]},
        {"dim": 1, "kraus": [[[1.0]]]},
        {"dim": 1, "kraus": [[[[1, 0]]]], "label": 3},
    ],
)
def test_json_shape_errors(data):
    with pytest.raises(ParseError):
        channel_from_json(data)


def test_channel_is_immutable():
    ch = catalog.identity(2)
    with pytest.raises(ValueError):
        ch.kraus[0][0, 0] = 2.0


def test_conjugated_channel(rng):
    ch = catalog.kl97(0.3)
    u = linalg.random_unitary(4, rng)
    g = ch.conjugated(u)
    x = rng.normal(size=(4, 4))
    np.testing.assert_allclose(g(u @ x @ u.conj().T), u @ ch(x) @ u.conj().T, atol=1e-12)
