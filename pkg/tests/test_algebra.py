import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noiseless import catalog, linalg
from noiseless.algebra import (
    algebra_from_span,
    center,
    commutant,
    full_algebra,
    pattern_residuals,
    relative_commutant,
    structure_decompose,
    verify_decomposition,
)
from noiseless.channel import Projector
from noiseless.errors import DegenerateSample

from conftest import ket, proj


def algebra_invariants_ok(a, tol=1e-8):
    res = a.invariant_residuals()
    return all(v < tol for v in res.values())


def test_commutant_z_dephasing_is_diagonal():
    ch = catalog.z_dephasing()
    a = commutant(ch.kraus)
    assert a.dim == 4
    diag = [np.diag(np.eye(4)[i]) for i in range(4)]
    assert linalg.containment_residual(diag, a.basis) < 1e-12
    for b in a.basis:
        assert np.linalg.norm(b - np.diag(np.diag(b))) < 1e-12
    assert algebra_invariants_ok(a)


def test_commutant_identity_is_full():
    for d in (1, 2, 3):
        assert commutant([np.eye(d)]).dim == d * d


def test_commutant_u_dfs():
    # oracle: UZ1 and UZ2 are diagonal with joint eigenvalue pairs
    # |00>: (1, 1), |01>: (1, -1), |10>: (-1, 1), |11>: (1, 1) up to the U sign
    ch = catalog.u_dfs()
    a = commutant(ch.kraus)
    assert a.dim == 6
    # span{a|00><00| + b|00><11| + c|11><00| + d|11><11|} plus |01><01| and |10><10|
    expected = [
        np.outer(ket("00"), ket("00")),
        np.outer(ket("00"), ket("11")),
        np.outer(ket("11"), ket("00")),
        np.outer(ket("11"), ket("11")),
        proj("01"),
        proj("10"),
    ]
    assert linalg.containment_residual(expected, a.basis) < 1e-12
    assert linalg.containment_residual(a.basis, linalg.orthonormalize_hs(expected)) < 1e-12
    assert algebra_invariants_ok(a)


def test_commutant_kl97_full():
    a = commutant(catalog.kl97(0.3).kraus)
    assert a.dim == 4
    s = structure_decompose(a)
    assert s.blocks == ((2, 2),)


def test_commutant_compressed_to_dfs():
    ch = catalog.kl97(0.3)
    p = Projector.from_matrix(proj("01", "10"))
    a = commutant(ch.kraus, p)
    assert a.rank == 2 and a.dim == 4
    emb = a.embedded_basis()
    for b in emb:
        assert np.linalg.norm(p.matrix @ b @ p.matrix - b) < 1e-12
    expected = [np.outer(ket(x), ket(y)) for x in ("01", "10") for y in ("01", "10")]
    assert linalg.containment_residual(expected, emb) < 1e-12


def test_double_commutant_contains_generators(rng):
    ops = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2)]
    # put them in a block structure so the algebra is not all of M_d
    ops = [np.kron(np.eye(2), o) for o in ops]
    a1 = commutant(ops)
    a2 = commutant(a1.basis)
    gens = ops + [o.conj().T for o in ops] + [x @ y for x in ops for y in ops]
    assert linalg.containment_residual(gens, a2.basis) < 1e-8
    # the commutant of 1_2 (x) M_3 is M_2 (x) 1_3, i.e. three copies of M_2
    assert structure_decompose(a1).blocks == ((3, 2),)
    assert structure_decompose(a2).blocks == ((2, 3),)


def test_center_of_full_algebra_is_scalars():
    z = center(full_algebra(3))
    assert len(z) == 1
    assert np.linalg.norm(z[0] - np.trace(z[0]) / 3 * np.eye(3)) < 1e-12


def test_relative_commutant_of_block_algebra():
    # 1_2 (x) M_2 has relative commutant M_2 (x) 1_2
    basis = [np.kron(np.eye(2), e) for e in (np.diag([1.0, 0]), np.diag([0, 1.0]), np.array([[0, 1.0], [0, 0]]), np.array([[0, 0], [1.0, 0]]))]
    a = algebra_from_span(basis)
    rc = relative_commutant(a)
    assert rc.dim == 4
    s = structure_decompose(a)
    assert s.blocks == ((2, 2),)


@pytest.mark.parametrize(
    "blocks",
    [[(1, 1)] * 4, [(1, 3)], [(2, 2)], [(2, 2), (1, 1)], [(1, 2), (3, 1), (1, 1)], [(2, 3), (1, 2)]],
)
def test_structure_of_planted_algebras(blocks):
    rng = np.random.default_rng(len(blocks))
    d = sum(m * n for m, n in blocks)
    g = linalg.random_unitary(d, rng)
    basis = []
    o = 0
    for m, n in blocks:
        for i in range(n):
            for j in range(n):
                x = np.zeros((d, d), dtype=complex)
                e = np.zeros((n, n))
                e[i, j] = 1.0
                x[o : o + m * n, o : o + m * n] = np.kron(np.eye(m), e)
                basis.append(g @ x @ g.conj().T)
        o += m * n
    a = algebra_from_span(basis)
    s = structure_decompose(a, seed=3)
    expected = sorted(blocks, key=lambda t: (-t[1], -t[0]))
    assert [tuple(b) for b in s.blocks] == [tuple(b) for b in expected]
    book = s.bookkeeping()
    assert all(v for v in book.values() if isinstance(v, bool))
    assert book["unitarity_residual"] < 1e-10
    rep = verify_decomposition(a, s)
    assert rep.passed and rep.off_pattern_residual < 1e-8


def test_full_algebra_decomposition():
    s = structure_decompose(full_algebra(4))
    assert s.blocks == ((1, 4),)
    assert verify_decomposition(full_algebra(4), s).passed


def test_decomposition_deterministic():
    a = commutant(catalog.collective_dephasing(3).kraus)
    s1 = structure_decompose(a, seed=7)
    s2 = structure_decompose(a, seed=7)
    assert s1.blocks == s2.blocks
    np.testing.assert_array_equal(s1.unitary, s2.unitary)


def test_random_unitary_breaks_pattern(rng):
    from dataclasses import replace

    a = commutant(catalog.u_dfs().kraus)
    s = structure_decompose(a)
    bad = replace(s, unitary=linalg.random_unitary(4, rng))
    rep = verify_decomposition(a, bad)
    assert not rep.passed and rep.off_pattern_residual > 0.1


def test_pattern_residuals_exact():
    x = np.kron(np.eye(2), np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert pattern_residuals(x, [(2, 2)]) == (0.0, 0.0)
    x[0, 2] = 0.5
    assert pattern_residuals(x, [(2, 2)])[0] == 0.5


def test_degenerate_sample_after_retries(monkeypatch):
    import noiseless.algebra as alg

    monkeypatch.setattr(alg, "_try_decompose", lambda *args: None)
    with pytest.raises(DegenerateSample):
        structure_decompose(full_algebra(2), max_retries=2)


@given(st.integers(0, 2**31 - 1))
def test_gauge_invariance_of_blocks(seed):
    rng = np.random.default_rng(seed)
    ch = catalog.u_dfs()
    u = linalg.random_unitary(4, rng)
    s0 = structure_decompose(commutant(ch.kraus))
    s1 = structure_decompose(commutant(ch.conjugated(u).kraus), seed=seed % 1000)
    assert s0.blocks == s1.blocks
