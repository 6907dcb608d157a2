import numpy as np
import pytest
import sympy as sp


def basis(n, k):
    """Unit vector e_k with 1-based k."""
    v = np.zeros(n, dtype=complex)
    v[k - 1] = 1.0
    return v


def to_sympy(m):
    m = np.asarray(m)
    assert np.all(m.imag == 0)
    return sp.Matrix([[sp.nsimplify(float(x.real), rational=True) for x in row] for row in m])


def sympy_rank_filtration(m):
    a = to_sympy(m)
    n = a.shape[0]
    out, p = [], a
    for _ in range(n):
        out.append(p.rank())
        p = p * a
    return out


def principal_angles(a_cols, b_cols):
    qa, _ = np.linalg.qr(np.column_stack(a_cols))
    qb, _ = np.linalg.qr(np.column_stack(b_cols))
    s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


@pytest.fixture
def e():
    return basis


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
