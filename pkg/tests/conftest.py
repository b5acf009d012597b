import numpy as np
import pytest

from curvlab.qms_core import build_qms, random_unitary


def random_gns_generator(rng, n, tracial=False):
    """GNS-symmetric generator with a random faithful σ.

    Jumps are rotated matrix units with their modular frequencies plus one
    traceless diagonal jump.
    """
    lam = np.ones(n) if tracial else np.exp(rng.uniform(-1.0, 1.0, n))
    lam = n * lam / lam.sum()
    u = random_unitary(rng, n)
    sigma = (u * lam) @ u.conj().T
    jumps, omegas = [], []
    for p in range(n):
        for q in range(p + 1, n):
            c = rng.uniform(0.2, 1.0)
            for a, b in ((p, q), (q, p)):
                e = np.zeros((n, n), dtype=complex)
                e[a, b] = c
                jumps.append(u @ e @ u.conj().T)
                omegas.append(float(np.log(lam[b] / lam[a])))
    h = rng.standard_normal(n)
    h -= h.mean()
    jumps.append(u @ np.diag(h).astype(complex) @ u.conj().T)
    omegas.append(0.0)
    return build_qms(jumps, omegas, 0.5 * (sigma + sigma.conj().T))


@pytest.fixture
def gns_generator():
    return random_gns_generator


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(verdicts, key=lambda k: (int("".join(c for c in k if c.isdigit())), k))
    for key in order:
        terminalreporter.write_line(verdicts[key])
