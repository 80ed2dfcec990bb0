import numpy as np
import pytest

from ep3chiral.model import build_special, ep3_couplings, ep_vector


def random_ep3_params(rng):
    """Special-model parameters with |e1 - e2| > 0.2, spread <= 5 and both couplings nonzero."""
    while True:
        e = rng.uniform(-2.5, 2.5, 3) + 1j * rng.uniform(-1, 1, 3)
        if abs(e[0] - e[1]) <= 0.2:
            continue
        if max(abs(a - b) for a in e for b in e) > 5:
            continue
        signs = tuple(int(s) for s in rng.choice([1, -1], 2))
        p = ep3_couplings(*e, *signs)
        if p.degenerate or min(abs(p.s2), abs(p.s3)) < 1e-3:
            continue
        return p


def random_ep3_models(seed, n):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = random_ep3_params(rng)
        out.append((p, build_special(p), ep_vector(*p.e, p.sign_s2, p.sign_s3)))
    return out


def random_csym(rng, n):
    A = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    A = (A + A.T) / 2
    # keep entries in the unit disc
    return A / max(1.0, np.max(np.abs(A)))


@pytest.fixture(scope="session")
def e013():
    """e = (0, 1, 3) with signs (+, -): the model whose couplings are s2 = 1/sqrt(27), s3 = -1.5396i."""
    p = ep3_couplings(0, 1, 3, 1, -1)
    return p, build_special(p), ep_vector(0, 1, 3, 1, -1)


@pytest.fixture(scope="session")
def e013_plus():
    """Same energies with both coupling signs positive."""
    p = ep3_couplings(0, 1, 3, 1, 1)
    return p, build_special(p), ep_vector(0, 1, 3, 1, 1)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").rstrip("ab"))):
            terminalreporter.write_line(line)
