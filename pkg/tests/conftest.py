import numpy as np
import pytest

from thickknots.polygon import KnotPolygon, regular_polygon, validate_polygon

# one verdict line per acceptance criterion, echoed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line("  " + line)


def random_equilateral(n, seed, tries=200):
    """Random closed equilateral n-gon: random unit steps, closure defect
    spread out, then projected back to unit edges until both converge."""
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        e = rng.standard_normal((n, 3))
        e /= np.linalg.norm(e, axis=1)[:, None]
        ok = True
        for _ in range(500):
            e -= e.mean(axis=0)
            lengths = np.linalg.norm(e, axis=1)
            if np.min(lengths) < 1e-6:
                ok = False
                break
            e /= lengths[:, None]
            if np.max(np.abs(np.linalg.norm(e, axis=1) - 1.0)) < 1e-14 and \
               np.max(np.abs(e.sum(axis=0))) < 1e-12:
                break
        if not ok:
            continue
        e -= e.sum(axis=0) / n
        v = np.zeros((n, 3))
        v[1:] = np.cumsum(e[:-1], axis=0)
        lengths = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        if np.max(np.abs(lengths - 1.0)) < 1e-9:
            return validate_polygon(v)
    raise RuntimeError(f"no closed equilateral {n}-gon after {tries} tries")


def random_convex_planar(n, seed):
    """Random planar convex equilateral n-gon in the z = 0 plane, built by
    perturbing the regular turning angles and renormalizing the closure."""
    rng = np.random.default_rng(seed)
    base = 2.0 * np.pi / n
    for _ in range(500):
        turn = base * (1.0 + 0.4 * (rng.random(n) - 0.5))
        turn *= 2.0 * np.pi / turn.sum()
        if np.any(turn <= 0.0) or np.any(turn >= np.pi):
            continue
        head = np.cumsum(np.concatenate([[0.0], turn[:-1]]))
        e = np.column_stack([np.cos(head), np.sin(head), np.zeros(n)])
        for _ in range(400):
            e[:, :2] -= e[:, :2].mean(axis=0)
            lengths = np.linalg.norm(e, axis=1)
            if np.min(lengths) < 1e-6:
                break
            e /= lengths[:, None]
        if np.max(np.abs(np.linalg.norm(e, axis=1) - 1.0)) > 1e-12:
            continue
        e -= e.sum(axis=0) / n
        v = np.zeros((n, 3))
        v[1:] = np.cumsum(e[:-1], axis=0)
        try:
            K = validate_polygon(v)
        except Exception:
            continue
        # convexity: all projected cross products one sign
        P = v[:, :2]
        d = np.roll(P, -1, axis=0) - P
        cr = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
        if np.all(cr > 1e-9):
            return K
    raise RuntimeError("no convex planar polygon found")


# a hexagonal trefoil and an octagonal figure-eight, both checked against
# projections from many directions
TREFOIL_6 = np.array([
    [1.0000000000000002e+00, 0.0000000000000000e+00, 0.0000000000000000e+00],
    [1.0791539033902182e+00, -9.9669340826323860e-01, 1.8355094734570226e-02],
    [1.5565504435992894e-01, -6.8310227400352541e-01, 2.3928598411743146e-01],
    [1.0763361124887374e+00, -5.5079738530436240e-01, -1.2792211385353297e-01],
    [9.3846890622258217e-01, -6.0790014056304076e-01, 8.6088115716565738e-01],
    [5.0000000000000400e-01, -8.6602540378441772e-01, 2.7755575615628914e-15],
])

FIGURE_EIGHT_8 = np.array([
    [1.3065629648763766, 0.0, 0.0],
    [0.6034577132171547, -0.6980414470610075, 0.1355770750319028],
    [1.4254930239163304, -0.3579402412844148, -0.3211385014410576],
    [0.9571446484025381, -0.7273384710762714, 0.4814789335678512],
    [0.516243305706395, -0.34140332800886386, -0.3288667157413274],
    [1.2948270273653044, -0.4413894920997675, 0.29065742047788695],
    [1.840784855202633, -0.9170354813328032, -0.39904609781799083],
    [0.9238795325112865, -0.923879532511287, 0.0],
])


@pytest.fixture
def trefoil():
    return validate_polygon(TREFOIL_6)


@pytest.fixture
def figure_eight():
    return validate_polygon(FIGURE_EIGHT_8)


@pytest.fixture
def square():
    return validate_polygon(np.array([
        [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0],
    ]))
