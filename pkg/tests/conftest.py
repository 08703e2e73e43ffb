import pytest

from otsuki import geometry

# rotation -> (reference turning value, eigenvalue index, reference functional value)
REFERENCE = {
    (2, 3): (0.3379, 3, 79.91),
    (3, 5): (0.1273, 5, 127.7),
    (4, 7): (0.07526, 7, 177.2),
    (5, 8): (0.1874, 9, 206.7),
    (5, 9): (0.05220, 9, 227.1),
}


@pytest.fixture(scope="session")
def torus_23():
    return geometry.build_torus(geometry.RotationNumber(2, 3))


@pytest.fixture(scope="session")
def tori(torus_23):
    """All five benchmark tori, keyed by (p, q)."""
    out = {(2, 3): torus_23}
    for p, q in REFERENCE:
        if (p, q) not in out:
            out[(p, q)] = geometry.build_torus(geometry.RotationNumber(p, q))
    return out


@pytest.fixture(scope="session")
def clifford():
    return geometry.clifford_torus()
