import numpy as np
import pytest

# (xi, eta) of the vertices with alpha = beta = 0, and the alpha/beta shifts
_XI0 = np.array([1.0, -1.0, -1.0, 1.0])
_ETA0 = np.array([1.0, 1.0, -1.0, -1.0])
_SHIFT = np.array([1.0, -1.0, 1.0, -1.0])


def quads_from_frames(center, r, s, alpha, beta):
    """Vertices (n, 4, 2) of quads with prescribed midpoint frames."""
    xi = _XI0 + _SHIFT * alpha[:, None]
    eta = _ETA0 + _SHIFT * beta[:, None]
    return (center[:, None, :] + xi[..., None] * r[:, None, :]
            + eta[..., None] * s[:, None, :])


def random_quads(n, seed=0, max_shape=0.9):
    """n random convex counterclockwise quads with |alpha| + |beta| <= max_shape.

    Returns the vertices and the prescribed (alpha, beta).
    """
    rng = np.random.default_rng(seed)
    center = rng.uniform(-5, 5, size=(n, 2))
    scale = 10.0 ** rng.uniform(-1, 1, size=n)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    phi = theta + rng.uniform(0.3, np.pi - 0.3, size=n)
    len_s = rng.uniform(0.3, 1.0, size=n)
    r = scale[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    s = (scale * len_s)[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    total = max_shape * rng.uniform(0, 1, size=n)
    split = rng.uniform(0, 1, size=n)
    alpha = total * split * rng.choice([-1.0, 1.0], size=n)
    beta = total * (1 - split) * rng.choice([-1.0, 1.0], size=n)
    return quads_from_frames(center, r, s, alpha, beta), alpha, beta


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
