import numpy as np
import pytest

from mot3d import BoxState


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_box(
    x=0.0, y=0.0, z=1.0, w=1.0, l=1.0, h=2.0, yaw=0.0,
    category="car", score=0.5, vx=None, vy=None,
):
    return BoxState(x=x, y=y, z=z, w=w, l=l, h=h, yaw=yaw,
                    category=category, score=score, vx=vx, vy=vy)


def random_box(rng, field=10.0, category="car"):
    return BoxState(
        x=float(rng.uniform(-field, field)),
        y=float(rng.uniform(-field, field)),
        z=float(rng.uniform(0.0, 2.0)),
        w=float(rng.uniform(0.5, 3.0)),
        l=float(rng.uniform(0.5, 8.0)),
        h=float(rng.uniform(0.5, 3.0)),
        yaw=float(rng.uniform(-np.pi, np.pi)),
        category=category,
        score=float(rng.uniform(0.0, 1.0)),
    )
