import numpy as np
import pytest

from quadarena.config import Config


@pytest.fixture(scope="session")
def cfg():
    return Config()


@pytest.fixture(scope="session")
def flat_arena():
    from quadarena import terrain
    return terrain.compose_track([terrain.Flat((20.0, 20.0))], (0.0, 0.0))


def make_sim(bodies, arena, cfg, n_envs=1, **kw):
    from quadarena.core import Sim
    sim = Sim(n_envs, bodies, arena, cfg, **kw)
    for e in range(n_envs):
        sim.reset_env(e)
    return sim


def free_disc(name="d", radius=0.3, mass=10.0, mu=0.0, cls=3):
    from quadarena.core import Body
    return Body(name, ("disc", radius), mass, mu, cls)


def rollout(batch, policy, steps):
    """Run a batch under a policy; returns list of per-step infos flattened."""
    batch.reset()
    if hasattr(policy, "reset"):
        policy.reset(batch)
    finished = []
    for _ in range(steps):
        res = batch.step(policy(batch))
        for e, info in enumerate(res.infos):
            if info is not None:
                finished.append((e, info))
    return finished
