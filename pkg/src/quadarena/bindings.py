"""Foreign-function boundary to the vectorized environment.

A C-style surface: integer handles, flat contiguous float64 buffers, and
integer status codes instead of exceptions. No call mutates environment
state on an error path. `python -m quadarena.bindings` serves the same five
operations as JSON lines over stdio for out-of-process consumers (the
TypeScript training frontend drives this); array payloads travel base64-raw
so the boundary is bit-exact.
"""

import base64
import json
import sys

import numpy as np

from .config import Config, ConfigError
from .vecenv import EnvBatch, EnvFault

__all__ = ["OK", "BAD_HANDLE", "BAD_SHAPE", "NON_FINITE", "BAD_TASK",
           "INTERNAL", "ffi_create", "ffi_spaces", "ffi_reset", "ffi_step",
           "ffi_destroy", "serve_stdio"]

OK = 0
BAD_HANDLE = 1
BAD_SHAPE = 2
NON_FINITE = 3
BAD_TASK = 4
INTERNAL = 5

_handles = {}
_next_handle = 1


def ffi_create(task_id, n_envs, master_seed, overrides=None, workers=1):
    """Returns (status, handle)."""
    global _next_handle
    try:
        cfg = Config(overrides or {})
        batch = EnvBatch(task_id, int(n_envs), int(master_seed), cfg=cfg,
                         workers=int(workers))
    except ConfigError:
        return BAD_TASK, 0
    except Exception:
        return INTERNAL, 0
    h = _next_handle
    _next_handle += 1
    _handles[h] = batch
    return OK, h


def ffi_spaces(handle):
    batch = _handles.get(handle)
    if batch is None:
        return BAD_HANDLE, None
    return OK, batch.spaces()


def ffi_reset(handle):
    batch = _handles.get(handle)
    if batch is None:
        return BAD_HANDLE, None
    obs = batch.reset()
    return OK, np.ascontiguousarray(obs, dtype=np.float64).ravel().copy()


def ffi_step(handle, actions_flat):
    """actions_flat: n_envs*n_agents*3 float64 buffer.

    Returns (status, obs_flat, rewards_flat, dones_u8, infos). On a nonzero
    status nothing has advanced.
    """
    batch = _handles.get(handle)
    if batch is None:
        return BAD_HANDLE, None, None, None, None
    arr = np.asarray(actions_flat, dtype=np.float64).ravel()
    want = batch.n_envs * batch.task.n_agents * 3
    if arr.size != want:
        return BAD_SHAPE, None, None, None, None
    if not np.isfinite(arr).all():
        return NON_FINITE, None, None, None, None
    try:
        res = batch.step(arr.reshape(batch.n_envs, batch.task.n_agents, 3))
    except EnvFault:
        return BAD_SHAPE, None, None, None, None
    infos = []
    for e, info in enumerate(res.infos):
        if info is None:
            continue
        infos.append({"env": e, "outcome": info["outcome"],
                      "episode_return": [float(x) for x in info["episode_return"]],
                      "episode_len": info["episode_len"]})
    return (OK,
            res.obs.ravel().copy(),
            res.rewards.ravel().copy(),
            res.dones.astype(np.uint8).copy(),
            infos)


def ffi_destroy(handle):
    batch = _handles.pop(handle, None)
    if batch is None:
        return BAD_HANDLE
    batch.close()
    return OK


# --------------------------------------------------------------------------
# stdio JSON-lines server
# --------------------------------------------------------------------------

def _b64(arr):
    return base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii")


def _from_b64(text):
    return np.frombuffer(base64.b64decode(text), dtype=np.float64)


def serve_stdio(stdin=None, stdout=None):
    """One JSON request per line; one JSON response per line.

    ops: create {task, n_envs, seed, overrides?, workers?} -> {handle}
         spaces {handle} -> {spaces}
         reset {handle} -> {obs_b64}
         step {handle, actions_b64 | actions} -> {obs_b64, rew_b64, done, infos}
         destroy {handle} -> {}
         close {} -> exits
    """
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            _reply(stdout, {"status": INTERNAL, "error": f"bad json: {exc}"})
            continue
        op = req.get("op")
        try:
            if op == "close":
                _reply(stdout, {"status": OK})
                break
            _reply(stdout, _dispatch(op, req))
        except Exception as exc:  # never crash the server loop
            _reply(stdout, {"status": INTERNAL, "error": repr(exc)})
    for h in list(_handles):
        ffi_destroy(h)


def _dispatch(op, req):
    if op == "create":
        status, handle = ffi_create(req["task"], req["n_envs"],
                                    req.get("seed", 0),
                                    overrides=req.get("overrides"),
                                    workers=req.get("workers", 1))
        return {"status": status, "handle": handle}
    if op == "spaces":
        status, meta = ffi_spaces(req.get("handle"))
        return {"status": status, "spaces": meta}
    if op == "reset":
        status, obs = ffi_reset(req.get("handle"))
        out = {"status": status}
        if status == OK:
            out["obs_b64"] = _b64(obs)
        return out
    if op == "step":
        if "actions_b64" in req:
            actions = _from_b64(req["actions_b64"])
        else:
            actions = np.asarray(req.get("actions", []), dtype=np.float64)
        status, obs, rew, done, infos = ffi_step(req.get("handle"), actions)
        out = {"status": status}
        if status == OK:
            out["obs_b64"] = _b64(obs)
            out["rew_b64"] = _b64(rew)
            out["done"] = [int(d) for d in done]
            out["infos"] = infos
        return out
    if op == "destroy":
        return {"status": ffi_destroy(req.get("handle"))}
    return {"status": INTERNAL, "error": f"unknown op {op!r}"}


def _reply(stdout, doc):
    stdout.write(json.dumps(doc, separators=(",", ":")) + "\n")
    stdout.flush()


if __name__ == "__main__":
    serve_stdio()
