"""JSON-lines stdio server exposing environments to other languages.

Run with ``python3 -m mipgym.server``.  Each request is one JSON object per
line on stdin; each response is one JSON object per line on stdout:

    → {"id": 1, "op": "make_env", "task": "Branching", "reward": "-nnodes"}
    ← {"id": 1, "ok": true, "result": {"env": 1}}
    → {"id": 2, "op": "env_reset", "env": 1, "instance": {"path": "a.lp"}}
    ← {"id": 2, "ok": true, "result": {"observation": null, ...}}

Operations: ``make_env``, ``env_seed``, ``env_reset``, ``env_step``,
``env_close``, ``make_generator``, ``generate``, ``read_problem``,
``write_problem``, ``shutdown``.

Failures never kill the server: every error becomes
``{"ok": false, "error": {"type": ..., "message": ...}}`` and the loop
continues.  Closed or unknown handles raise ``ClosedHandleError``.

Marshaling: numeric arrays travel as ``{"dtype", "shape", "data"}`` with
``data`` holding base64 of the row-major bytes (one copy per array);
non-finite floats travel as the strings ``"inf"``, ``"-inf"``, ``"nan"``
because JSON has no representation for them.
"""

import base64
import json
import math
import sys

import numpy as np

from mipgym.cli import parse_reward_expr
from mipgym.engine import BranchCandidateSet
from mipgym.env import ParameterSpace, make_env
from mipgym.errors import ConfigurationError
from mipgym.generators import GeneratorConfig, preset
from mipgym.model import read_problem, write_problem
from mipgym.observations import (
    CandidateFeatures,
    CandidateFeaturesObs,
    NodeBipartite,
    NodeBipartiteObs,
)

OBSERVATIONS = {
    "node_bipartite": NodeBipartite,
    "candidate_features": CandidateFeatures,
    "none": None,
}


class ClosedHandleError(RuntimeError):
    """Raised when a request names a closed or never-opened handle."""


def _encode_number(value):
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _encode_array(array):
    array = np.ascontiguousarray(array)
    return {
        "dtype": str(array.dtype),
        "shape": list(array.shape),
        "data": base64.b64encode(array.tobytes()).decode("ascii"),
    }


def _encode_observation(obs):
    if obs is None:
        return None
    if isinstance(obs, NodeBipartiteObs):
        return {
            "kind": "node_bipartite",
            "variable_features": _encode_array(obs.variable_features),
            "constraint_features": _encode_array(obs.constraint_features),
            "edge_row": _encode_array(obs.edge_row),
            "edge_col": _encode_array(obs.edge_col),
            "edge_value": _encode_array(obs.edge_value),
        }
    if isinstance(obs, CandidateFeaturesObs):
        return {
            "kind": "candidate_features",
            "features": _encode_array(obs.features),
            "candidate_indices": _encode_array(obs.candidate_indices),
        }
    raise TypeError(f"cannot marshal observation {type(obs).__name__}")


def _encode_action_set(action_set):
    if action_set is None:
        return None
    if isinstance(action_set, BranchCandidateSet):
        return {
            "kind": "branch_candidates",
            "indices": _encode_array(action_set.indices),
            "fractionality": _encode_array(action_set.fractionality),
        }
    if isinstance(action_set, ParameterSpace):
        domains = {
            name: list(dom) if isinstance(dom, tuple) else dom
            for name, dom in action_set.domains.items()
        }
        return {
            "kind": "parameter_space",
            "names": list(action_set.names),
            "domains": domains,
        }
    raise TypeError(f"cannot marshal action set {type(action_set).__name__}")


def _encode_info(info):
    encoded = dict(info)
    for key in ("wall_time", "primal_bound", "dual_bound"):
        encoded[key] = _encode_number(encoded[key])
    return encoded


def _encode_instance(handle, instance):
    return {
        "instance": handle,
        "name": instance.name,
        "sense": instance.sense,
        "n_vars": instance.n_vars,
        "n_constraints": instance.n_constraints,
        "metadata": dict(instance.metadata),
    }


def _decode_action(action):
    # JSON numbers arrive as float even for whole values; branching wants int.
    if isinstance(action, float) and action.is_integer():
        return int(action)
    return action


class Server:
    """Dispatches decoded requests against a handle table."""

    def __init__(self):
        self._objects = {}
        self._next_handle = 1
        self.shutting_down = False

    # -- handle table ------------------------------------------------------

    def _put(self, kind, obj):
        handle = self._next_handle
        self._next_handle += 1
        self._objects[handle] = (kind, obj)
        return handle

    def _get(self, kind, handle):
        entry = self._objects.get(handle)
        if entry is None or entry[0] != kind:
            raise ClosedHandleError(f"no open {kind} handle {handle!r}")
        return entry[1]

    # -- operations --------------------------------------------------------

    def op_make_env(self, request):
        task = request.get("task", "Branching")
        obs_name = request.get("observation", "none")
        if obs_name not in OBSERVATIONS:
            raise ConfigurationError(
                f"unknown observation {obs_name!r}; "
                f"expected one of {sorted(OBSERVATIONS)}"
            )
        obs_cls = OBSERVATIONS[obs_name]
        reward_expr = request.get("reward")
        reward = (
            parse_reward_expr(reward_expr, opt_ref=request.get("opt_ref", 0.0))()
            if reward_expr
            else None
        )
        env = make_env(
            task,
            observation_function=obs_cls() if obs_cls else None,
            reward_function=reward,
            params=request.get("params"),
        )
        return {"env": self._put("env", env)}

    def op_env_seed(self, request):
        env = self._get("env", request["env"])
        env.seed(request["value"])
        return {}

    def _resolve_instance(self, source):
        if isinstance(source, dict) and "handle" in source:
            return self._get("instance", source["handle"])
        if isinstance(source, dict) and "path" in source:
            return read_problem(source["path"])
        if isinstance(source, int):
            return self._get("instance", source)
        if isinstance(source, str):
            return read_problem(source)
        raise ConfigurationError(
            "instance must be a path, a handle, or {'path'|'handle': ...}"
        )

    def op_env_reset(self, request):
        env = self._get("env", request["env"])
        instance = self._resolve_instance(request["instance"])
        obs, action_set, reward, done = env.reset(instance)
        return {
            "observation": _encode_observation(obs),
            "action_set": _encode_action_set(action_set),
            "reward": _encode_number(reward),
            "done": done,
        }

    def op_env_step(self, request):
        env = self._get("env", request["env"])
        obs, action_set, reward, done, info = env.step(
            _decode_action(request.get("action"))
        )
        return {
            "observation": _encode_observation(obs),
            "action_set": _encode_action_set(action_set),
            "reward": _encode_number(reward),
            "done": done,
            "info": _encode_info(info),
        }

    def op_env_close(self, request):
        self._get("env", request["env"])
        del self._objects[request["env"]]
        return {}

    def op_make_generator(self, request):
        family = request["family"]
        seed = request.get("seed", 0)
        if request.get("params"):
            config = GeneratorConfig(
                family=family, params=request["params"], seed=seed
            )
        else:
            config = preset(family, request.get("tier", "desk"), seed=seed)
        return {"generator": self._put("generator", config.build())}

    def op_generate(self, request):
        generator = self._get("generator", request["generator"])
        instance = generator.generate(request.get("index", 0))
        return _encode_instance(self._put("instance", instance), instance)

    def op_read_problem(self, request):
        instance = read_problem(request["path"])
        return _encode_instance(self._put("instance", instance), instance)

    def op_write_problem(self, request):
        instance = self._get("instance", request["instance"])
        write_problem(instance, request["path"])
        return {"path": request["path"]}

    def op_shutdown(self, request):
        self.shutting_down = True
        return {}

    # -- dispatch ----------------------------------------------------------

    def handle_line(self, line):
        request_id = None
        try:
            request = json.loads(line)
            request_id = request.get("id")
            op = request.get("op")
            handler = getattr(self, f"op_{op}", None)
            if handler is None or not isinstance(op, str):
                raise ConfigurationError(f"unknown op {op!r}")
            result = handler(request)
            return {"id": request_id, "ok": True, "result": result}
        except Exception as exc:  # every failure becomes a response
            return {
                "id": request_id,
                "ok": False,
                "error": {"type": type(exc).__name__, "message": str(exc)},
            }


def serve(stdin=None, stdout=None):
    """Blocking request loop; returns after a ``shutdown`` op or EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    server = Server()
    for line in stdin:
        if not line.strip():
            continue
        response = server.handle_line(line)
        stdout.write(json.dumps(response, allow_nan=False) + "\n")
        stdout.flush()
        if server.shutting_down:
            break


if __name__ == "__main__":
    serve()
