"""Runs a generated function on tensors from a JSON file.

usage: run_generated.py <module dir> <function> <input.json> <output.json>

input: {"tensors": [{"shape": [...], "data": [...]}, ...],
        "calls": [[which_net or null, which_env or null], ...]}
output: one entry per call, {"shape", "data"} or {"error": message}
"""

import importlib
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
module_dir, name, src, dst = sys.argv[1:5]
sys.path.insert(0, module_dir)
func = getattr(importlib.import_module(name), name)

with open(src) as f:
    spec = json.load(f)
tensors = [np.array(t["data"], dtype=float).reshape(t["shape"]) for t in spec["tensors"]]
results = []
for net, env in spec["calls"]:
    args = [tensors]
    kwargs = {}
    if net is not None:
        kwargs["which_net"] = net
    if env is not None:
        kwargs["which_env"] = env
    try:
        r = np.asarray(func(*args, **kwargs))
        results.append({"shape": list(r.shape), "data": r.reshape(-1).tolist()})
    except ValueError as e:
        results.append({"error": str(e)})
with open(dst, "w") as f:
    json.dump(results, f)
