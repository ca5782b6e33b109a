"""Searching against a classifier running in a different process.

The engine treats any process speaking the newline-delimited JSON protocol
as an oracle. This demo prefers the bundled Node shim (if built under
shim/dist/); otherwise it falls back to a minimal inline Python server, so
the transport path is exercised either way.
"""

import shutil
import sys
from pathlib import Path

import numpy as np

from graphcf import (
    ExternalOracle,
    Graph,
    OracleSession,
    SearchConfig,
    VertexUniverse,
    run_pipeline,
)

SHIM = Path(__file__).resolve().parent.parent / "shim" / "dist" / "cli.js"
FALLBACK_SERVER = """
import sys, json
for line in sys.stdin:
    msg = json.loads(line)
    if msg["type"] == "hello":
        print(json.dumps({"type": "ready"}), flush=True)
    elif msg["type"] == "classify":
        label = 1 if len(msg["edges"]) >= 10 else 0
        print(json.dumps({"type": "label", "label": label}), flush=True)
"""

universe = VertexUniverse.anonymous(6)
node = shutil.which("node")
if node and SHIM.exists():
    command = [node, str(SHIM), "--model", "edge-count-threshold:10",
               "--n-vertices", str(universe.n)]
    print("using the bundled Node shim")
else:
    command = [sys.executable, "-c", FALLBACK_SERVER]
    print("shim not built; using the inline Python fallback server")

rng = np.random.default_rng(0)
mask = np.zeros(universe.n_pairs, dtype=bool)
mask[rng.choice(universe.n_pairs, size=12, replace=False)] = True
original = Graph.from_mask(universe, mask)

with ExternalOracle.spawn(command, universe, timeout=30.0) as oracle:
    print("handshake complete:", oracle.describe())
    session = OracleSession(oracle)
    result = run_pipeline(original, session, SearchConfig(seed=1), graph_id="remote")
    print(f"status {result.status}: distance {result.distance} "
          f"(phase 1 {result.phase1_distance}), "
          f"calls {result.calls_phase1}+{result.calls_phase2}")
    print(f"distinct queries {session.calls_used}, cache hits {session.cache_hits}")
