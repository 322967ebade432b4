#!/usr/bin/env python3
"""Smoke test for the ando_lab Python extension.

Loads the cdylib built by `cargo build -p ando-lab-py` (debug or
release), renames it so CPython can import it, and exercises the main
entry points against independently computed values. Prints one
PASS/FAIL line per check and exits non-zero on any failure.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "debug" / "libando_lab.so",
        ROOT / "target" / "release" / "libando_lab.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("libando_lab.so not found; run `cargo build -p ando-lab-py` first")
    stage = Path(tempfile.mkdtemp(prefix="ando_lab_"))
    shutil.copy2(built, stage / "ando_lab.so")
    sys.path.insert(0, str(stage))
    import ando_lab

    return ando_lab


lab = load_module()
failures = []


def check(name, cond, detail=""):
    status = "PASS" if cond else "FAIL"
    line = f"{status}: {name}"
    if detail and not cond:
        line += f" ({detail})"
    print(line)
    if not cond:
        failures.append(name)


def mat(a):
    """Nested-list complex matrix from a numpy array."""
    return [[complex(v) for v in row] for row in a]


jordan2 = np.array([[0, 1], [0, 0]], dtype=complex)
jordan3 = np.diag(np.ones(2), -1).astype(complex)

# --- linear algebra ---------------------------------------------------------

check("operator_norm of a Jordan block is 1",
      abs(lab.operator_norm(mat(jordan2)) - 1.0) < 1e-12)

t = np.array([[0.5, 0.5], [0, 0.5]], dtype=complex)
sv = np.linalg.svd(t, compute_uv=False)
check("singular_values match numpy",
      max(abs(a - b) for a, b in zip(lab.singular_values(mat(t)), sv)) < 1e-12)
check("spectral_radius of the triangular block is 0.5",
      abs(lab.spectral_radius(mat(t)) - 0.5) < 1e-12)

roots = lab.minimal_polynomial(mat(t))
check("minimal polynomial sees the double root",
      len(roots) == 1 and abs(roots[0][0] - 0.5) < 1e-8 and roots[0][1] == 2,
      f"roots={roots}")

try:
    lab.operator_norm([[1 + 0j], [2 + 0j, 3 + 0j]])
    check("ragged matrix raises ValueError", False)
except ValueError:
    check("ragged matrix raises ValueError", True)

# --- model space ------------------------------------------------------------

ms = lab.ModelSpace(mat(t))
shift = np.array(ms.compressed_shift())
check("model space dimension equals multiplicity sum", ms.dim == 2)
check("compressed shift is contractive",
      np.linalg.norm(shift, 2) <= 1 + 1e-10,
      f"norm={np.linalg.norm(shift, 2)}")
check("compressed shift spectrum matches the roots",
      max(abs(ev - 0.5) for ev in np.linalg.eigvals(shift)) < 1e-8)
check("model space is well conditioned here", not ms.ill_conditioned)

# --- torus bracket and smoothing --------------------------------------------

# p(z, w) = z + z^3 w on a Jordan pair: the bound collapses to the
# leading coefficient while the torus sup stays at 2.
p = [(1, 0, 1 + 0j), (3, 1, 1 + 0j)]
lo, hi = lab.torus_sup_norm(p, grid=4096)
check("torus bracket contains the known sup 2",
      lo <= 2.0 + 1e-9 and 2.0 <= hi and hi - lo < 1e-2,
      f"lo={lo} hi={hi}")

check("Fejer deviation bound is the weighted coefficient sum",
      abs(lab.fejer_deviation_bound([(1, 0, 1 + 0j), (0, 1, 1 + 0j)], 1) - 1.0) < 1e-12)

# --- bounds -----------------------------------------------------------------

b = lab.bound_am3(mat(jordan3), mat(jordan3), p, samples=4, seed=7)
check("nilpotent pair bound collapses to the leading coefficient",
      abs(b.value - 1.0) < 1e-8 and abs(b.canonical - 1.0) < 1e-8,
      repr(b))
check("sampled extensions agree with the canonical bound",
      len(b.sampled) == 4 and all(abs(v - 1.0) < 1e-8 for _, v in b.sampled))
check("bound improves on the torus sup", lo - b.value > 0.9)

u = np.diag(np.exp(1j * np.array([0.3, 1.1, -2.4])))
v = np.diag(np.exp(1j * np.array([-0.7, 0.2, 2.9])))
val, direct = lab.bound_two_unitary_exact(mat(u), mat(v), p)
check("two-unitary bound equals the direct norm",
      abs(val - direct) <= 1e-10, f"val={val} direct={direct}")

blocks = lab.structure_blocks(mat(np.diag([1, 0.5]).astype(complex)),
                              mat(np.diag([1j, 0.3]).astype(complex)))
nonzero = sorted(b for b in blocks if b[2] > 0)
check("structure splitting separates unitary and cnu parts",
      nonzero == [("cnu", "cnu", 1), ("unitary", "unitary", 1)],
      f"blocks={blocks}")

# --- dilation ---------------------------------------------------------------

d = lab.ando_dilation(mat(jordan2), mat(jordan2))
check("dilation kernel is isometric", d.kernel_isometry <= 1e-9)
check("dilation operators commute", d.commutation <= 1e-10)
check("transfer function is contractive", d.transfer_norm <= 1 + 1e-10)
k = np.array(d.kernel())
check("kernel isometry reproduced in numpy",
      np.linalg.norm(k.conj().T @ k - np.eye(k.shape[1]), 2) <= 1e-9)
v1, v2 = np.array(d.v1()), np.array(d.v2())
check("adjoint intertwining holds for both operators",
      np.linalg.norm(k @ jordan2.conj().T - v1.conj().T @ k, 2) <= 1e-9
      and np.linalg.norm(k @ jordan2.conj().T - v2.conj().T @ k, 2) <= 1e-9)

# --- commutant lift ---------------------------------------------------------

a = t + 0.25 * t @ t
lift = lab.commutant_lift(mat(t), mat(t), mat(a))
nrm = np.linalg.norm(a, 2)
check("lift norm is certified two-sided",
      nrm - 1e-6 <= lift.certified_norm <= nrm + 1e-8,
      f"certified={lift.certified_norm} target={nrm}")
check("lift interpolates on the model space", lift.interpolation_residual <= 1e-8)
psi0 = np.array(lift.eval(0j))
check("lift symbol evaluates inside the disc",
      psi0.ndim == 2 and np.all(np.isfinite(psi0)))

# --- chain report -----------------------------------------------------------

env = json.loads(lab.verify_chain_json(mat(jordan2), mat(jordan2),
                                       [(1, 1, 1 + 0j)], grid=512))
verdicts = env["report"]["bounds"]["verdicts"]
check("chain report carries a schema version and verdicts",
      env["schema_version"] >= 1 and len(verdicts) > 0,
      f"schema_version={env.get('schema_version')}")
check("every chain verdict passes",
      all(v["pass"] or v["advisory"] for v in verdicts),
      f"failing={[v['inequality'] for v in verdicts if not v['pass']]}")

# ----------------------------------------------------------------------------

print(f"\nsmoke test: {len(failures)} failure(s)" if failures else "\nsmoke test: all checks passed")
sys.exit(1 if failures else 0)
