"""Embedded property suite behind ``spdkit selftest``.

Each property is a small named check; the runner prints one PASS/FAIL line
per property plus a summary count, and the whole run is reproducible from a
single seed. The oracle-equivalence and bin-agreement properties route
every comparison through :mod:`spdkit.reference` and ``spd.bin_index``, so
a planted off-by-one in the binning shows up here by name.
"""

from __future__ import annotations

import numpy as np

from . import reference, spd, synth
from .safm import SafmParams, safm_forward, standardize
from .spd import BinSpec
from .spdmap import compute_map, deserialize, serialize


def _bin_index_agreement(rng: np.random.Generator):
    spec = BinSpec()
    r = rng.uniform(0.0, 2.0, size=500)
    r[:5] = [0.0, 2.0, 1.0, spec.r_edges[0], spec.r_edges[3]]
    theta = rng.uniform(0.0, 2.0 * np.pi, size=500)
    theta[:4] = [0.0, np.pi, np.pi / 2.0, 2.0 * np.pi - 1e-12]
    want_i = spd.radius_bins(r, spec)
    want_j = spd.angle_bins(theta, spec.n)
    for k in range(r.size):
        i, j = spd.bin_index(float(r[k]), float(theta[k]), spec)
        if i != want_i[k] or j != want_j[k]:
            return (f"scalar and vectorized bins disagree at r={r[k]!r}, "
                    f"theta={theta[k]!r}: ({i},{j}) vs ({want_i[k]},{want_j[k]})")
    return None


def _oracle_equivalence(rng: np.random.Generator):
    for trial in range(8):
        h = int(rng.integers(6, 25))
        w = int(rng.integers(6, 25))
        inst = synth.random_map(rng, h, w)
        fast = compute_map(inst).data
        slow = reference.map_reference(inst)
        err = float(np.abs(fast - slow).max())
        if err > 1e-9:
            return f"trial {trial}: max abs difference {err:.3e} on a {h}x{w} map"
    return None


def _sum_to_one(rng: np.random.Generator):
    for inst in (synth.square_map(5), synth.disk_map(7),
                 synth.random_map(rng, 20, 20)):
        sums = compute_map(inst).data.sum(axis=2)
        ids, counts = np.unique(inst.ids, return_counts=True)
        # single-pixel instances are degenerate by policy: all-zero descriptor
        single = np.isin(inst.ids, ids[(ids > 0) & (counts == 1)])
        on = (inst.ids > 0) & ~single
        if on.any() and float(np.abs(sums[on] - 1.0).max()) > 1e-9:
            return "an instance pixel's bins do not sum to 1"
        if not np.all(sums[~on] == 0.0):
            return "a background or degenerate pixel has nonzero bins"
    return None


def _translation_invariance(rng: np.random.Generator):
    base = compute_map(synth.square_map(6, offset=(2, 3), shape=(30, 30))).data
    for _ in range(3):
        ox = int(rng.integers(0, 20))
        oy = int(rng.integers(0, 20))
        moved = compute_map(synth.square_map(6, offset=(2 + ox, 3 + oy),
                                             shape=(30 + oy, 30 + ox))).data
        back = np.roll(np.roll(moved, -oy, axis=0), -ox, axis=1)[:30, :30]
        if not np.array_equal(base, back[:30, :30]):
            return f"shifted map differs at offset ({ox}, {oy})"
    return None


def _scale_cancellation(rng: np.random.Generator):
    contour = rng.integers(-40, 40, size=(25, 2)).astype(np.float64)
    origin = (3.0, -2.0)
    base = spd.descriptor(origin, contour)
    for k in (0.5, 2.0, 10.0):
        scaled = spd.descriptor((origin[0] * k, origin[1] * k), contour * k)
        if not np.array_equal(base, scaled):
            return f"descriptor changed under coordinate scale k={k}"
    return None


def _zero_init_identity(rng: np.random.Generator):
    params = SafmParams.zeros(num_classes=3, bins=12, embed=4, hidden=6, feat=5)
    for _ in range(4):
        f_prev = rng.normal(size=(2, 5, 6, 7))
        seg = np.zeros((2, 3, 6, 7))
        seg[:, 0] = 1.0
        desc = rng.normal(size=(2, 12, 6, 7))
        out = safm_forward(f_prev, seg, desc, params)
        if not np.array_equal(out, standardize(f_prev)):
            return "zero-parameter output differs from the standardized input"
    return None


def _round_trip(rng: np.random.Generator, tmp_dir: str):
    import os

    path = os.path.join(tmp_dir, "selftest.spd")
    for _ in range(3):
        inst = synth.random_map(rng, 16, 16)
        m = compute_map(inst)
        serialize(m, path)
        again = deserialize(path)
        if not np.array_equal(m.data.astype("<f4"), again.data.astype("<f4")):
            return "serialize/deserialize altered the payload"
    return None


_PROPERTIES = (
    ("bin_index_agreement", _bin_index_agreement),
    ("oracle_equivalence", _oracle_equivalence),
    ("sum_to_one", _sum_to_one),
    ("translation_invariance", _translation_invariance),
    ("scale_cancellation", _scale_cancellation),
    ("zero_init_identity", _zero_init_identity),
)


def run(seed: int = 0, out=print) -> int:
    """Run every property; print one line each; return 0 iff all passed."""
    import tempfile

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        checks = _PROPERTIES + (("serialize_round_trip",
                                 lambda rng: _round_trip(rng, tmp)),)
        for name, fn in checks:
            detail = fn(np.random.default_rng(seed))
            if detail is None:
                out(f"PASS {name}")
            else:
                out(f"FAIL {name}: {detail}")
                failures += 1
        out(f"{len(checks) - failures}/{len(checks)} properties passed")
    return 0 if failures == 0 else 1
