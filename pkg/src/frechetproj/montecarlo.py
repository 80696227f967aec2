"""Monte Carlo harness for distortion under random projection.

For a curve pair the distortion of one direction ``u`` is
``c = dist(P', Q') / dist(P, Q)``, a number in [0, 1]. Directions for pair
``k`` are drawn in fixed-size blocks, block ``b`` from the substream keyed by
``(seed, k, b)``, so results do not depend on how blocks are spread over
worker threads. The prefix and subcurve protocols reuse the pair's
directions; subcurve offsets come from their own substream.
"""

import datetime
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ContractError
from .geom import as_curve, sample_unit_vectors
from .io import fmt
from .metrics import _pair, distance, parse_kind, projected_distances

DEFAULT_GAMMAS = tuple(round(0.1 * k, 1) for k in range(1, 10))
DEFAULT_BUCKETS = (10, 50, 100, 150, 200, 250, 300, 350, 400)
MIN_BASE_DISTANCE = 1e-12
UNDEFINED = "undefined distortion"

# substream tags
_DIRECTIONS, _OFFSETS, _PAIRING = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    samples: int = 1000
    seed: int = 0
    kind: str = "frechet"
    prefix_lengths: tuple = (10,)
    subcurve: bool = True
    gammas: tuple = DEFAULT_GAMMAS
    buckets: tuple = DEFAULT_BUCKETS
    block_size: int = 250
    workers: int = 1
    dimension: int = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if any(not 0.0 < g < 1.0 for g in self.gammas):
            raise ValueError("gamma thresholds must lie in (0, 1)")
        if any(int(x) < 1 for x in self.prefix_lengths):
            raise ValueError("prefix lengths must be positive")
        parse_kind(self.kind)

    def to_dict(self):
        d = asdict(self)
        d["prefix_lengths"] = list(self.prefix_lengths)
        d["gammas"] = list(self.gammas)
        d["buckets"] = list(self.buckets)
        return d


class DistortionSample(NamedTuple):
    direction: np.ndarray
    ratio: float


@dataclass
class PairResult:
    pair_id: int
    protocol: str
    complexity: int
    base: float
    ratios: np.ndarray
    directions: np.ndarray
    status: str = "ok"
    offsets: tuple = None

    @property
    def ok(self):
        return self.status == "ok"

    def samples(self):
        return [DistortionSample(u, float(c)) for u, c in zip(self.directions, self.ratios)]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    pairing: list = field(default_factory=list)
    excluded: dict = field(default_factory=dict)


def substream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _blocks(r, size):
    return [(b, b * size, min(r, (b + 1) * size)) for b in range(math.ceil(r / size))]


def pair_directions(seed, pair_id, r, d, block_size=250):
    """The ``r`` directions used for pair ``pair_id``; independent of worker count."""
    parts = [
        sample_unit_vectors(d, hi - lo, substream(seed, _DIRECTIONS, pair_id, b))
        for b, lo, hi in _blocks(r, block_size)
    ]
    return np.concatenate(parts)


def _projected(P, Q, U, kind, workers, block_size):
    if workers == 1:
        return projected_distances(P, Q, U, kind)
    blocks = _blocks(U.shape[0], block_size)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda blk: projected_distances(P, Q, U[blk[1]:blk[2]], kind), blocks))
    return np.concatenate(parts)


def _evaluate(P, Q, U, config, pair_id, protocol, complexity, offsets=None):
    kind = parse_kind(config.kind)
    base = distance(P, Q, kind)
    if base < MIN_BASE_DISTANCE:
        return PairResult(pair_id, protocol, complexity, base, np.empty(0), np.empty((0, U.shape[1])), UNDEFINED, offsets)
    proj = _projected(P, Q, U, kind, config.workers, config.block_size)
    return PairResult(pair_id, protocol, complexity, base, proj / base, U, "ok", offsets)


def _directions_for(P, config, pair_id):
    d = config.dimension or P.shape[1]
    if d != P.shape[1]:
        raise ContractError(f"config dimension {d} does not match curve dimension {P.shape[1]}")
    return pair_directions(config.seed, pair_id, config.samples, d, config.block_size)


def run_pair(P, Q, config, pair_id=0):
    """Distortion of the whole pair under ``config.samples`` random directions."""
    P, Q = _pair(P, Q)
    U = _directions_for(P, config, pair_id)
    return _evaluate(P, Q, U, config, pair_id, "full", max(P.shape[0], Q.shape[0]))


def run_prefix_protocol(P, Q, config, pair_id=0):
    """One result per prefix length ``l``: the first ``l`` vertices of each curve."""
    P, Q = _pair(P, Q)
    if not config.prefix_lengths:
        raise ValueError("no prefix lengths configured")
    U = _directions_for(P, config, pair_id)
    rows = []
    for ell in config.prefix_lengths:
        ell = int(ell)
        if ell > min(P.shape[0], Q.shape[0]):
            raise ContractError(f"prefix length {ell} exceeds the shorter curve ({min(P.shape[0], Q.shape[0])})")
        rows.append(_evaluate(P[:ell], Q[:ell], U, config, pair_id, "prefix", ell, (0, 0)))
    return rows


def subcurve_offsets(P, Q, config, pair_id, rng=None):
    """Start offsets of the random subcurves, drawn before any direction."""
    gen = rng if rng is not None else substream(config.seed, _OFFSETS, pair_id)
    out = []
    for ell in config.prefix_lengths:
        ell = int(ell)
        if ell > min(P.shape[0], Q.shape[0]):
            raise ContractError(f"subcurve length {ell} exceeds the shorter curve ({min(P.shape[0], Q.shape[0])})")
        out.append((ell, int(gen.integers(0, P.shape[0] - ell + 1)), int(gen.integers(0, Q.shape[0] - ell + 1))))
    return out


def run_subcurve_protocol(P, Q, config, pair_id=0, rng=None):
    """One result per length ``l``: ``l`` consecutive vertices at random offsets."""
    P, Q = _pair(P, Q)
    if not config.prefix_lengths:
        raise ValueError("no subcurve lengths configured")
    offsets = subcurve_offsets(P, Q, config, pair_id, rng)
    U = _directions_for(P, config, pair_id)
    return [
        _evaluate(P[a:a + ell], Q[b:b + ell], U, config, pair_id, "subcurve", ell, (a, b))
        for ell, a, b in offsets
    ]


def ecdf(samples, gammas):
    """Empirical ``Pr[c <= gamma]`` at each gamma."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("ecdf of an empty sample")
    counts = np.searchsorted(x, np.asarray(gammas, dtype=np.float64), side="right")
    return [(float(g), float(c) / x.size) for g, c in zip(gammas, counts)]


def bucket_of(complexity, boundaries):
    """Largest boundary not above ``complexity``, or None."""
    below = [b for b in sorted(boundaries) if b <= complexity]
    return below[-1] if below else None


def bucket_stats(rows, boundaries=DEFAULT_BUCKETS, gammas=DEFAULT_GAMMAS):
    """Mean, population std, min and max of ``Pr[c <= gamma]`` per complexity bucket."""
    groups = {}
    for row in rows:
        if not row.ok or row.ratios.size == 0:
            continue
        key = bucket_of(row.complexity, boundaries)
        if key is None:
            continue
        groups.setdefault(key, []).append([p for _, p in ecdf(row.ratios, gammas)])
    table = []
    for key in sorted(groups):
        probs = np.array(groups[key])
        for k, g in enumerate(gammas):
            col = probs[:, k]
            table.append({
                "bucket": key,
                "gamma": float(g),
                "n": int(col.size),
                "mean": float(col.mean()),
                "std": float(col.std()),
                "min": float(col.min()),
                "max": float(col.max()),
            })
    return table


def sample_pairs(n_curves, n_pairs, seed):
    """Pairs of distinct curve indices, drawn uniformly with replacement."""
    if n_curves < 2:
        raise ValueError("need at least two curves to form pairs")
    gen = substream(seed, _PAIRING)
    out = []
    for _ in range(n_pairs):
        a = int(gen.integers(0, n_curves))
        b = int(gen.integers(0, n_curves - 1))
        out.append((a, b + (b >= a)))
    return out


def run_corpus(curves, pairs, config):
    """Run the full, prefix and subcurve protocols on every pair."""
    rows, excluded = [], {}

    def skip(reason):
        excluded[reason] = excluded.get(reason, 0) + 1

    for pid, (a, b) in enumerate(pairs):
        P, Q = as_curve(curves[a]), as_curve(curves[b])
        full = run_pair(P, Q, config, pid)
        rows.append(full)
        if not full.ok:
            skip(full.status)
        shorter = min(P.shape[0], Q.shape[0])
        fitting = tuple(ell for ell in config.prefix_lengths if ell <= shorter)
        for _ in range(len(config.prefix_lengths) - len(fitting)):
            skip("length exceeds curve")
        if not fitting:
            continue
        cfg = _with_lengths(config, fitting)
        batches = [run_prefix_protocol(P, Q, cfg, pid)]
        if config.subcurve:
            batches.append(run_subcurve_protocol(P, Q, cfg, pid))
        for batch in batches:
            for row in batch:
                rows.append(row)
                if not row.ok:
                    skip(row.status)
    return ExperimentReport(config, rows, list(pairs), excluded)


def _with_lengths(config, lengths):
    d = config.to_dict()
    d.update(prefix_lengths=tuple(lengths), gammas=tuple(config.gammas), buckets=tuple(config.buckets))
    return ExperimentConfig(**d)


# ------------------------------------------------------------------ output


def raw_lines(report):
    out = ["pair_id,protocol,complexity,sample_idx,ratio"]
    for row in report.rows:
        for k, c in enumerate(row.ratios):
            out.append(f"{row.pair_id},{row.protocol},{row.complexity},{k},{fmt(c)}")
    return out


def ecdf_lines(report):
    out = ["pair_id,protocol,complexity,gamma,prob"]
    for row in report.rows:
        if not row.ok:
            continue
        for g, p in ecdf(row.ratios, report.config.gammas):
            out.append(f"{row.pair_id},{row.protocol},{row.complexity},{fmt(g)},{fmt(p)}")
    return out


def bucket_lines(report, protocol=None):
    rows = [r for r in report.rows if protocol is None or r.protocol == protocol]
    table = bucket_stats(rows, report.config.buckets, report.config.gammas)
    out = ["bucket,gamma,n,mean,std,min,max"]
    for e in table:
        out.append(",".join([str(e["bucket"]), fmt(e["gamma"]), str(e["n"])] + [fmt(e[k]) for k in ("mean", "std", "min", "max")]))
    return out


def _write(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(report, outdir, stem="mc"):
    """Write raw, ECDF, bucket and summary files; returns their paths."""
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "raw": outdir / f"{stem}_raw.csv",
        "ecdf": outdir / f"{stem}_ecdf.csv",
        "buckets": outdir / f"{stem}_buckets.csv",
        "summary": outdir / f"{stem}_summary.json",
    }
    _write(paths["raw"], raw_lines(report))
    _write(paths["ecdf"], ecdf_lines(report))
    _write(paths["buckets"], bucket_lines(report))
    summary = {
        "config": report.config.to_dict(),
        "seed": report.config.seed,
        "pairs": [list(p) for p in report.pairing],
        "rows": len(report.rows),
        "samples": int(sum(r.ratios.size for r in report.rows)),
        "excluded": report.excluded,
        "offsets": [
            {"pair_id": r.pair_id, "complexity": r.complexity, "offsets": list(r.offsets)}
            for r in report.rows if r.protocol == "subcurve"
        ],
        "backend": kernels.BACKEND,
        "metadata": {"created": datetime.datetime.now(datetime.timezone.utc).isoformat()},
    }
    with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


# ------------------------------------------------------- projection laws


def reduction_frequencies(d, n, phis, seed):
    """Empirical ``Pr[|<q - p, u>| / |q - p| < phi]`` over ``n`` random pairs and directions."""
    gen = substream(seed, 3, d)
    p = gen.standard_normal((n, d))
    q = gen.standard_normal((n, d))
    u = sample_unit_vectors(d, n, gen)
    v = q - p
    ratio = np.abs((v * u).sum(axis=1)) / np.linalg.norm(v, axis=1)
    ratio.sort()
    return np.searchsorted(ratio, np.asarray(phis, dtype=np.float64), side="left") / n
