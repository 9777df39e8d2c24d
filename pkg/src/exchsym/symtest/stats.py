"""Chi-square tests of distributional symmetry claims on discrete outcomes."""

import math
from collections import Counter
from typing import Callable, Optional, Sequence

import numpy as np

from ..groups import GroupSpec, act_batch, sample_haar_batch
from ..numkit import NoiseSource
from .exhaustive import _hashable
from .report import TestReport

MIN_EXPECTED = 5.0
N_BINS = 8


class InsufficientSamplesError(ValueError):
    """Not enough observations to form cells with the required expected count."""


def chi2_sf(stat: float, df: int) -> float:
    """Upper tail of the chi-square law, Wilson-Hilferty cube-root approximation."""
    if df <= 0:
        return 1.0
    if stat <= 0:
        return 1.0
    k = float(df)
    z = ((stat / k) ** (1.0 / 3.0) - (1.0 - 2.0 / (9.0 * k))) / math.sqrt(2.0 / (9.0 * k))
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _rows_key(samples) -> list:
    if isinstance(samples, np.ndarray):
        if samples.ndim == 1:
            return samples.tolist()
        return [tuple(r) for r in samples.reshape(samples.shape[0], -1).tolist()]
    return [_hashable(s) for s in samples]


def merge_cells(table: np.ndarray, min_expected: float = MIN_EXPECTED) -> np.ndarray:
    """Merge columns (smallest pooled count first) until every expected count
    under homogeneity is at least ``min_expected``."""
    table = np.asarray(table, dtype=np.float64)
    rows = table.sum(axis=1)
    grand = rows.sum()
    if grand == 0:
        return table[:, :0]
    order = np.argsort(table.sum(axis=0), kind="stable")
    need = min_expected * grand / rows.min()   # pooled count that makes the smallest row reach min_expected
    merged, current = [], np.zeros(table.shape[0])
    for c in order:
        current = current + table[:, c]
        if current.sum() >= need:
            merged.append(current)
            current = np.zeros(table.shape[0])
    if current.sum() > 0:
        if merged:
            merged[-1] = merged[-1] + current
        else:
            merged.append(current)
    return np.stack(merged, axis=1)


def chi2_table(table: np.ndarray):
    """Pearson statistic and degrees of freedom of a contingency table."""
    table = np.asarray(table, dtype=np.float64)
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    expected = rows * cols / table.sum()
    stat = float(np.sum((table - expected) ** 2 / expected))
    return stat, (table.shape[0] - 1) * (table.shape[1] - 1), float(expected.min())


def _contingency(groups: Sequence[list]):
    support = sorted({k for g in groups for k in g}, key=repr)
    index = {k: i for i, k in enumerate(support)}
    table = np.zeros((len(groups), len(support)))
    for r, g in enumerate(groups):
        for k, c in Counter(g).items():
            table[r, index[k]] = c
    return table


def chi2_two_sample(a, b, alpha: float = 0.001, name: str = "chi2_two_sample") -> TestReport:
    """Pearson two-sample homogeneity test on the pooled discrete support.

    Low-count cells are merged until expected counts reach 5.  Raises
    :class:`InsufficientSamplesError` when even a single merged cell cannot
    reach that.
    """
    ka, kb = _rows_key(a), _rows_key(b)
    if min(len(ka), len(kb)) < MIN_EXPECTED:
        raise InsufficientSamplesError(f"samples of size {len(ka)} and {len(kb)} are too small")
    raw = _contingency([ka, kb])
    table = merge_cells(raw)
    warnings = []
    if table.shape[1] < 2:
        warnings.append("all outcomes fell into one merged cell; test is vacuous")
        return TestReport(name, True, 0.0, 1.0, 0.0, len(ka) + len(kb), warnings,
                          {"cells": int(raw.shape[1]), "merged_cells": int(table.shape[1]), "df": 0,
                           "alpha": alpha})
    stat, df, emin = chi2_table(table)
    p = chi2_sf(stat, df)
    freq = raw / raw.sum(axis=1, keepdims=True)
    dev = float(np.max(np.abs(freq[0] - freq[1])))
    return TestReport(name, bool(p >= alpha), stat, p, dev, len(ka) + len(kb), warnings,
                      {"cells": int(raw.shape[1]), "merged_cells": int(table.shape[1]), "df": df,
                       "min_expected": emin, "alpha": alpha})


def discretize(a: np.ndarray, b: Optional[np.ndarray] = None, bins: int = N_BINS, max_levels: int = 16):
    """Map continuous samples to bin labels per coordinate.

    Coordinates with at most ``max_levels`` distinct pooled values are kept
    as is; others are cut into ``bins`` equal-probability bins estimated from
    the pooled samples.  Returns integer-coded arrays shaped like the inputs
    (flattened per sample).
    """
    a = np.asarray(a, dtype=np.float64)
    fa = a.reshape(a.shape[0], -1)
    fb = None if b is None else np.asarray(b, dtype=np.float64).reshape(np.shape(b)[0], -1)
    pooled = fa if fb is None else np.concatenate([fa, fb])
    out_a = np.empty(fa.shape, dtype=np.int64)
    out_b = None if fb is None else np.empty(fb.shape, dtype=np.int64)
    for c in range(fa.shape[1]):
        levels = np.unique(pooled[:, c])
        if levels.size <= max_levels:
            edges = (levels[1:] + levels[:-1]) / 2
        else:
            edges = np.unique(np.quantile(pooled[:, c], np.arange(1, bins) / bins))
        out_a[:, c] = np.searchsorted(edges, fa[:, c], side="right")
        if fb is not None:
            out_b[:, c] = np.searchsorted(edges, fb[:, c], side="right")
    return out_a if fb is None else (out_a, out_b)


def joint_invariance_test(sampler: Callable, spec: GroupSpec, N: int, alpha: float = 0.001,
                          src: Optional[NoiseSource] = None, y_mode: str = "invariant",
                          name: str = "joint_invariance") -> TestReport:
    """Compare the law of ``(X, Y)`` with that of ``(g.X, g.Y)``, ``g`` Haar.

    ``sampler(src, N)`` returns ``N`` draws ``(X, Y)`` stacked on axis 0.
    ``y_mode`` is ``invariant`` (``g.Y = Y``) or ``equivariant`` (``Y`` is
    acted on like ``X``).  The first sample uses ``src.fork(0)``, the second
    ``src.fork(1)`` and the group elements ``src.fork(2)``.
    """
    if y_mode not in ("invariant", "equivariant"):
        raise ValueError(f"unknown y_mode {y_mode!r}")
    src = src if src is not None else NoiseSource(0)
    x1, y1 = sampler(src.fork(0), N)
    x2, y2 = sampler(src.fork(1), N)
    images = sample_haar_batch(spec, src.fork(2), N)
    x2 = act_batch(images, np.asarray(x2), spec)
    y2 = np.asarray(y2)
    if y_mode == "equivariant":
        y2 = act_batch(images, y2, spec)
    x1f = np.asarray(x1, dtype=np.float64).reshape(N, -1)
    x2f = np.asarray(x2, dtype=np.float64).reshape(N, -1)
    d1, d2 = discretize(np.asarray(y1).reshape(N, -1), y2.reshape(N, -1))
    r = chi2_two_sample(np.concatenate([x1f, d1], axis=1), np.concatenate([x2f, d2], axis=1), alpha, name)
    r.details["group"] = spec.to_dict()
    r.details["y_mode"] = y_mode
    return r


def cond_indep_test(x, y, M: Callable, alpha: float = 0.001, name: str = "cond_indep") -> TestReport:
    """Test ``Y`` independent of ``X`` given ``M(X)`` on discrete samples.

    Within each fibre ``{x : M(x) = m}`` the conditional laws of ``Y`` given
    the individual ``x`` are compared by a chi-square homogeneity test, with
    a Bonferroni correction over the tested fibres.  Fibres where merging
    leaves fewer than two cells are reported as undersampled.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    xs = _rows_key(x)
    ys = _rows_key(y)
    fibres, memo = {}, {}
    for xi, yi, raw in zip(xs, ys, x):
        if xi not in memo:
            memo[xi] = _hashable(M(raw))
        fibres.setdefault(memo[xi], {}).setdefault(xi, []).append(yi)
    tested, undersampled, singletons = [], [], 0
    for m, groups in fibres.items():
        if len(groups) < 2:
            singletons += 1
            continue
        lists = [groups[k] for k in sorted(groups, key=repr)]
        raw = _contingency(lists)
        if raw.shape[1] < 2:
            # Y constant on the fibre, nothing to compare
            tested.append((m, 0.0, 0, 1.0))
            continue
        table = merge_cells(raw)
        if table.shape[1] < 2 or min(len(g) for g in lists) < MIN_EXPECTED:
            undersampled.append(repr(m))
            continue
        stat, df, _ = chi2_table(table)
        tested.append((m, stat, df, chi2_sf(stat, df)))
    warnings = []
    if undersampled:
        warnings.append(f"{len(undersampled)} undersampled fibre(s) not tested")
    if not tested and not undersampled:
        warnings.append("every fibre holds a single x value; test is vacuous")
    k = max(1, len(tested))
    p_min = min((t[3] for t in tested), default=1.0)
    p_adj = min(1.0, p_min * k)
    passed = p_adj >= alpha and not (undersampled and not tested)
    worst = max(tested, key=lambda t: t[1], default=(None, 0.0, 0, 1.0))
    details = {"fibres": len(fibres), "tested": len(tested), "single_value_fibres": singletons,
               "undersampled": undersampled, "alpha": alpha, "bonferroni_k": k,
               "worst_df": worst[2]}
    return TestReport(name, bool(passed), worst[1], p_adj, worst[1], len(xs), warnings, details)


def chi2_goodness_of_fit(samples, pmf: dict, alpha: float = 0.001,
                         name: str = "chi2_goodness_of_fit") -> TestReport:
    """Pearson test of observed outcome counts against an exact ``pmf``
    (outcome key -> probability), merging cells to expected counts >= 5."""
    keys = _rows_key(samples)
    n = len(keys)
    counts = Counter(keys)
    outside = sum(c for k, c in counts.items() if k not in pmf)
    if outside:
        return TestReport(name, False, float("inf"), 0.0, 1.0, n,
                          [f"{outside} samples outside the support"], {"alpha": alpha})
    cells = sorted(pmf, key=lambda k: pmf[k])
    obs, exp, cur_o, cur_e = [], [], 0.0, 0.0
    for k in cells:
        cur_o += counts.get(k, 0)
        cur_e += n * pmf[k]
        if cur_e >= MIN_EXPECTED:
            obs.append(cur_o)
            exp.append(cur_e)
            cur_o = cur_e = 0.0
    if cur_e > 0:
        if not exp:
            raise InsufficientSamplesError(f"{n} samples cannot give expected counts of {MIN_EXPECTED}")
        obs[-1] += cur_o
        exp[-1] += cur_e
    obs, exp = np.array(obs), np.array(exp)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    df = len(obs) - 1
    p = chi2_sf(stat, df)
    dev = float(np.max(np.abs(obs - exp)) / n)
    return TestReport(name, bool(p >= alpha), stat, p, dev, n, [],
                      {"cells": len(pmf), "merged_cells": len(obs), "df": df, "alpha": alpha})
