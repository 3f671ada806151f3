"""Dataset ingestion (LIBSVM text format) and synthetic data generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "LibsvmParseError",
    "parse_libsvm",
    "serialize_libsvm",
    "gen_spca_data",
    "gen_classifier_data",
]


@dataclass
class Dataset:
    """Dense features plus optional +-1 labels and provenance metadata."""

    features: np.ndarray
    labels: np.ndarray | None
    source: dict

    def __post_init__(self):
        if not np.isfinite(self.features).all():
            raise ValueError("features contain NaN or Inf")
        if self.labels is not None and not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; message carries the 1-based line number."""


def parse_libsvm(source, n_features: int | None = None) -> Dataset:
    """Parse LIBSVM text: ``label idx:val idx:val ...`` per line.

    Indices are 1-based and must be strictly increasing within a line; absent
    entries are zero. Labels 0 and -1 map to -1, labels 1 and +1 map to +1.
    The feature dimension is the largest index seen unless ``n_features``
    overrides it. Empty lines are skipped.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    rows: list[tuple[float, list[tuple[int, float]]]] = []
    max_idx = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"line {lineno}: bad label {tokens[0]!r}") from None
        if raw_label in (0.0, -1.0):
            label = -1.0
        elif raw_label == 1.0:
            label = 1.0
        else:
            raise LibsvmParseError(f"line {lineno}: label {tokens[0]!r} not in {{0, -1, +1}}")
        prev = 0
        pairs: list[tuple[int, float]] = []
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(f"line {lineno}: malformed pair {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(f"line {lineno}: malformed pair {tok!r}") from None
            if idx < 1:
                raise LibsvmParseError(f"line {lineno}: feature indices are 1-based")
            if idx <= prev:
                raise LibsvmParseError(f"line {lineno}: indices must be strictly increasing")
            if not math.isfinite(val):
                raise LibsvmParseError(f"line {lineno}: non-finite value {val_s!r}")
            pairs.append((idx, val))
            prev = idx
        max_idx = max(max_idx, prev)
        rows.append((label, pairs))

    dim = max_idx if n_features is None else int(n_features)
    if max_idx > dim:
        raise LibsvmParseError(f"feature index {max_idx} exceeds n_features={dim}")
    features = np.zeros((len(rows), dim))
    labels = np.empty(len(rows))
    for i, (label, pairs) in enumerate(rows):
        labels[i] = label
        for idx, val in pairs:
            features[i, idx - 1] = val
    return Dataset(features=features, labels=labels, source={"kind": "libsvm"})


def serialize_libsvm(dataset: Dataset) -> str:
    """Inverse of parse_libsvm for labeled datasets; zeros are omitted."""
    if dataset.labels is None:
        raise ValueError("serialization needs labels")
    lines = []
    for row, label in zip(dataset.features, dataset.labels):
        parts = ["+1" if label > 0 else "-1"]
        nz = np.nonzero(row)[0]
        parts.extend(f"{j + 1}:{format(row[j], '.17g')}" for j in nz)
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def gen_spca_data(n: int, m: int, seed) -> Dataset:
    """n x m standard Gaussian matrix; columns mean-centered then unit l2 norm.

    Columns are the samples. ``seed`` is anything numpy's default_rng accepts.
    """
    if m < 2:
        raise ValueError("need at least 2 columns")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, m))
    z -= z.mean(axis=0)
    norms = np.linalg.norm(z, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("degenerate column after centering")
    z /= norms
    return Dataset(
        features=z,
        labels=None,
        source={"kind": "synthetic-spca", "n": n, "m": m, "seed": str(seed)},
    )


def gen_classifier_data(m: int, n_samples: int, noise_var: float, seed) -> Dataset:
    """Labeled sphere-classification data.

    A unit-norm ground truth is drawn from a standard Gaussian; features are
    uniform on [-1, 1]; labels are the sign of the noisy margin, with the
    measure-zero tie at exactly zero sent to +1.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if noise_var < 0:
        raise ValueError("noise variance must be nonnegative")
    rng = np.random.default_rng(seed)
    truth = rng.standard_normal(m)
    truth /= np.linalg.norm(truth)
    features = rng.uniform(-1.0, 1.0, size=(n_samples, m))
    noise = rng.normal(0.0, math.sqrt(noise_var), size=n_samples)
    labels = np.where(features @ truth + noise >= 0.0, 1.0, -1.0)
    return Dataset(
        features=features,
        labels=labels,
        source={
            "kind": "synthetic-classify",
            "m": m,
            "n_samples": n_samples,
            "noise_var": noise_var,
            "seed": str(seed),
            "ground_truth": truth,
        },
    )
