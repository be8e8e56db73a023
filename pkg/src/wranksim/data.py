"""Synthetic ordinal datasets, CSV ingestion, and stratified splitting.

Synthetic data places one mean vector per class along an ordinal manifold
(adjacent means unit distance apart) and adds isotropic Gaussian noise;
labels are drawn from a configurable class prior whose default mimics a
bell-shaped score distribution with scarce extreme classes. Real feature
vectors can be ingested from CSV, optionally with dot-prefixed column
groups.
"""

import csv
import hashlib
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import DomainError, ParseError, ValidationError
from .model import FeatureGroupSet
from .regularizer import OrdinalClassSet

logger = logging.getLogger(__name__)

PRIOR_BELL = "binomial-bell"
PRIOR_UNIFORM = "uniform"
MANIFOLD_CHAIN = "linear-chain"
MANIFOLD_ARC = "arc"

LABEL_COLUMN = "label"

# distance between adjacent class means; noise_sigma is relative to this
CLASS_SPACING = 1.0


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters for a synthetic ordinal dataset."""

    n_samples: int
    n_classes: int = 5
    feature_dim: int = 8
    noise_sigma: float = 0.6
    class_prior: object = PRIOR_BELL
    manifold: str = MANIFOLD_CHAIN

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValidationError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.n_classes < 2:
            raise ValidationError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.feature_dim < 1:
            raise ValidationError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0.0:
            raise ValidationError(
                f"noise_sigma must be a non-negative finite real, got {self.noise_sigma}"
            )
        if self.manifold not in (MANIFOLD_CHAIN, MANIFOLD_ARC):
            raise ValidationError(
                f"unknown manifold {self.manifold!r}; allowed: "
                f"{MANIFOLD_CHAIN}, {MANIFOLD_ARC}"
            )
        if self.manifold == MANIFOLD_ARC and self.feature_dim < 2:
            raise DomainError("arc manifold requires feature_dim >= 2")
        self.prior_weights()  # validate eagerly

    def prior_weights(self) -> np.ndarray:
        """Resolve the class prior to a probability vector."""
        p = self.class_prior
        if isinstance(p, str):
            if p == PRIOR_BELL:
                return binomial_bell_prior(self.n_classes)
            if p == PRIOR_UNIFORM:
                return np.full(self.n_classes, 1.0 / self.n_classes)
            raise ValidationError(
                f"unknown class_prior {p!r}; allowed: {PRIOR_BELL}, "
                f"{PRIOR_UNIFORM}, or {self.n_classes} custom weights"
            )
        w = np.asarray(p, dtype=np.float64)
        if w.shape != (self.n_classes,):
            raise ValidationError(
                f"class_prior needs {self.n_classes} weights, got shape {w.shape}"
            )
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValidationError("class_prior weights must be non-negative finite reals")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"class_prior must sum to 1, got {float(w.sum())}")
        return w

    def to_dict(self) -> dict:
        prior = self.class_prior
        if not isinstance(prior, str):
            prior = [float(x) for x in np.asarray(prior, dtype=np.float64)]
        return {
            "n_samples": self.n_samples,
            "n_classes": self.n_classes,
            "feature_dim": self.feature_dim,
            "noise_sigma": self.noise_sigma,
            "class_prior": prior,
            "manifold": self.manifold,
        }


def binomial_bell_prior(n_classes: int) -> np.ndarray:
    """Symmetric bell prior: Binomial(n_classes - 1, 1/2) probabilities.

    Five classes give [1, 4, 6, 4, 1] / 16, concentrating mass in the
    middle and starving the extremes.
    """
    if n_classes < 2:
        raise DomainError(f"n_classes must be >= 2, got {n_classes}")
    n = n_classes - 1
    weights = np.array([math.comb(n, k) for k in range(n_classes)], dtype=np.float64)
    return weights / weights.sum()


@dataclass(frozen=True)
class Dataset:
    """Feature matrix + integer class codes + class set + provenance."""

    features: np.ndarray
    labels: np.ndarray
    classes: OrdinalClassSet
    provenance: dict
    group_schema: tuple[tuple[str, int], ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DomainError(f"features must be a non-empty 2-D matrix, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise DomainError(
                f"labels shape {y.shape} does not match {X.shape[0]} samples"
            )
        allowed = set(self.classes.labels)
        bad = [int(v) for v in np.unique(y) if int(v) not in allowed]
        if bad:
            raise DomainError(f"labels {bad} not in class set {self.classes.labels}")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(np.int64))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def label_indices(self) -> np.ndarray:
        """0-based class positions for each sample."""
        lookup = {c: i for i, c in enumerate(self.classes.labels)}
        return np.array([lookup[int(v)] for v in self.labels], dtype=np.int64)

    def sample(self, i: int) -> Sample:
        return Sample(features=self.features[i].copy(), label=int(self.labels[i]))

    def feature_groups(self, i: int) -> FeatureGroupSet:
        """The i-th sample's features sliced per the group schema."""
        if self.group_schema is None:
            raise DomainError("dataset has no feature-group schema")
        row = self.features[i]
        parts = []
        offset = 0
        for name, dim in self.group_schema:
            parts.append((name, row[offset:offset + dim].copy()))
            offset += dim
        return FeatureGroupSet(groups=tuple(parts))

    def subset(self, indices, provenance_note: str) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        prov = dict(self.provenance)
        prov["subset"] = provenance_note
        return replace(
            self,
            features=self.features[idx].copy(),
            labels=self.labels[idx].copy(),
            provenance=prov,
        )

    def class_counts(self) -> np.ndarray:
        counts = np.zeros(len(self.classes), dtype=np.int64)
        for i, c in enumerate(self.classes.labels):
            counts[i] = int(np.sum(self.labels == c))
        return counts


def _unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        v = rng.normal(size=dim)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def _class_means(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    n, d = cfg.n_classes, cfg.feature_dim
    if cfg.manifold == MANIFOLD_CHAIN:
        direction = _unit_vector(rng, d)
        offsets = (np.arange(n) - (n - 1) / 2.0) * CLASS_SPACING
        return offsets[:, None] * direction[None, :]
    # arc: equally spaced angles on a quarter circle in a random 2-plane,
    # radius chosen so adjacent means are CLASS_SPACING apart
    e1 = _unit_vector(rng, d)
    while True:
        raw = rng.normal(size=d)
        raw -= (raw @ e1) * e1
        norm = np.linalg.norm(raw)
        if norm > 1e-12:
            e2 = raw / norm
            break
    step = (np.pi / 2.0) / (n - 1)
    radius = CLASS_SPACING / (2.0 * np.sin(step / 2.0))
    angles = np.arange(n) * step
    means = radius * (np.cos(angles)[:, None] * e1[None, :]
                      + np.sin(angles)[:, None] * e2[None, :])
    return means - means.mean(axis=0)


def generate(cfg: SynthConfig, rng: np.random.Generator,
             seed: int | None = None) -> Dataset:
    """Draw a synthetic dataset: manifold means, then labels, then noise."""
    means = _class_means(cfg, rng)
    weights = cfg.prior_weights()
    label_idx = rng.choice(cfg.n_classes, size=cfg.n_samples, p=weights)
    noise = rng.normal(size=(cfg.n_samples, cfg.feature_dim))
    X = means[label_idx] + cfg.noise_sigma * noise
    classes = OrdinalClassSet.contiguous(cfg.n_classes, start=1)
    labels = np.asarray(classes.labels, dtype=np.int64)[label_idx]
    provenance = {"kind": "synthetic", "params": cfg.to_dict()}
    if seed is not None:
        provenance["seed"] = int(seed)
    return Dataset(features=X, labels=labels, classes=classes,
                   provenance=provenance)


def _allocate(count: int, ratios: np.ndarray) -> np.ndarray:
    """Largest-remainder apportionment of ``count`` into len(ratios) parts.

    Remainder ties resolve toward earlier parts (train, then dev, then
    test), so per part |achieved - expected| <= 1.
    """
    expected = count * ratios
    base = np.floor(expected).astype(np.int64)
    leftover = count - int(base.sum())
    fractional = expected - base
    order = sorted(range(len(ratios)), key=lambda i: (-fractional[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def split(data: Dataset, ratios, rng: np.random.Generator
          ) -> tuple[Dataset, Dataset, Dataset]:
    """Stratified (train, dev, test) split.

    Each class's indices are shuffled and apportioned by the ratios with
    largest-remainder rounding. A class with fewer samples than the number
    of nonzero parts cannot be stratified and goes entirely to train, with
    a warning. Parts that receive no samples come back as None.
    """
    r = np.asarray(ratios, dtype=np.float64)
    if r.shape != (3,):
        raise ValidationError(f"ratios must be (train, dev, test), got {ratios!r}")
    if np.any(r < 0.0) or not np.all(np.isfinite(r)):
        raise ValidationError(f"ratios must be non-negative finite reals, got {ratios!r}")
    if abs(float(r.sum()) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1, got {float(r.sum())}")

    n_parts = int(np.count_nonzero(r))
    parts: list[list[int]] = [[], [], []]
    for c in data.classes.labels:
        idx = np.flatnonzero(data.labels == c)
        if idx.size == 0:
            continue
        idx = idx[rng.permutation(idx.size)]
        if idx.size < n_parts:
            logger.warning(
                "class %d has %d sample(s), fewer than %d split parts; "
                "assigning all to train", c, idx.size, n_parts,
            )
            parts[0].extend(int(i) for i in idx)
            continue
        counts = _allocate(idx.size, r)
        offset = 0
        for p in range(3):
            parts[p].extend(int(i) for i in idx[offset:offset + counts[p]])
            offset += counts[p]
    names = ("train", "dev", "test")
    out = []
    for p, name in enumerate(names):
        if parts[p]:
            out.append(data.subset(sorted(parts[p]), name))
        else:
            out.append(None)
    if out[0] is None:
        raise DomainError("split produced an empty train set")
    return tuple(out)


def _float_token(x: float) -> str:
    """Shortest decimal literal that round-trips the float64 exactly."""
    return repr(float(x))


def save_csv(data: Dataset, path) -> None:
    """Write features + label column; grouped schemas keep their prefixes."""
    path = Path(path)
    if data.group_schema is not None:
        columns = []
        for name, dim in data.group_schema:
            columns.extend(f"{name}.f{k}" for k in range(dim))
    else:
        columns = [f"f{k}" for k in range(data.feature_dim)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns + [LABEL_COLUMN])
        for i in range(len(data)):
            row = [_float_token(v) for v in data.features[i]]
            writer.writerow(row + [str(int(data.labels[i]))])


def _parse_header(header: list[str]) -> tuple[list[int], tuple[tuple[str, int], ...] | None]:
    """Feature column positions plus an optional dot-prefix group schema."""
    feature_cols = [i for i, name in enumerate(header) if name != LABEL_COLUMN]
    if len(feature_cols) == len(header):
        raise ParseError(f"header has no {LABEL_COLUMN!r} column: {header}")
    if len(feature_cols) == 0:
        raise ParseError("header has no feature columns")
    names = [header[i] for i in feature_cols]
    if not all("." in n for n in names):
        return feature_cols, None
    schema: list[tuple[str, int]] = []
    for n in names:
        group = n.split(".", 1)[0]
        if schema and schema[-1][0] == group:
            schema[-1] = (group, schema[-1][1] + 1)
        elif any(g == group for g, _ in schema):
            raise ParseError(f"group {group!r} columns are not contiguous")
        else:
            schema.append((group, 1))
    return feature_cols, tuple(schema)


def load_csv(path, classes: OrdinalClassSet) -> Dataset:
    """Parse a feature CSV, validating labels against the class set.

    The file's content hash is recorded in provenance so downstream
    manifests can detect dataset drift.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    raw = path.read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    rows = list(csv.reader(raw.decode("utf-8").splitlines()))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = rows[0]
    feature_cols, schema = _parse_header(header)
    label_col = header.index(LABEL_COLUMN)
    allowed = set(classes.labels)
    features = []
    labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            vec = np.array([float(row[i]) for i in feature_cols], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
        if not np.all(np.isfinite(vec)):
            raise ParseError(f"{path}: line {lineno}: non-finite feature value")
        try:
            label = int(row[label_col])
        except ValueError:
            raise ParseError(
                f"{path}: line {lineno}: label {row[label_col]!r} is not an integer"
            ) from None
        if label not in allowed:
            raise DomainError(
                f"{path}: line {lineno}: label {label} not in class set "
                f"{classes.labels}"
            )
        features.append(vec)
        labels.append(label)
    if not features:
        raise ParseError(f"{path}: no data rows")
    return Dataset(
        features=np.vstack(features),
        labels=np.array(labels, dtype=np.int64),
        classes=classes,
        provenance={"kind": "file", "path": str(path), "sha256": digest},
        group_schema=schema,
    )
