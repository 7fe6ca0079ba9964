"""Datasets of two-group measurements: CSV ingestion, preprocessing, simulation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyPreprocessed,
    DuplicateFeatureId,
    GroupTooSmall,
    InputError,
    NonPositiveAfterShift,
    ParseError,
)
from .statistics import FeatureSample

LOG_SHIFT_TRANSFORM = "ln(v + shift)"


@dataclass(frozen=True)
class PreprocessLog:
    shift: float  # first quartile of the pooled control values
    transform: str = LOG_SHIFT_TRANSFORM


@dataclass(frozen=True)
class Dataset:
    """Features measured in a case group (x) and a control group (y).

    Per-feature group sizes may differ. ``truth`` holds the simulated
    labels (True = alternative) for synthetic data and is None otherwise.
    """

    features: tuple[FeatureSample, ...]
    group_labels: tuple[str, str] = ("x", "y")
    preprocessing_log: PreprocessLog | None = None
    truth: tuple[bool, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        seen: set[str] = set()
        dups = []
        for f in self.features:
            if f.feature_id in seen:
                dups.append(f.feature_id)
            seen.add(f.feature_id)
        if dups:
            raise DuplicateFeatureId(f"duplicate feature ids: {sorted(set(dups))}")
        if self.truth is not None and len(self.truth) != len(self.features):
            raise ValueError("truth labels must align with features")

    def __len__(self) -> int:
        return len(self.features)


@dataclass(frozen=True)
class IngestConfig:
    group_x: str
    group_y: str
    feature_column: str = "feature_id"
    group_column: str = "group"
    value_column: str = "value"
    min_group_size: int = 2


def ingest_csv(path: str | Path, config: IngestConfig) -> Dataset:
    """Read a long-format CSV (one measurement per row).

    Rows whose group is neither ``group_x`` nor ``group_y`` are skipped, so
    one file can hold several case groups. Every malformed row is collected
    and reported together in a ``ParseError``.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    columns = (config.feature_column, config.group_column, config.value_column)
    problems: list[tuple[int, str, str]] = []
    groups: dict[str, dict[str, list[float]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError([(1, "", "empty file; a header row is required")])
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise ParseError([(1, c, "column missing from header") for c in missing])
        for row in reader:
            line = reader.line_num
            fid = (row[config.feature_column] or "").strip()
            grp = (row[config.group_column] or "").strip()
            raw = (row[config.value_column] or "").strip()
            if not fid:
                problems.append((line, config.feature_column, "empty feature id"))
                continue
            if grp not in (config.group_x, config.group_y):
                continue
            try:
                value = float(raw)
            except ValueError:
                problems.append((line, config.value_column, f"not a number: {raw!r}"))
                continue
            if not math.isfinite(value):
                problems.append((line, config.value_column, f"not finite: {raw!r}"))
                continue
            groups.setdefault(fid, {config.group_x: [], config.group_y: []})[grp].append(value)
    if problems:
        raise ParseError(problems)
    if not groups:
        raise InputError(f"no rows with group {config.group_x!r} or {config.group_y!r} in {path}")
    small = [(fid, g, len(v)) for fid, by in groups.items() for g, v in by.items()
             if len(v) < config.min_group_size]
    if small:
        listed = ", ".join(f"{fid}[{g}] has {k}" for fid, g, k in small[:10])
        raise GroupTooSmall(f"each group needs at least {config.min_group_size} values: {listed}")
    features = tuple(FeatureSample(fid, by[config.group_x], by[config.group_y])
                     for fid, by in groups.items())
    return Dataset(features, (config.group_x, config.group_y))


def control_first_quartile(dataset: Dataset) -> float:
    """First quartile (linear interpolation, type 7) of all control values."""
    pooled = np.concatenate([np.asarray(f.group_y) for f in dataset.features])
    return float(np.quantile(pooled, 0.25, method="linear"))


def preprocess(dataset: Dataset) -> Dataset:
    """Replace every value v by ln(v + Q1), Q1 the pooled control first quartile."""
    if dataset.preprocessing_log is not None:
        raise AlreadyPreprocessed("dataset has already been preprocessed")
    shift = control_first_quartile(dataset)
    label_x, label_y = dataset.group_labels
    offending = [(f.feature_id, label, v)
                 for f in dataset.features
                 for label, values in ((label_x, f.group_x), (label_y, f.group_y))
                 for v in values if not v + shift > 0]
    if offending:
        raise NonPositiveAfterShift(offending)
    features = tuple(
        FeatureSample(f.feature_id,
                      np.log(np.asarray(f.group_x) + shift),
                      np.log(np.asarray(f.group_y) + shift))
        for f in dataset.features)
    return replace(dataset, features=features, preprocessing_log=PreprocessLog(shift))


def generate_synthetic(n_features: int, m: int, n: int, pi0: float, theta_alt: float,
                       seed: int, sigma: float = 1.0) -> Dataset:
    """Two-groups normal data with known labels.

    Each feature is independently null with probability ``pi0`` (both
    groups centred at 0) or alternative, in which case the case group is
    centred at +/- theta_alt * sigma with a random sign.
    """
    if n_features < 1 or m < 1 or n < 1:
        raise ValueError("n_features, m and n must be positive")
    if not 0.0 <= pi0 <= 1.0:
        raise ValueError("pi0 must be a probability")
    if theta_alt < 0 or sigma <= 0:
        raise ValueError("theta_alt must be >= 0 and sigma > 0")
    rng = np.random.default_rng(seed)
    width = len(str(n_features - 1))
    features, truth = [], []
    for i in range(n_features):
        alt = bool(rng.random() >= pi0)
        shift = theta_alt * sigma * rng.choice([-1.0, 1.0]) if alt else 0.0
        x = rng.normal(shift, sigma, m)
        y = rng.normal(0.0, sigma, n)
        features.append(FeatureSample(f"f{i:0{width}d}", x, y))
        truth.append(alt)
    return Dataset(tuple(features), ("x", "y"), None, tuple(truth))


def write_long_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset in the long format read by ``ingest_csv``."""
    label_x, label_y = dataset.group_labels
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_id", "group", "value"])
        for f in dataset.features:
            for label, values in ((label_x, f.group_x), (label_y, f.group_y)):
                for v in values:
                    w.writerow([f.feature_id, label, repr(float(v))])
