"""Dataset ingestion, MOS normalization, synthetic generation, and splits.

CSV layout: header `id,mos[,std][,f0..fk]`, UTF-8, `.` decimal separator.
Datasets are immutable after loading.
"""

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import DegenerateInputError, DomainError, MosSample, ParseError

__all__ = [
    "Dataset",
    "SynthSpec",
    "GENERATORS",
    "load_csv",
    "save_csv",
    "normalize_mos",
    "generate_synthetic",
    "split",
]

GENERATORS = ("linear", "nonlinear-smooth", "multimodal")


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple
    name: str
    native_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.native_range
        if not lo < hi:
            raise DomainError(f"native range must be increasing, got ({lo}, {hi})")

    def __len__(self) -> int:
        return len(self.samples)

    def mos_array(self) -> np.ndarray:
        return np.array([s.mos for s in self.samples])

    def std_array(self) -> np.ndarray:
        """Per-sample rating std; NaN marks absent annotations."""
        return np.array([np.nan if s.std is None else s.std for s in self.samples])

    def feature_matrix(self) -> np.ndarray:
        return np.stack([s.features for s in self.samples])


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic dataset; the feature-to-MOS map is deterministic
    given the seed, with optional Gaussian noise added afterwards."""

    n: int
    feature_dim: int = 8
    generator: str = "linear"
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.feature_dim < 1:
            raise DomainError("n and feature_dim must be >= 1")
        if self.generator not in GENERATORS:
            raise DomainError(f"unknown generator {self.generator!r}; choices: {GENERATORS}")
        if self.noise_std < 0.0:
            raise DomainError("noise_std must be >= 0")


def load_csv(path, native_range: tuple[float, float]) -> Dataset:
    """Parse a rated-item CSV; rejects rows whose MOS falls outside the range."""
    path = Path(path)
    lo, hi = native_range
    if not lo < hi:
        raise DomainError(f"native range must be increasing, got ({lo}, {hi})")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", line=0) from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[0] != "id" or header[1] != "mos":
            raise ParseError(f"{path}: header must start with id,mos", line=1)
        has_std = len(header) > 2 and header[2] == "std"
        feat_start = 3 if has_std else 2

        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}",
                    line=lineno,
                )
            sid = row[0]
            try:
                mos = float(row[1])
                std = None
                if has_std and row[2] != "":
                    std = float(row[2])
                feats = np.array([float(v) for v in row[feat_start:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}", line=lineno) from None
            if not lo <= mos <= hi:
                raise ParseError(
                    f"{path}: line {lineno}: mos {mos} outside native range [{lo}, {hi}]",
                    line=lineno,
                )
            if std is not None and std < 0.0:
                raise ParseError(f"{path}: line {lineno}: negative std {std}", line=lineno)
            samples.append(MosSample(id=sid, features=feats, mos=mos, std=std))
    if not samples:
        raise ParseError(f"{path}: no data rows", line=1)
    return Dataset(samples=tuple(samples), name=path.stem, native_range=(lo, hi))


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset back out; floats use repr so reloads are lossless."""
    has_std = any(s.std is not None for s in dataset.samples)
    n_feats = dataset.samples[0].features.shape[0] if len(dataset) else 0
    header = ["id", "mos"] + (["std"] if has_std else []) + [f"f{i}" for i in range(n_feats)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in dataset.samples:
            row = [s.id, repr(s.mos)]
            if has_std:
                row.append("" if s.std is None else repr(s.std))
            row.extend(repr(float(v)) for v in s.features)
            writer.writerow(row)


def normalize_mos(dataset: Dataset) -> Dataset:
    """Affinely map the native MOS range onto [1, 5]; stds scale by the same factor."""
    lo, hi = dataset.native_range
    if hi == lo:
        raise DegenerateInputError("degenerate native range")
    scale = 4.0 / (hi - lo)
    samples = tuple(
        replace(
            s,
            mos=1.0 + scale * (s.mos - lo),
            std=None if s.std is None else scale * s.std,
        )
        for s in dataset.samples
    )
    return Dataset(samples=samples, name=dataset.name, native_range=(1.0, 5.0))


def _mos_map(generator: str, features: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Deterministic feature-to-MOS map; draws mixing weights from `rng`."""
    d = features.shape[1]
    w = rng.normal(size=d)
    raw = features @ w
    neg = np.minimum(w, 0.0).sum()
    pos = np.maximum(w, 0.0).sum()
    span = pos - neg if pos > neg else 1.0
    u = (raw - neg) / span  # in [0, 1] by construction
    if generator == "linear":
        return 1.1 + 3.8 * u
    if generator == "nonlinear-smooth":
        return 1.3 + 3.4 * u + 0.25 * np.sin(2.0 * np.pi * u)
    # multimodal: non-monotone, spans several quality levels
    return 3.0 + 1.7 * np.sin(3.0 * np.pi * u)


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Seeded synthetic dataset on the unit feature cube, MOS clamped to [1, 5]."""
    rng = np.random.default_rng(spec.seed)
    features = rng.uniform(0.0, 1.0, size=(spec.n, spec.feature_dim))
    mos = _mos_map(spec.generator, features, rng)
    if spec.noise_std > 0.0:
        mos = mos + rng.normal(0.0, spec.noise_std, size=spec.n)
    mos = np.clip(mos, 1.0, 5.0)
    stds = rng.uniform(0.1, 1.0, size=spec.n)
    width = len(str(spec.n - 1))
    samples = tuple(
        MosSample(
            id=f"s{i:0{width}d}",
            features=features[i],
            mos=float(mos[i]),
            std=float(stds[i]),
        )
        for i in range(spec.n)
    )
    return Dataset(
        samples=samples,
        name=f"synth-{spec.generator}-n{spec.n}-seed{spec.seed}",
        native_range=(1.0, 5.0),
    )


def split(dataset: Dataset, train_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle-then-partition; the two parts are disjoint and exhaustive."""
    if not 0.0 < train_frac < 1.0:
        raise DomainError(f"train_frac must be in (0, 1), got {train_frac}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    k = int(round(train_frac * len(dataset)))
    train = tuple(dataset.samples[i] for i in order[:k])
    test = tuple(dataset.samples[i] for i in order[k:])
    return (
        Dataset(samples=train, name=f"{dataset.name}-train", native_range=dataset.native_range),
        Dataset(samples=test, name=f"{dataset.name}-test", native_range=dataset.native_range),
    )
