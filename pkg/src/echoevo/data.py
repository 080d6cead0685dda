"""Recording data: interchange-format loading, filtering, windowing, and a
synthetic burst-detection task for desk-scale runs.

Interchange format (one directory):

    metadata.csv   columns id, fold, validated_by_human, normal_confidence, label
    <id>.f32       waveform, raw little-endian float32
    <id>.csv       waveform alternative, one value per line

fold 1..8 is train, 9 validation, 10 test. label is pooled to binary:
"normal"/"norm" (any case) is class 0, everything else class 1.

Filtering pipeline, in order: a fixed-size random set-aside is removed from
train first and kept untouched; train rows without human validation are
dropped; rows labeled normal with confidence strictly below the floor are
dropped everywhere; validation and test are balanced by downsampling the
majority class. Train is left unbalanced.
"""

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

LABEL_NORMAL = 0
LABEL_ATYPICAL = 1

_SPLIT_NAMES = ("train", "validation", "test")


class DataError(Exception):
    """Missing files or malformed data tables."""


@dataclass
class Recording:
    id: str
    samples: np.ndarray
    label: int
    strat_fold: int = 0
    human_validated: bool = True
    normal_confidence: float = 100.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError(f"recording {self.id}: samples must be a non-empty vector")
        if self.label not in (LABEL_NORMAL, LABEL_ATYPICAL):
            raise ValueError(f"recording {self.id}: label must be 0 or 1")


@dataclass
class FilterReport:
    """Row counts at each pipeline stage, per split."""

    input_counts: dict = field(default_factory=dict)
    excluded_not_human: dict = field(default_factory=dict)
    excluded_low_confidence: dict = field(default_factory=dict)
    final_unbalanced: dict = field(default_factory=dict)
    class_counts: dict = field(default_factory=dict)
    final_balanced: dict = field(default_factory=dict)
    set_aside_count: int = 0

    def as_dict(self) -> dict:
        return {
            "set_aside_count": self.set_aside_count,
            "input_counts": dict(self.input_counts),
            "excluded_not_human": dict(self.excluded_not_human),
            "excluded_low_confidence": dict(self.excluded_low_confidence),
            "final_unbalanced": dict(self.final_unbalanced),
            "class_counts": {k: dict(v) for k, v in self.class_counts.items()},
            "final_balanced": dict(self.final_balanced),
        }


@dataclass
class DatasetSplit:
    train: list
    validation: list
    test: list
    set_aside: list = field(default_factory=list)
    filter_report: FilterReport = None


def window(samples, width: int) -> np.ndarray:
    """All stride-1 windows of `width` samples, one per row, no padding.

    A recording of length L yields L - width + 1 rows.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ValueError("samples must be a vector")
    width = int(width)
    if width < 1:
        raise ValueError(f"window width must be >= 1, got {width}")
    if samples.size < width:
        raise ValueError(
            f"recording of length {samples.size} is shorter than window width {width}")
    return np.lib.stride_tricks.sliding_window_view(samples, width).copy()


# ---------------------------------------------------------------------------
# interchange loading

@dataclass
class _Row:
    id: str
    fold: int
    human: bool
    confidence: float
    label: int


def _parse_metadata(path):
    if not os.path.exists(path):
        raise DataError(f"missing metadata table {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "fold", "validated_by_human", "normal_confidence", "label"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing columns {sorted(missing)}")
        for lineno, raw in enumerate(reader, start=2):
            try:
                rec_id = raw["id"].strip()
                if not rec_id:
                    raise ValueError("empty id")
                fold = int(raw["fold"])
                if not 1 <= fold <= 10:
                    raise ValueError(f"fold {fold} outside 1..10")
                human = int(raw["validated_by_human"])
                if human not in (0, 1):
                    raise ValueError(f"validated_by_human must be 0 or 1, got {human}")
                confidence = float(raw["normal_confidence"])
                if not 0.0 <= confidence <= 100.0 or not math.isfinite(confidence):
                    raise ValueError(f"normal_confidence {confidence} outside 0..100")
                label_text = raw["label"].strip().lower()
                if not label_text:
                    raise ValueError("empty label")
                label = LABEL_NORMAL if label_text in ("norm", "normal") else LABEL_ATYPICAL
            except (KeyError, TypeError, ValueError) as e:
                raise DataError(f"{path} row {lineno}: {e}") from e
            rows.append(_Row(rec_id, fold, bool(human), confidence, label))
    return rows


def load_waveform(source_dir, rec_id, fmt: str = "auto") -> np.ndarray:
    f32_path = os.path.join(source_dir, f"{rec_id}.f32")
    csv_path = os.path.join(source_dir, f"{rec_id}.csv")
    if fmt not in ("auto", "f32", "csv"):
        raise ValueError(f"unknown waveform format {fmt!r}")
    if fmt in ("auto", "f32") and os.path.exists(f32_path):
        samples = np.fromfile(f32_path, dtype="<f4").astype(np.float64)
    elif fmt in ("auto", "csv") and os.path.exists(csv_path):
        try:
            samples = np.loadtxt(csv_path, dtype=np.float64, ndmin=1)
        except ValueError as e:
            raise DataError(f"{csv_path}: {e}") from e
    else:
        raise DataError(f"no waveform file for recording {rec_id} in {source_dir}")
    if samples.ndim != 1 or samples.size == 0:
        raise DataError(f"waveform for {rec_id} is empty or not a vector")
    return samples


def save_waveform(path, samples, fmt: str = "f32") -> None:
    samples = np.asarray(samples, dtype=np.float64)
    if fmt == "f32":
        samples.astype("<f4").tofile(path)
    elif fmt == "csv":
        np.savetxt(path, samples, fmt="%.17g")
    else:
        raise ValueError(f"unknown waveform format {fmt!r}")


def _balance(recordings, rng):
    """Downsample the majority class; keeps original ordering."""
    idx_by_label = {LABEL_NORMAL: [], LABEL_ATYPICAL: []}
    for i, rec in enumerate(recordings):
        idx_by_label[rec.label].append(i)
    n0 = len(idx_by_label[LABEL_NORMAL])
    n1 = len(idx_by_label[LABEL_ATYPICAL])
    if n0 == n1:
        return list(recordings)
    major = idx_by_label[LABEL_NORMAL] if n0 > n1 else idx_by_label[LABEL_ATYPICAL]
    minor = idx_by_label[LABEL_ATYPICAL] if n0 > n1 else idx_by_label[LABEL_NORMAL]
    chosen = rng.choice(np.asarray(major), size=len(minor), replace=False)
    keep = sorted(set(minor) | set(int(i) for i in chosen))
    return [recordings[i] for i in keep]


def load_and_filter(source_dir, rng, *, set_aside_count: int = 2174,
                    confidence_floor: float = 50.0,
                    waveform_format: str = "auto") -> DatasetSplit:
    """Load an interchange directory and run the full filtering pipeline."""
    rows = _parse_metadata(os.path.join(source_dir, "metadata.csv"))
    by_split = {name: [] for name in _SPLIT_NAMES}
    for row in rows:
        if row.fold <= 8:
            by_split["train"].append(row)
        elif row.fold == 9:
            by_split["validation"].append(row)
        else:
            by_split["test"].append(row)

    report = FilterReport(set_aside_count=set_aside_count)

    set_aside_rows = []
    if set_aside_count:
        train_rows = by_split["train"]
        if set_aside_count > len(train_rows):
            raise DataError(
                f"set-aside of {set_aside_count} exceeds the {len(train_rows)} train rows")
        picked = set(int(i) for i in
                     rng.choice(len(train_rows), size=set_aside_count, replace=False))
        set_aside_rows = [r for i, r in enumerate(train_rows) if i in picked]
        by_split["train"] = [r for i, r in enumerate(train_rows) if i not in picked]

    report.input_counts = {name: len(by_split[name]) for name in _SPLIT_NAMES}

    report.excluded_not_human = {name: 0 for name in _SPLIT_NAMES}
    kept = [r for r in by_split["train"] if r.human]
    report.excluded_not_human["train"] = len(by_split["train"]) - len(kept)
    by_split["train"] = kept

    report.excluded_low_confidence = {}
    for name in _SPLIT_NAMES:
        kept = [r for r in by_split[name]
                if not (r.label == LABEL_NORMAL and r.confidence < confidence_floor)]
        report.excluded_low_confidence[name] = len(by_split[name]) - len(kept)
        by_split[name] = kept

    report.final_unbalanced = {name: len(by_split[name]) for name in _SPLIT_NAMES}
    report.class_counts = {
        name: {
            LABEL_NORMAL: sum(1 for r in by_split[name] if r.label == LABEL_NORMAL),
            LABEL_ATYPICAL: sum(1 for r in by_split[name] if r.label == LABEL_ATYPICAL),
        }
        for name in _SPLIT_NAMES
    }

    def materialize(row_list):
        return [
            Recording(
                id=row.id,
                samples=load_waveform(source_dir, row.id, waveform_format),
                label=row.label,
                strat_fold=row.fold,
                human_validated=row.human,
                normal_confidence=row.confidence,
            )
            for row in row_list
        ]

    train = materialize(by_split["train"])
    validation = _balance(materialize(by_split["validation"]), rng)
    test = _balance(materialize(by_split["test"]), rng)
    report.final_balanced = {"validation": len(validation), "test": len(test)}

    return DatasetSplit(
        train=train,
        validation=validation,
        test=test,
        set_aside=materialize(set_aside_rows),
        filter_report=report,
    )


# ---------------------------------------------------------------------------
# synthetic task: sine background, positive DC bursts mark the atypical class

@dataclass
class SynthConfig:
    train_size: int = 160
    validation_size: int = 48
    test_size: int = 48
    length: int = 200
    sine_cycles: float = 10.0
    sine_amplitude: float = 1.0
    noise_level: float = 0.1
    burst_amplitude: float = 3.0
    burst_count_min: int = 2
    burst_count_max: int = 3
    burst_width_min: float = 0.18
    burst_width_max: float = 0.25

    def validate(self):
        for name in ("train_size", "validation_size", "test_size"):
            size = getattr(self, name)
            if size < 2 or size % 2:
                raise ValueError(f"{name} must be even and >= 2, got {size}")
        if self.length < 8:
            raise ValueError(f"length must be >= 8, got {self.length}")
        if not 0 < self.burst_width_min <= self.burst_width_max < 1:
            raise ValueError("burst widths must satisfy 0 < min <= max < 1")
        if self.burst_count_min < 1 or self.burst_count_max < self.burst_count_min:
            raise ValueError("burst counts must satisfy 1 <= min <= max")
        if self.noise_level < 0 or self.sine_amplitude < 0 or self.burst_amplitude <= 0:
            raise ValueError("amplitudes must be non-negative, burst amplitude positive")


def _synth_signal(config: SynthConfig, label: int, rng) -> np.ndarray:
    length = config.length
    t = np.arange(length)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    x = config.sine_amplitude * np.sin(
        2.0 * np.pi * config.sine_cycles * t / length + phase)
    if label == LABEL_ATYPICAL:
        count = int(rng.integers(config.burst_count_min, config.burst_count_max + 1))
        placed = []
        for _ in range(count):
            width = max(1, int(round(length * rng.uniform(
                config.burst_width_min, config.burst_width_max))))
            start = 0
            for _attempt in range(20):
                start = int(rng.integers(0, length - width + 1))
                if all(start + width <= s or start >= s + w for s, w in placed):
                    break
            placed.append((start, width))
        for start, width in placed:
            x[start:start + width] += config.burst_amplitude
    if config.noise_level > 0:
        x = x + rng.normal(0.0, config.noise_level, size=length)
    return x


def synth_dataset(config: SynthConfig, rng) -> DatasetSplit:
    """Balanced synthetic splits; class alternates along each split."""
    config.validate()

    def make(split_name, size, fold):
        recs = []
        for i in range(size):
            label = LABEL_ATYPICAL if i % 2 else LABEL_NORMAL
            recs.append(Recording(
                id=f"synth-{split_name}-{i:04d}",
                samples=_synth_signal(config, label, rng),
                label=label,
                strat_fold=fold,
            ))
        return recs

    return DatasetSplit(
        train=make("train", config.train_size, 1),
        validation=make("validation", config.validation_size, 9),
        test=make("test", config.test_size, 10),
    )
