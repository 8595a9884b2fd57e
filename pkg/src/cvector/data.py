"""Dataset handling.

Covers the CIFAR-10 binary batch format, a deterministic 400-dimensional
feature pipeline, synthetic Gaussian blob sets used as ground-truth oracles,
and label masking for the unlabeled-data experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

CIFAR_RECORD_BYTES = 3073  # 1 label byte + 1024 R + 1024 G + 1024 B
CIFAR_NUM_CLASSES = 10
IMAGE_SIDE = 32
FEATURE_SIDE = 20
FEATURE_DIM = FEATURE_SIDE * FEATURE_SIDE

# Rec. 601 luma coefficients for R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class RawImage:
    """A 32x32 RGB image as three 8-bit color planes in R, G, B order."""

    planes: np.ndarray  # (3, 32, 32) uint8

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.uint8)
        if planes.shape != (3, IMAGE_SIDE, IMAGE_SIDE):
            raise DataError(
                f"image planes must have shape (3, {IMAGE_SIDE}, {IMAGE_SIDE}), "
                f"got {planes.shape}"
            )
        object.__setattr__(self, "planes", planes)

    @property
    def width(self) -> int:
        return IMAGE_SIDE

    @property
    def height(self) -> int:
        return IMAGE_SIDE


@dataclass(frozen=True)
class Sample:
    """One feature vector with an optional class label."""

    features: np.ndarray
    label: Optional[int] = None


def _as_feature_matrix(features, context: str) -> np.ndarray:
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DataError(f"{context}: expected a nonempty 2-d feature matrix, "
                        f"got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError(f"{context}: features contain non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LabeledSet:
    """Feature vectors with one class label per row.

    Every class id in 0..num_classes-1 must occur at least once; downstream
    class-mean computations normalize per class and need nonempty classes.
    """

    features: np.ndarray  # (N, n) float64
    labels: np.ndarray  # (N,) int64
    num_classes: int

    def __post_init__(self):
        features = _as_feature_matrix(self.features, "LabeledSet")
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.shape != (features.shape[0],):
            raise DataError(
                f"LabeledSet: {features.shape[0]} samples but {labels.shape} labels"
            )
        if self.num_classes < 1:
            raise DataError("LabeledSet: num_classes must be >= 1")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise DataError(
                f"LabeledSet: labels must lie in 0..{self.num_classes - 1}"
            )
        counts = np.bincount(labels, minlength=self.num_classes)
        missing = np.flatnonzero(counts == 0)
        if missing.size:
            raise DataError(
                f"LabeledSet: classes {missing.tolist()} have no members"
            )
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def sample(self, i: int) -> Sample:
        return Sample(self.features[i], int(self.labels[i]))


@dataclass(frozen=True)
class UnlabeledSet:
    """Feature vectors without labels."""

    features: np.ndarray  # (N, n) float64

    def __post_init__(self):
        object.__setattr__(
            self, "features", _as_feature_matrix(self.features, "UnlabeledSet")
        )

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def sample(self, i: int) -> Sample:
        return Sample(self.features[i], None)


class HiddenLabels:
    """Opaque holder for masked class labels.

    Classifier, monitor, and self-learning code never receives this object;
    the labels stay readable only through the narrow methods below.
    `accuracy` is the post-hoc evaluator. `class_ids` exposes only the set of
    classes present (split guards). `reveal_class_sums` is a deliberate
    side-information channel: it reads the masked labels, so anything built
    from it is no longer label-blind, which callers must account for.
    """

    def __init__(self, labels):
        arr = np.asarray(labels, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("HiddenLabels: expected a nonempty 1-d label array")
        arr.flags.writeable = False
        self._labels = arr

    def __len__(self) -> int:
        return self._labels.size

    def accuracy(self, predictions) -> float:
        """Fraction of predictions equal to the hidden labels."""
        preds = np.asarray(predictions, dtype=np.int64)
        if preds.shape != self._labels.shape:
            raise DataError(
                f"HiddenLabels.accuracy: expected {self._labels.shape[0]} "
                f"predictions, got {preds.shape}"
            )
        return float(np.mean(preds == self._labels))

    def class_ids(self) -> frozenset:
        """Distinct hidden class ids (set only, no per-sample information)."""
        return frozenset(int(c) for c in np.unique(self._labels))

    def reveal_class_sums(self, samples: UnlabeledSet):
        """Per-hidden-class feature sums and counts, ordered by class id.

        Returns (class_ids, sums, counts) where sums[:, j] is the feature sum
        of the j-th class id. Reads the masked labels; see class docstring.
        """
        if len(samples) != len(self):
            raise DataError(
                "reveal_class_sums: sample count does not match hidden labels"
            )
        ids = np.unique(self._labels)
        sums = np.empty((samples.dim, ids.size))
        counts = np.empty(ids.size, dtype=np.int64)
        for j, c in enumerate(ids):
            mask = self._labels == c
            sums[:, j] = samples.features[mask].sum(axis=0)
            counts[j] = int(mask.sum())
        return ids, sums, counts


def mask_labels(labeled: LabeledSet):
    """Split a labeled set into its features and a hidden-label handle.

    The returned UnlabeledSet shares sample order and exact feature values
    with the input.
    """
    return UnlabeledSet(labeled.features), HiddenLabels(labeled.labels)


def parse_cifar10(data: bytes):
    """Parse CIFAR-10 binary batch bytes into (RawImage, class id) pairs.

    Each record is 3073 bytes: one label byte followed by the red, green and
    blue planes of a 32x32 image.
    """
    if len(data) % CIFAR_RECORD_BYTES != 0:
        raise DataError(
            f"malformed CIFAR-10 batch: {len(data)} bytes is not a multiple "
            f"of {CIFAR_RECORD_BYTES}"
        )
    buf = np.frombuffer(data, dtype=np.uint8)
    records = []
    for idx in range(len(data) // CIFAR_RECORD_BYTES):
        rec = buf[idx * CIFAR_RECORD_BYTES:(idx + 1) * CIFAR_RECORD_BYTES]
        label = int(rec[0])
        if label >= CIFAR_NUM_CLASSES:
            raise DataError(
                f"corrupt CIFAR-10 record {idx}: label byte {label} > "
                f"{CIFAR_NUM_CLASSES - 1}"
            )
        planes = rec[1:].reshape(3, IMAGE_SIDE, IMAGE_SIDE)
        records.append((RawImage(planes), label))
    return records


def serialize_cifar10(records) -> bytes:
    """Inverse of parse_cifar10; reproduces the original bytes exactly."""
    parts = []
    for image, label in records:
        if not 0 <= label < CIFAR_NUM_CLASSES:
            raise DataError(f"label {label} out of range for CIFAR-10")
        parts.append(bytes([label]))
        parts.append(image.planes.tobytes())
    return b"".join(parts)


def _bilinear_resize(img: np.ndarray, out_side: int) -> np.ndarray:
    """Bilinear downscale of a square image with pixel-center alignment.

    Output pixel i samples the source at (i + 0.5) * src/out - 0.5, clamped
    to the valid range.
    """
    src = img.shape[0]
    coords = (np.arange(out_side) + 0.5) * (src / out_side) - 0.5
    coords = np.clip(coords, 0.0, src - 1.0)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    frac = coords - lo
    top = img[np.ix_(lo, lo)] * (1.0 - frac)[None, :] + img[np.ix_(lo, hi)] * frac[None, :]
    bot = img[np.ix_(hi, lo)] * (1.0 - frac)[None, :] + img[np.ix_(hi, hi)] * frac[None, :]
    return top * (1.0 - frac)[:, None] + bot * frac[:, None]


def extract_features(image: RawImage) -> np.ndarray:
    """Deterministic 400-dim feature vector for one image.

    Pipeline: luma conversion (0.299 R + 0.587 G + 0.114 B), bilinear resize
    32x32 -> 20x20, scale to [0, 1] by dividing by 255, row-major flatten.
    """
    planes = image.planes.astype(np.float64)
    luma = (
        LUMA_WEIGHTS[0] * planes[0]
        + LUMA_WEIGHTS[1] * planes[1]
        + LUMA_WEIGHTS[2] * planes[2]
    )
    small = _bilinear_resize(luma, FEATURE_SIDE)
    return np.clip(small / 255.0, 0.0, 1.0).reshape(-1)


def feature_matrix(images: Sequence[RawImage]) -> np.ndarray:
    """Stack extract_features over a sequence of images."""
    return np.stack([extract_features(im) for im in images])


def make_blobs(num_classes: int, dim: int, per_class: int, separation: float,
               seed: int) -> LabeledSet:
    """Synthetic oracle dataset: isotropic unit-variance Gaussian clusters.

    Class i is centered at separation * e_i (the i-th standard basis
    direction). Draws come from numpy's PCG64 generator seeded explicitly, so
    a fixed seed reproduces the set bit-exactly.
    """
    if num_classes < 2:
        raise ValueError("make_blobs: num_classes must be >= 2")
    if dim < 1 or per_class < 1 or separation < 0:
        raise ValueError("make_blobs: dim >= 1, per_class >= 1, separation >= 0 required")
    if num_classes > dim:
        raise ValueError(
            f"make_blobs: num_classes ({num_classes}) > dim ({dim}); "
            "basis-direction means unavailable"
        )
    rng = np.random.default_rng(seed)
    blocks = []
    for i in range(num_classes):
        mean = np.zeros(dim)
        mean[i] = separation
        blocks.append(mean + rng.standard_normal((per_class, dim)))
    features = np.concatenate(blocks, axis=0)
    labels = np.repeat(np.arange(num_classes), per_class)
    return LabeledSet(features, labels, num_classes)


def select_classes(features, labels, class_ids) -> LabeledSet:
    """Rows whose label is in class_ids, relabeled positionally.

    The sample whose original label equals class_ids[j] gets label j, so the
    result satisfies the LabeledSet contract regardless of the original ids.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    class_ids = [int(c) for c in class_ids]
    if len(set(class_ids)) != len(class_ids):
        raise DataError("select_classes: duplicate class ids")
    remap = {c: j for j, c in enumerate(class_ids)}
    mask = np.isin(labels, class_ids)
    if not mask.any():
        raise DataError("select_classes: no samples from the requested classes")
    new_labels = np.array([remap[int(c)] for c in labels[mask]], dtype=np.int64)
    return LabeledSet(features[mask], new_labels, len(class_ids))


def save_feature_csv(path, features, labels=None) -> None:
    """Write a feature dump: header label,f0,...,f{n-1}; -1 marks masked rows."""
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(n)) + "\n")
        for i, row in enumerate(features):
            label = -1 if labels is None else int(labels[i])
            fh.write(str(label) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def load_feature_csv(path):
    """Read a feature dump back as (features, labels); labels is None when
    every row is masked (-1)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "label":
            raise DataError(f"{path}: not a feature dump (missing label column)")
        rows = []
        labels = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise DataError(f"{path}: row with {len(cells)} cells, "
                                f"expected {len(header)}")
            labels.append(int(cells[0]))
            rows.append([float(v) for v in cells[1:]])
    if not rows:
        raise DataError(f"{path}: empty feature dump")
    label_arr = np.asarray(labels, dtype=np.int64)
    features = np.asarray(rows, dtype=np.float64)
    if (label_arr == -1).all():
        return features, None
    if (label_arr == -1).any():
        raise DataError(f"{path}: mixes masked and labeled rows")
    return features, label_arr
