"""Open-mouth shadow segmentation and shape statistics.

The shadow of an open mouth is dark in every channel, so segmentation is a
conjunction of a low-luminance and a low-red threshold, followed by
connected-components labeling and selection of the largest blob.  Shape is
summarized by area, bounding box, centroid, and central second moments; the
eigen-decomposition of the moment matrix gives a rotation-invariant
(lambda1, lambda2) signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frameio import Frame, luminance_array


@dataclass(frozen=True)
class SegmentationParams:
    """Thresholds and labeling knobs for shadow segmentation.

    ``red_rule`` selects the inequality for the red channel: "below" keeps
    dark-red pixels (cavity shadow), "above" keeps strongly red ones.
    """

    intensity_threshold: int = 60
    red_threshold: int = 80
    connectivity: int = 8
    min_area: int = 0
    red_rule: str = "below"

    def __post_init__(self):
        if not 0 <= self.intensity_threshold <= 255:
            raise ValueError(f"intensity_threshold out of [0,255]: {self.intensity_threshold}")
        if not 0 <= self.red_threshold <= 255:
            raise ValueError(f"red_threshold out of [0,255]: {self.red_threshold}")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.min_area < 0:
            raise ValueError(f"min_area must be >= 0, got {self.min_area}")
        if self.red_rule not in ("below", "above"):
            raise ValueError(f"red_rule must be 'below' or 'above', got {self.red_rule!r}")


@dataclass(frozen=True)
class BlobMask:
    """Boolean membership grid for shadow pixels."""

    width: int
    height: int
    bits: bytes  # packed rows, np.packbits order

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BlobMask":
        a = np.asarray(arr, dtype=bool)
        if a.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {a.shape}")
        return cls(width=a.shape[1], height=a.shape[0], bits=np.packbits(a, axis=None).tobytes())

    def as_array(self) -> np.ndarray:
        flat = np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8), count=self.width * self.height)
        return flat.reshape(self.height, self.width).astype(bool)

    @property
    def count(self) -> int:
        return int(self.as_array().sum())

    @classmethod
    def empty(cls, width: int, height: int) -> "BlobMask":
        return cls.from_array(np.zeros((height, width), dtype=bool))


@dataclass(frozen=True)
class MouthShape:
    """Blob statistics: area, bbox, central second moments, principal axes."""

    area: float = 0.0
    bbox_w: float = 0.0
    bbox_h: float = 0.0
    aspect_ratio: float = 0.0
    centroid: tuple[float, float] = (0.0, 0.0)
    mu20: float = 0.0
    mu02: float = 0.0
    mu11: float = 0.0
    principal_angle: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    empty: bool = True

    def to_json(self) -> dict:
        """Flat JSON object; field names are the wire/log schema."""
        return {
            "area": self.area,
            "bbox_w": self.bbox_w,
            "bbox_h": self.bbox_h,
            "aspect_ratio": self.aspect_ratio,
            "centroid": [self.centroid[0], self.centroid[1]],
            "mu20": self.mu20,
            "mu02": self.mu02,
            "mu11": self.mu11,
            "principal_angle": self.principal_angle,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "empty": self.empty,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MouthShape":
        return cls(
            area=obj["area"],
            bbox_w=obj["bbox_w"],
            bbox_h=obj["bbox_h"],
            aspect_ratio=obj["aspect_ratio"],
            centroid=(obj["centroid"][0], obj["centroid"][1]),
            mu20=obj["mu20"],
            mu02=obj["mu02"],
            mu11=obj["mu11"],
            principal_angle=obj["principal_angle"],
            lambda1=obj["lambda1"],
            lambda2=obj["lambda2"],
            empty=obj["empty"],
        )


def threshold_shadow(roi_frame: Frame, params: SegmentationParams) -> BlobMask:
    """Mark pixels whose luminance is below the intensity threshold and,
    for RGB input, whose red channel passes the red rule."""
    lum = luminance_array(roi_frame)
    mask = lum < params.intensity_threshold
    if roi_frame.channels == 3:
        red = roi_frame.as_array()[:, :, 0]
        if params.red_rule == "below":
            mask &= red < params.red_threshold
        else:
            mask &= red > params.red_threshold
    return BlobMask.from_array(mask)


def _label_components(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    """Two-pass run-based labeling. Returns (label grid, n_labels); labels 1..n."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent: list[int] = [0]  # union-find, parent[0] unused

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    # Runs of consecutive set pixels per row, linked to overlapping runs above.
    reach = 1 if connectivity == 8 else 0
    prev_runs: list[tuple[int, int, int]] = []  # (start, end_exclusive, label)
    next_label = 1
    for y in range(h):
        row = mask[y]
        runs: list[tuple[int, int, int]] = []
        x = 0
        while x < w:
            if row[x]:
                start = x
                while x < w and row[x]:
                    x += 1
                lab = 0
                for ps, pe, pl in prev_runs:
                    if ps < x + reach and pe > start - reach:
                        if lab == 0:
                            lab = pl
                        else:
                            union(lab, pl)
                if lab == 0:
                    lab = next_label
                    parent.append(lab)
                    next_label += 1
                labels[y, start:x] = lab
                runs.append((start, x, lab))
            else:
                x += 1
        prev_runs = runs

    # Flatten equivalences to consecutive labels.
    remap = np.zeros(next_label, dtype=np.int32)
    count = 0
    for lab in range(1, next_label):
        root = find(lab)
        if remap[root] == 0:
            count += 1
            remap[root] = count
        remap[lab] = remap[root]
    return remap[labels], count


def largest_component(mask: BlobMask, params: SegmentationParams) -> BlobMask:
    """Largest connected component with area >= min_area.

    Equal-size components tie-break to the one with the smallest
    (min_row, min_col); an empty result is the empty mask.
    """
    arr = mask.as_array()
    if not arr.any():
        return BlobMask.empty(mask.width, mask.height)
    labels, n = _label_components(arr, params.connectivity)
    best = None  # (-size, min_row, min_col, label)
    for lab in range(1, n + 1):
        ys, xs = np.nonzero(labels == lab)
        size = ys.size
        if size < max(params.min_area, 1):
            continue
        key = (-size, int(ys.min()), int(xs.min()), lab)
        if best is None or key[:3] < best[:3]:
            best = key
    if best is None:
        return BlobMask.empty(mask.width, mask.height)
    return BlobMask.from_array(labels == best[3])


def shape_stats(blob: BlobMask) -> MouthShape:
    """Area, bounding box, centroid, central second moments, principal axes.

    Moments are normalized by area; bbox is inclusive, so a single pixel has
    bbox 1x1.  The empty blob yields the all-zero shape with empty=True.
    """
    arr = blob.as_array()
    ys, xs = np.nonzero(arr)
    area = ys.size
    if area == 0:
        return MouthShape()
    # Work in blob-local coordinates so integer translations of the blob
    # produce bitwise-identical statistics.
    x0, y0 = int(xs.min()), int(ys.min())
    x = (xs - x0).astype(np.float64)
    y = (ys - y0).astype(np.float64)
    lcx = float(x.sum() / area)
    lcy = float(y.sum() / area)
    dx = x - lcx
    dy = y - lcy
    mu20 = float((dx * dx).sum() / area)
    mu02 = float((dy * dy).sum() / area)
    mu11 = float((dx * dy).sum() / area)
    cx = lcx + x0
    cy = lcy + y0
    bbox_w = float(xs.max() - x0 + 1)
    bbox_h = float(ys.max() - y0 + 1)
    angle, lam1, lam2 = _principal_axes(mu20, mu02, mu11)
    return MouthShape(
        area=float(area),
        bbox_w=bbox_w,
        bbox_h=bbox_h,
        aspect_ratio=bbox_w / bbox_h,
        centroid=(cx, cy),
        mu20=mu20,
        mu02=mu02,
        mu11=mu11,
        principal_angle=angle,
        lambda1=lam1,
        lambda2=lam2,
        empty=False,
    )


def _principal_axes(mu20: float, mu02: float, mu11: float) -> tuple[float, float, float]:
    trace = mu20 + mu02
    diff = mu20 - mu02
    root = math.sqrt(diff * diff + 4.0 * mu11 * mu11)
    lam1 = (trace + root) / 2.0
    lam2 = (trace - root) / 2.0
    if mu11 == 0.0 and diff == 0.0:
        angle = 0.0  # isotropic: orientation undefined, reported as 0
    else:
        angle = math.degrees(0.5 * math.atan2(2.0 * mu11, diff))
        if angle <= -90.0:
            angle += 180.0
    return angle, lam1, lam2


def principal_axes(shape: MouthShape) -> tuple[float, float, float]:
    """(principal_angle, lambda1, lambda2) of the moment matrix
    [[mu20, mu11], [mu11, mu02]]; raises on the empty shape."""
    if shape.empty:
        raise ValueError("principal axes undefined for the empty shape")
    return _principal_axes(shape.mu20, shape.mu02, shape.mu11)
