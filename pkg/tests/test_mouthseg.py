import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facegest.frameio import Frame
from facegest.mouthseg import (
    BlobMask,
    MouthShape,
    SegmentationParams,
    largest_component,
    principal_axes,
    shape_stats,
    threshold_shadow,
)
from oracles import eigenvalues_oracle, largest_component_oracle, moments_oracle, random_mask


def mask_of(rows):
    return BlobMask.from_array(np.array(rows, dtype=bool))


def rgb(arr):
    return Frame.from_array(np.asarray(arr, dtype=np.uint8))


class TestThresholdShadow:
    def test_all_white_empty(self):
        frame = rgb(np.full((8, 8, 3), 255))
        params = SegmentationParams()
        assert threshold_shadow(frame, params).count == 0

    def test_all_black_full(self):
        frame = rgb(np.zeros((8, 8, 3)))
        params = SegmentationParams(intensity_threshold=60, red_threshold=60)
        assert threshold_shadow(frame, params).count == 64

    def test_checkerboard_boundary_luminance(self):
        # (200,0,0) has luminance exactly 60, which is not < 60, so only the
        # black squares survive.
        tile = np.zeros((8, 8, 3), dtype=np.uint8)
        tile[::2, 1::2] = (200, 0, 0)
        tile[1::2, ::2] = (200, 0, 0)
        frame = rgb(tile)
        params = SegmentationParams(intensity_threshold=60, red_threshold=60)
        got = threshold_shadow(frame, params).as_array()
        black = (tile == 0).all(axis=2)
        assert np.array_equal(got, black)

    def test_gray_frames_skip_red_rule(self):
        frame = Frame.from_array(np.full((4, 4), 10, dtype=np.uint8))
        params = SegmentationParams(intensity_threshold=60, red_threshold=0)
        assert threshold_shadow(frame, params).count == 16

    def test_red_rule_above_selects_lips(self):
        tile = np.zeros((1, 2, 3), dtype=np.uint8)
        tile[0, 0] = (120, 0, 0)   # reddish and dark
        tile[0, 1] = (10, 10, 10)  # plain shadow
        params = SegmentationParams(intensity_threshold=60, red_threshold=80, red_rule="above")
        got = threshold_shadow(rgb(tile), params).as_array()
        assert got[0, 0] and not got[0, 1]

    def test_lowering_intensity_threshold_never_grows_mask(self):
        rng = np.random.default_rng(42)
        frame = rgb(rng.integers(0, 256, size=(16, 16, 3)))
        masks = []
        for t in (120, 90, 60, 30):
            params = SegmentationParams(intensity_threshold=t, red_threshold=255)
            masks.append(threshold_shadow(frame, params).as_array())
        for wider, narrower in zip(masks, masks[1:]):
            assert not (narrower & ~wider).any()


class TestLargestComponent:
    def test_two_blobs_picks_bigger(self):
        arr = np.zeros((20, 20), dtype=bool)
        arr[1:6, 1:11] = True   # 50 px
        arr[10:13, 1:11] = True  # 30 px
        params = SegmentationParams(connectivity=4)
        got = largest_component(BlobMask.from_array(arr), params).as_array()
        expected = largest_component_oracle(arr, 4, 0)
        assert {(y, x) for y, x in zip(*np.nonzero(got))} == expected
        assert got[2, 2] and not got[11, 2]

    def test_tie_breaks_to_smallest_min_row_min_col(self):
        arr = np.array(
            [
                [1, 1, 0, 0],
                [1, 0, 0, 1],
                [0, 0, 1, 1],
            ],
            dtype=bool,
        )
        params = SegmentationParams(connectivity=8)
        got = largest_component(BlobMask.from_array(arr), params).as_array()
        comps = {(y, x) for y, x in zip(*np.nonzero(got))}
        assert comps == {(0, 0), (0, 1), (1, 0)}
        assert comps == largest_component_oracle(arr, 8, 0)

    def test_empty_stays_empty(self):
        mask = BlobMask.empty(5, 5)
        params = SegmentationParams()
        assert largest_component(mask, params).count == 0

    def test_min_area_filters_everything(self):
        arr = np.zeros((5, 5), dtype=bool)
        arr[0, 0] = True
        params = SegmentationParams(min_area=2)
        assert largest_component(BlobMask.from_array(arr), params).count == 0

    @given(seed=st.integers(0, 2**32 - 1), connectivity=st.sampled_from([4, 8]))
    @settings(max_examples=60)
    def test_matches_flood_fill_oracle(self, seed, connectivity):
        rng = np.random.default_rng(seed)
        arr = random_mask(rng, max_side=24)
        params = SegmentationParams(connectivity=connectivity)
        got = largest_component(BlobMask.from_array(arr), params).as_array()
        expected = largest_component_oracle(arr, connectivity, 0)
        assert {(y, x) for y, x in zip(*np.nonzero(got))} == expected


class TestShapeStats:
    def test_square_10x10(self):
        arr = np.zeros((14, 14), dtype=bool)
        arr[2:12, 3:13] = True
        s = shape_stats(BlobMask.from_array(arr))
        assert s.area == 100
        assert (s.bbox_w, s.bbox_h) == (10, 10)
        assert s.aspect_ratio == 1.0
        assert s.mu20 == pytest.approx(8.25)
        assert s.mu02 == pytest.approx(8.25)
        assert s.mu11 == 0.0

    def test_rect_20x10(self):
        arr = np.zeros((20, 30), dtype=bool)
        arr[5:15, 4:24] = True
        s = shape_stats(BlobMask.from_array(arr))
        assert s.aspect_ratio == 2.0
        assert s.mu20 == pytest.approx(33.25)
        assert s.mu02 == pytest.approx(8.25)

    def test_empty_blob(self):
        s = shape_stats(BlobMask.empty(4, 4))
        assert s.empty
        assert s.area == 0 and s.lambda1 == 0 and s.aspect_ratio == 0

    def test_single_pixel(self):
        arr = np.zeros((5, 5), dtype=bool)
        arr[2, 3] = True
        s = shape_stats(BlobMask.from_array(arr))
        assert (s.bbox_w, s.bbox_h, s.aspect_ratio) == (1, 1, 1.0)
        assert s.mu20 == s.mu02 == s.mu11 == 0.0
        assert s.principal_angle == 0.0

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_matches_direct_summation_oracle(self, seed):
        rng = np.random.default_rng(seed)
        arr = random_mask(rng, max_side=64)
        if not arr.any():
            return
        s = shape_stats(BlobMask.from_array(arr))
        ref = moments_oracle(arr)
        assert s.area == ref["area"]
        assert s.bbox_w == ref["bbox_w"] and s.bbox_h == ref["bbox_h"]
        assert s.centroid[0] == pytest.approx(ref["centroid"][0], abs=1e-9)
        assert s.centroid[1] == pytest.approx(ref["centroid"][1], abs=1e-9)
        for key in ("mu20", "mu02", "mu11"):
            assert getattr(s, key) == pytest.approx(ref[key], abs=1e-9)

    def test_json_roundtrip(self):
        arr = np.zeros((6, 6), dtype=bool)
        arr[1:4, 2:6] = True
        s = shape_stats(BlobMask.from_array(arr))
        assert MouthShape.from_json(s.to_json()) == s
        assert set(s.to_json()) == {
            "area", "bbox_w", "bbox_h", "aspect_ratio", "centroid",
            "mu20", "mu02", "mu11", "principal_angle", "lambda1", "lambda2", "empty",
        }


class TestPrincipalAxes:
    def test_axis_aligned_rect(self):
        arr = np.zeros((20, 30), dtype=bool)
        arr[5:15, 4:24] = True
        s = shape_stats(BlobMask.from_array(arr))
        angle, lam1, lam2 = principal_axes(s)
        assert angle == 0.0
        assert lam1 == pytest.approx(33.25)
        assert lam2 == pytest.approx(8.25)

    def test_transposed_blob_angle_90(self):
        arr = np.zeros((30, 20), dtype=bool)
        arr[4:24, 5:15] = True  # the same rect with x/y swapped
        s = shape_stats(BlobMask.from_array(arr))
        angle, lam1, lam2 = principal_axes(s)
        assert angle == 90.0
        assert (lam1, lam2) == (pytest.approx(33.25), pytest.approx(8.25))

    def test_90_degree_grid_rotation_preserves_eigenvalues(self):
        rng = np.random.default_rng(9)
        arr = random_mask(rng, max_side=40)
        arr[0, 0] = True
        s = shape_stats(BlobMask.from_array(arr))
        rotated = shape_stats(BlobMask.from_array(np.rot90(arr)))
        assert rotated.lambda1 == pytest.approx(s.lambda1, abs=1e-9)
        assert rotated.lambda2 == pytest.approx(s.lambda2, abs=1e-9)

    def test_matches_eigensolver_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            arr = random_mask(rng, max_side=32)
            if not arr.any():
                continue
            s = shape_stats(BlobMask.from_array(arr))
            lam1, lam2 = eigenvalues_oracle(s.mu20, s.mu02, s.mu11)
            assert s.lambda1 == pytest.approx(lam1, abs=1e-9)
            assert s.lambda2 == pytest.approx(lam2, abs=1e-9)

    def test_trace_and_determinant_identities(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            arr = random_mask(rng, max_side=32)
            if not arr.any():
                continue
            s = shape_stats(BlobMask.from_array(arr))
            assert s.lambda1 + s.lambda2 == pytest.approx(s.mu20 + s.mu02, rel=1e-12, abs=1e-12)
            assert s.lambda1 * s.lambda2 == pytest.approx(
                s.mu20 * s.mu02 - s.mu11**2, rel=1e-9, abs=1e-9
            )
            assert s.lambda1 >= s.lambda2 >= -1e-12

    def test_empty_shape_rejected(self):
        with pytest.raises(ValueError):
            principal_axes(MouthShape())

    def test_isotropic_angle_zero(self):
        arr = np.zeros((8, 8), dtype=bool)
        arr[2:6, 2:6] = True
        s = shape_stats(BlobMask.from_array(arr))
        assert s.principal_angle == 0.0


class TestInvariance:
    @given(
        seed=st.integers(0, 2**32 - 1),
        dx=st.integers(0, 20),
        dy=st.integers(0, 20),
    )
    @settings(max_examples=40)
    def test_translation_invariance_exact(self, seed, dx, dy):
        rng = np.random.default_rng(seed)
        arr = random_mask(rng, max_side=24)
        if not arr.any():
            return
        h, w = arr.shape
        canvas = np.zeros((h + 25, w + 25), dtype=bool)
        canvas[0:h, 0:w] = arr
        shifted = np.zeros_like(canvas)
        shifted[dy : dy + h, dx : dx + w] = arr
        a = shape_stats(BlobMask.from_array(canvas))
        b = shape_stats(BlobMask.from_array(shifted))
        # bitwise-stable under integer translation
        for key in ("area", "bbox_w", "bbox_h", "aspect_ratio", "mu20", "mu02", "mu11",
                    "lambda1", "lambda2", "principal_angle"):
            assert getattr(a, key) == getattr(b, key)
        assert b.centroid[0] == pytest.approx(a.centroid[0] + dx, abs=1e-9)
        assert b.centroid[1] == pytest.approx(a.centroid[1] + dy, abs=1e-9)

    def test_near_continuous_rotation_of_dense_blob(self):
        # Rasterized 40x30 ellipse (semi-axes), rotated through 0..180 deg.
        lam1s, lam2s = [], []
        for deg in range(0, 181, 10):
            theta = math.radians(deg)
            size = 120
            ys, xs = np.mgrid[0:size, 0:size]
            cx = cy = (size - 1) / 2.0
            xr = (xs - cx) * math.cos(theta) + (ys - cy) * math.sin(theta)
            yr = -(xs - cx) * math.sin(theta) + (ys - cy) * math.cos(theta)
            arr = (xr / 40.0) ** 2 + (yr / 30.0) ** 2 <= 1.0
            s = shape_stats(BlobMask.from_array(arr))
            lam1s.append(s.lambda1)
            lam2s.append(s.lambda2)
        assert (max(lam1s) - min(lam1s)) / min(lam1s) < 0.03
        assert (max(lam2s) - min(lam2s)) / min(lam2s) < 0.03
