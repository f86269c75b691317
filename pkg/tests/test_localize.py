import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actioncrop.exceptions import NoInteriorC3
from actioncrop.localize import (
    LocalizeParams,
    box_area,
    box_center,
    boxes_overlap,
    grow_to_min_area,
    localize_frame,
    select_candidates,
)
from actioncrop.motionseg import C3


def make_c3(bbox, sat, cluster_id=0, border=False):
    left, top, right, bottom = bbox
    xs, ys = np.meshgrid(np.arange(left, right + 1), np.arange(top, bottom + 1))
    pixels = np.stack([xs.ravel(), ys.ravel()], axis=1)
    return C3(cluster_id, pixels, tuple(bbox), sat, border)


def test_select_candidates_ordering():
    c3s = [make_c3((0, 0, 4, 4), s, i) for i, s in enumerate([0.5, 0.9, 0.2])]
    top, second = select_candidates(c3s)
    assert top.avg_saturation == 0.9 and second.avg_saturation == 0.5


def test_select_single_candidate():
    top, second = select_candidates([make_c3((1, 1, 3, 3), 0.4)])
    assert top.avg_saturation == 0.4 and second is None


def test_select_skips_border_components():
    c3s = [make_c3((0, 0, 9, 9), 0.99, border=True), make_c3((20, 20, 25, 25), 0.1)]
    top, second = select_candidates(c3s)
    assert top.avg_saturation == 0.1 and second is None
    with pytest.raises(NoInteriorC3):
        select_candidates([make_c3((0, 0, 9, 9), 0.99, border=True)])
    with pytest.raises(NoInteriorC3):
        select_candidates([])


def test_select_ties_prefer_larger_then_smaller_id():
    small = make_c3((0, 0, 2, 2), 0.5, cluster_id=0)
    big = make_c3((10, 10, 19, 19), 0.5, cluster_id=3)
    twin = make_c3((30, 30, 39, 39), 0.5, cluster_id=1)
    top, second = select_candidates([small, big, twin])
    assert top is twin and second is big


def test_grow_noop_when_large_enough():
    assert grow_to_min_area((10, 10, 49, 49), 1600, (100, 100)) == (10, 10, 49, 49)


def test_grow_centred_box():
    # (10 + 2m)^2 >= 900  ->  m = 10
    grown = grow_to_min_area((45, 45, 54, 54), 900, (100, 100))
    assert grown == (35, 35, 64, 64)
    assert box_center(grown) == box_center((45, 45, 54, 54))


def test_grow_corner_box_pushed_inward():
    grown = grow_to_min_area((0, 0, 9, 9), 900, (100, 100))
    assert grown == (0, 0, 29, 29)


def test_grow_redistributes_when_dimension_saturates():
    # frame only 20 tall: height caps at 20, width grows to cover the area
    grown = grow_to_min_area((40, 5, 49, 14), 800, (100, 20))
    w, h = grown[2] - grown[0] + 1, grown[3] - grown[1] + 1
    assert h == 20 and w * h >= 800
    assert grown[0] >= 0 and grown[2] <= 99 and grown[1] >= 0 and grown[3] <= 19


@settings(max_examples=200, deadline=None)
@given(
    st.integers(16, 120), st.integers(16, 120), st.data(), st.floats(0.05, 0.9),
)
def test_grow_properties(fw, fh, data, frac):
    left = data.draw(st.integers(0, fw - 1))
    top = data.draw(st.integers(0, fh - 1))
    right = data.draw(st.integers(left, fw - 1))
    bottom = data.draw(st.integers(top, fh - 1))
    a_min = frac * fw * fh
    grown = grow_to_min_area((left, top, right, bottom), a_min, (fw, fh))
    assert box_area(grown) >= a_min - 1e-9
    assert grown[0] >= 0 and grown[1] >= 0 and grown[2] <= fw - 1 and grown[3] <= fh - 1
    assert grown[0] <= left and grown[1] <= top and grown[2] >= right and grown[3] >= bottom


def test_overlap_requires_positive_area():
    assert boxes_overlap((0, 0, 9, 9), (9, 9, 12, 12))
    assert not boxes_overlap((0, 0, 9, 9), (10, 0, 12, 9))


def test_localize_grows_then_squares():
    # 40x60 box centred in 200x200, A_min = 10000:
    # (40 + 2m)(60 + 2m) >= 10000 -> m = 26 -> 92 x 112 -> square side 112
    c3 = make_c3((80, 70, 119, 129), 0.8)
    patch = localize_frame([c3], LocalizeParams(0.25), (200, 200), t=4)
    assert patch.d == 112 and patch.d >= 100
    assert (patch.x, patch.y) == (100.0, 100.0)
    assert patch.t == 4 and not patch.low_confidence


def test_localize_large_box_unchanged():
    c3 = make_c3((40, 40, 159, 159), 0.8)
    patch = localize_frame([c3], LocalizeParams(0.25), (200, 200))
    assert (patch.x, patch.y, patch.d) == (100.0, 100.0, 120.0)


def test_localize_fallback():
    patch = localize_frame([], LocalizeParams(0.25), (112, 112))
    assert patch.d == pytest.approx(56.0)
    assert (patch.x, patch.y) == (56.0, 56.0)
    assert patch.low_confidence


def test_localize_merges_overlapping_second():
    top = make_c3((90, 90, 99, 99), 0.9, 0)
    second = make_c3((110, 80, 119, 89), 0.5, 1)  # overlaps top's grown box
    far = make_c3((10, 10, 19, 19), 0.5, 1)
    a_min = 0.05 * 200 * 200  # 2000 -> top grows to 46x46
    merged = localize_frame([top, second], LocalizeParams(0.05), (200, 200))
    alone = localize_frame([top, far], LocalizeParams(0.05), (200, 200))
    assert alone.d == math.ceil(math.sqrt(a_min) / 2 - 5) * 2 + 10
    # union of raw boxes is 30x20, re-grown to area >= 2000
    assert merged.d >= alone.d
    assert merged.x - merged.d / 2 <= 90 and merged.x + merged.d / 2 >= 120


def test_localize_caps_at_short_side():
    # 150 wide in a 200x100 frame: capped to 100 and kept over the top C3 centre
    c3 = make_c3((20, 10, 169, 89), 0.9)
    patch = localize_frame([c3], LocalizeParams(0.25), (200, 100))
    assert patch.d == 100
    assert patch.x - 50 >= 0 and patch.x + 50 <= 200


boxes = st.tuples(st.integers(0, 150), st.integers(0, 90), st.integers(1, 60), st.integers(1, 60))


def _c3_from(spec, sat, cid, fw=200, fh=120):
    x, y, w, h = spec
    right, bottom = min(x + w - 1, fw - 1), min(y + h - 1, fh - 1)
    border = x == 0 or y == 0 or right == fw - 1 or bottom == fh - 1
    return make_c3((x, y, right, bottom), sat, cid, border)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.tuples(boxes, st.floats(0, 1)), min_size=0, max_size=4),
    st.floats(0.05, 0.9),
    st.floats(0.05, 0.9),
)
def test_localize_invariants(specs, f1, f2):
    fw, fh = 200, 120
    c3s = [_c3_from(b, s, i) for i, (b, s) in enumerate(specs)]
    lo, hi = sorted((f1, f2))
    p_lo = localize_frame(c3s, LocalizeParams(lo), (fw, fh))
    p_hi = localize_frame(c3s, LocalizeParams(hi), (fw, fh))
    for p in (p_lo, p_hi):
        assert 0 < p.d <= min(fw, fh)
        assert p.x - p.d / 2 >= -1e-9 and p.x + p.d / 2 <= fw + 1e-9
        assert p.y - p.d / 2 >= -1e-9 and p.y + p.d / 2 <= fh + 1e-9
        try:
            top, _ = select_candidates(c3s)
        except NoInteriorC3:
            assert p.low_confidence
            continue
        cx, cy = box_center(top.bbox)
        assert abs(cx - p.x) <= p.d / 2 and abs(cy - p.y) <= p.d / 2
    assert p_hi.d >= p_lo.d
    assert localize_frame(c3s, LocalizeParams(lo), (fw, fh)) == p_lo


def test_merge_does_not_shrink_patch_as_a_min_grows():
    # a tall sliver whose grown box reaches a 1-px region only at the larger A_min;
    # the merged union alone is squarer than the grown sliver
    c3s = [make_c3((1, 1, 1, 1), 0.0, 0), make_c3((33, 1, 33, 37), 0.0, 1)]
    lo = localize_frame(c3s, LocalizeParams(0.25), (200, 120))
    hi = localize_frame(c3s, LocalizeParams(0.375), (200, 120))
    assert lo.d == 99
    assert hi.d >= lo.d
