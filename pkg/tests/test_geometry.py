import numpy as np
import pytest
from hypothesis import given, strategies as st

from starcurl.geometry import (
    StarDomain,
    ball,
    box,
    boundary_distance,
    contains,
    domain_spec_string,
    ellipsoid,
    normalize_domain,
    parse_domain,
    radial_from_function,
    radial_gap,
    ray_segments,
    sample_directions,
    sample_interior,
    validate_star_shape,
)
from starcurl.geometry import load_radial_table, save_radial_table

_shapes = [ball(2.0), ellipsoid(2.0, 2.5, 3.0), box(1.5, 1.5, 1.5)]


def test_contains_anchor_points():
    assert contains(ball(2.0), np.zeros(3))
    assert not contains(ball(2.0), np.array([2.0, 0.0, 0.0]))
    assert contains(box(1.5, 1.5, 1.5), np.array([1.4, 1.4, 1.4]))


def test_contains_vectorized(rng):
    dom = ellipsoid(2.0, 2.5, 3.0)
    x = rng.uniform(-3.5, 3.5, size=(200, 3))
    flags = contains(dom, x)
    q = (x[:, 0] / 2.0) ** 2 + (x[:, 1] / 2.5) ** 2 + (x[:, 2] / 3.0) ** 2
    assert np.array_equal(flags, q < 1.0)


def test_scalar_descriptors():
    assert ball(2.0).diameter == 4.0
    assert ellipsoid(2.0, 2.5, 3.0).circumradius == 3.0
    assert ellipsoid(2.0, 2.5, 3.0).inradius == 2.0
    assert box(1.5, 2.0, 2.5).inradius == 1.5
    assert box(1.5, 1.5, 1.5).circumradius == pytest.approx(1.5 * np.sqrt(3.0))


def test_scaled_domain():
    dom = ball(2.0).scaled(1.5)
    assert dom.circumradius == 3.0
    with pytest.raises(ValueError):
        ball(2.0).scaled(-1.0)


@pytest.mark.parametrize(
    "ctor",
    [
        lambda: ball(1.0),
        lambda: ball(0.5),
        lambda: ellipsoid(1.0, 2.0, 2.0),
        lambda: box(0.8, 2.0, 2.0),
        lambda: StarDomain("pentagon"),
    ],
)
def test_unit_ball_containment_enforced(ctor):
    with pytest.raises(ValueError):
        ctor()


def test_ray_segments_anchors():
    seg = ray_segments(ball(2.0), np.zeros(3), np.array([1.0, 0.0, 0.0]), 5.0)
    assert len(seg.segments) == 1
    lo, hi = seg.segments[0]
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert hi == pytest.approx(2.0, abs=1e-12)

    seg = ray_segments(ball(2.0), np.array([3.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]), 10.0)
    (interval,) = seg.segments
    assert interval[0] == pytest.approx(1.0, abs=1e-12)
    assert interval[1] == pytest.approx(5.0, abs=1e-12)

    seg = ray_segments(ellipsoid(2.0, 3.0, 4.0), np.zeros(3), np.array([0.0, 0.0, 1.0]), 10.0)
    (interval,) = seg.segments
    assert interval[1] == pytest.approx(4.0, abs=1e-12)


def test_ray_segments_rejects_non_unit_direction():
    with pytest.raises(ValueError):
        ray_segments(ball(2.0), np.zeros(3), np.array([1.0, 1.0, 0.0]), 5.0)


@pytest.mark.parametrize("dom", _shapes)
def test_ray_segment_membership(dom, rng):
    # segment midpoints inside, gap midpoints outside
    for _ in range(1000):
        x = rng.uniform(-4.0, 4.0, size=3)
        u = sample_directions(1, rng)[0]
        t_max = rng.uniform(0.5, 8.0)
        seg = ray_segments(dom, x, u, t_max)
        prev = 0.0
        for lo, hi in seg.segments:
            if lo - prev > 1e-9:
                gap_mid = x + 0.5 * (prev + lo) * u
                assert not contains(dom, gap_mid)
            if hi - lo > 1e-9:
                mid = x + 0.5 * (lo + hi) * u
                assert contains(dom, mid)
            prev = hi


def test_ray_segment_membership_radial(rng):
    dom = radial_from_function(lambda u: 1.5 + 0.3 * u[..., 2] ** 2)
    for _ in range(200):
        x = rng.uniform(-3.0, 3.0, size=3)
        u = sample_directions(1, rng)[0]
        seg = ray_segments(dom, x, u, 6.0)
        for lo, hi in seg.segments:
            if hi - lo > 1e-6:
                assert contains(dom, x + 0.5 * (lo + hi) * u)


@pytest.mark.parametrize("dom", _shapes)
def test_validate_star_shape_convex(dom):
    violations, witnesses = validate_star_shape(dom, n_samples=10_000, seed=0)
    assert violations == 0
    assert witnesses == []


def test_validate_star_shape_flags_sharp_spike():
    spike = radial_from_function(
        lambda u: 1.2 + 1.5 * np.maximum(0.0, u[..., 2]) ** 40,
        n_polar=64,
        n_azimuth=128,
    )
    violations, witnesses = validate_star_shape(spike, n_samples=10_000, seed=0)
    assert violations > 0
    b, z, t = witnesses[0]
    assert not contains(spike, b + t * (z - b))


def test_boundary_distance_directional():
    dom = ellipsoid(2.0, 2.5, 3.0)
    assert boundary_distance(dom, np.array([1.0, 0.0, 0.0])) == pytest.approx(2.0)
    assert boundary_distance(dom, np.array([0.0, 0.0, 1.0])) == pytest.approx(3.0)


def test_radial_gap_anchor():
    dom = ball(2.0)
    assert radial_gap(dom, np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)
    pts = np.array([[0.5, 0.0, 0.0], [0.0, 1.9, 0.0]])
    gaps = radial_gap(dom, pts)
    assert gaps == pytest.approx([1.5, 0.1])


@pytest.mark.parametrize(
    "spec",
    ["ball:R0=2", "ellipsoid:a=2,b=2.5,c=3", "box:h=1.5,1.5,1.5"],
)
def test_domain_spec_round_trip(spec):
    dom = parse_domain(spec)
    again = parse_domain(domain_spec_string(dom))
    assert again.kind == dom.kind
    assert again.params == dom.params


@pytest.mark.parametrize("bad", ["sphere:R0=2", "ball:radius=2", "box:h=1.5,1.5", "ball"])
def test_domain_spec_rejects(bad):
    with pytest.raises(ValueError):
        parse_domain(bad)


def test_radial_table_file_round_trip(tmp_path):
    dom = radial_from_function(lambda u: 1.5 + 0.2 * u[..., 0] ** 2)
    path = tmp_path / "table.csv"
    save_radial_table(dom, str(path))
    back = load_radial_table(str(path))
    assert np.allclose(back.table[2], dom.table[2], rtol=0.0, atol=0.0)
    via_spec = parse_domain(f"radial:file={path}")
    assert np.allclose(via_spec.table[2], dom.table[2])


def test_sample_interior_margin(rng):
    dom = ball(2.0)
    pts = sample_interior(dom, 500, rng, margin=0.3)
    assert np.all(contains(dom, pts))
    assert np.min(radial_gap(dom, pts)) >= 0.3 - 1e-12


def test_sample_directions_unit(rng):
    u = sample_directions(300, rng)
    assert np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0)) < 1e-12


def test_normalize_domain_identity():
    nrm = normalize_domain(np.zeros(3), 1.0, ball(2.0))
    x = np.array([0.3, -0.2, 0.7])
    assert np.allclose(nrm.forward(x), x)
    assert nrm.image.kind == "ball"
    assert nrm.image.params == (2.0,)


def test_normalize_domain_off_center_ball():
    nrm = normalize_domain(np.array([1.0, 0.0, 0.0]), 2.0, ball(4.0))
    assert nrm.image.params == (2.0,)
    x = np.array([0.4, 1.1, -0.6])
    assert np.allclose(nrm.inverse(nrm.forward(x)), x, atol=1e-14)


def test_normalize_domain_field_rule():
    nrm = normalize_domain(np.array([1.0, 0.0, 0.0]), 2.0, ball(4.0))
    g = lambda x: np.stack([x[..., 1], x[..., 2], x[..., 0]], axis=-1)
    g_hat = nrm.transform_field(g)
    x_hat = np.array([0.25, 0.5, -0.1])
    assert np.allclose(g_hat(x_hat), 2.0 * g(nrm.inverse(x_hat)))


def test_normalize_domain_rejections():
    with pytest.raises(ValueError):
        normalize_domain(np.zeros(3), -1.0, ball(2.0))
    with pytest.raises(ValueError):
        normalize_domain(np.zeros(3), 3.0, ball(2.0))


@given(st.floats(min_value=1.1, max_value=6.0), st.floats(min_value=0.5, max_value=3.0))
def test_scaling_scales_circumradius(r0, factor):
    dom = ball(r0)
    if factor * r0 <= 1.0:
        with pytest.raises(ValueError):
            dom.scaled(factor)
    else:
        assert dom.scaled(factor).circumradius == pytest.approx(factor * r0)
