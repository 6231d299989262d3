import math

import numpy as np
import pytest

from convlab.errors import DiscEscapesDomain, InvalidParam
from convlab.geometry import (
    AffineFiberMap,
    AnalyticDisc,
    Ball,
    Domain,
    Intersection,
    Union,
    ball_domain,
    bidisc,
    boundary_distance,
    box_domain,
    disc_distance_check,
    disc_region,
    domain_from_json,
    domain_to_json,
    dumbbell,
    fiber,
    fiber_distance,
    full_space,
    hartogs_figure,
    midpoint_closure_check,
    punctured_ball,
)


def vesica() -> Domain:
    """Union of two unit discs centered at (-1/2, 0) and (1/2, 0)."""
    return Domain(
        Union(parts=(
            Ball(center=(-0.5, 0.0), radius=1.0, axes=(0, 1)),
            Ball(center=(0.5, 0.0), radius=1.0, axes=(0, 1)),
        )),
        (0, 2),
        "real",
    )


class TestBoundaryDistance:
    def test_ball_is_exact(self):
        info = boundary_distance(ball_domain(split=(0, 2), radius=1.0), (0.3, 0.0))
        assert info.exact
        np.testing.assert_allclose(info.value, 0.7, rtol=1e-15)
        assert info.bracket == 0.0

    def test_box(self):
        dom = box_domain((0.0, 0.0), (2.0, 1.0), split=(0, 2))
        info = boundary_distance(dom, (0.5, 0.4))
        np.testing.assert_allclose(info.value, 0.4, rtol=1e-15)

    def test_union_of_discs(self):
        # From the center the nearest boundary points of the union are the
        # two lens corners at height +-sqrt(3)/2, not either circle alone.
        info = boundary_distance(vesica(), (0.0, 0.0))
        np.testing.assert_allclose(info.value, math.sqrt(3.0) / 2.0, rtol=1e-12)
        assert not info.exact
        assert info.bracket >= 0.0

    def test_puncture_counts(self):
        pb = punctured_ball(split=(0, 2), radius=1.0)
        np.testing.assert_allclose(
            boundary_distance(pb, (0.1, 0.0)).value, 0.1, rtol=1e-12
        )
        np.testing.assert_allclose(
            boundary_distance(pb, (0.8, 0.0)).value, 0.2, rtol=1e-12
        )


class TestFiberSlices:
    def test_bidisc_fiber_is_a_disc(self):
        fd = fiber(bidisc(), (0.0, 0.0))
        assert isinstance(fd.node, Ball)
        assert fd.node.radius == 1.0

    def test_hartogs_fibers_change_shape(self):
        hf = hartogs_figure(inner=0.5)
        assert isinstance(fiber(hf, (0.8, 0.0)).node, Ball)
        assert isinstance(fiber(hf, (0.2, 0.0)).node, Intersection)

    def test_fiber_distance_on_the_bidisc(self):
        np.testing.assert_allclose(
            fiber_distance(bidisc(), (0.0, 0.0), (0.3, 0.0)), 0.7, rtol=1e-15
        )

    def test_dumbbell_neck_halfwidth(self):
        dom = dumbbell(bulge=0.3, neck=0.02)
        np.testing.assert_allclose(fiber_distance(dom, (0.0,), (0.0,)), 0.02)


class TestMidpointClosure:
    def test_dumbbell_drops_the_midpoint(self):
        rep = midpoint_closure_check(dumbbell(bulge=0.3, neck=0.02), (-1.0, 0.25), (1.0, 0.25))
        assert rep.midpoint == (0.0, 0.25)
        assert not rep.in_closure

    def test_round_domain_keeps_it(self):
        rep = midpoint_closure_check(ball_domain(split=(1, 1), radius=1.2), (-0.5, 0.2), (0.5, 0.2))
        assert rep.in_closure

    def test_puncture_is_invisible_in_the_closure(self):
        rep = midpoint_closure_check(punctured_ball(split=(1, 1), radius=1.0), (-0.5, 0.0), (0.5, 0.0))
        assert rep.midpoint == (0.0, 0.0)
        assert rep.in_closure


class TestAffineFiberMap:
    def test_through_two_points(self):
        a = AffineFiberMap.through(0.0, 0.0, 1.0, 1.0)
        np.testing.assert_allclose(a.at((0.3,)), [0.3])
        assert a.base_rdim == 1 and a.fiber_rdim == 1

    def test_constant(self):
        c = AffineFiberMap.constant(0.7, base_rdim=1)
        np.testing.assert_allclose(c.at((9.9,)), [0.7])

    def test_complex_affine_packs_reals(self):
        a = AffineFiberMap.complex_affine(0.2 + 0.1j, slope=0.5)
        np.testing.assert_allclose(a.at((1.0, 0.0)), [0.7, 0.1])
        # multiplication by i rotates
        rot = AffineFiberMap.complex_affine(0.0, slope=1j)
        np.testing.assert_allclose(rot.at((1.0, 0.0)), [0.0, 1.0], atol=1e-15)

    def test_dimension_guard(self):
        a = AffineFiberMap.through(0.0, 0.0, 1.0, 1.0)
        with pytest.raises(InvalidParam):
            a.at((0.1, 0.2))

    def test_coincident_points_rejected(self):
        with pytest.raises(InvalidParam):
            AffineFiberMap.through(0.0, 0.0, 0.0, 1.0)


class TestAnalyticDisc:
    def test_polynomial_evaluation(self):
        d = AnalyticDisc(base=(0.0, 0.5), fibers=((0.0, 0.0, 0.5),))
        assert d.base_at(1.0 + 0j) == 0.5 + 0j
        assert d.fiber_at(2.0 + 0j) == [2.0 + 0j]
        np.testing.assert_allclose(d.eval_real(1.0 + 0j), [0.5, 0.0, 0.5, 0.0])

    def test_base_constant_flag(self):
        assert AnalyticDisc(base=(0.3,), fibers=((0.0, 1.0),)).is_base_constant()
        assert not AnalyticDisc(base=(0.0, 1.0), fibers=((0.5,),)).is_base_constant()

    def test_fiber_count(self):
        d = AnalyticDisc(base=(0.0, 1.0), fibers=((0.1,), (0.0, 0.2)))
        assert d.n_fiber == 2


class TestDiscDistance:
    def test_graph_disc_on_the_bidisc(self):
        d = AnalyticDisc(base=(0.0, 0.5), fibers=((0.0, 0.0, 0.5),))
        rep = disc_distance_check(bidisc(), d, n_interior=4000, n_boundary=128)
        assert abs(rep.gap) <= 5e-3
        assert rep.gap == rep.d_disc - rep.d_boundary

    def test_constant_fiber_gap_is_zero(self):
        d = AnalyticDisc(base=(0.0, 0.5), fibers=((0.25,),))
        rep = disc_distance_check(bidisc(), d, n_interior=2000, n_boundary=64)
        assert rep.gap == 0.0

    def test_escaping_disc_is_rejected(self):
        d = AnalyticDisc(base=(0.0, 1.0), fibers=((1.2,),))
        with pytest.raises(DiscEscapesDomain):
            disc_distance_check(bidisc(), d, n_interior=100, n_boundary=16)


class TestDomainJson:
    @pytest.mark.parametrize(
        "dom",
        [
            ball_domain(split=(1, 1), radius=0.7),
            box_domain((0.0,), (1.0,), split=(0, 1)),
            full_space(split=(0, 2)),
            punctured_ball(split=(0, 2)),
            bidisc(),
            hartogs_figure(0.5),
            dumbbell(),
            disc_region(2.0, center=1.0 + 0.5j),
        ],
    )
    def test_round_trip(self, dom):
        assert domain_from_json(domain_to_json(dom)) == dom

    def test_custom_csg_round_trip(self):
        dom = vesica()
        assert domain_from_json(domain_to_json(dom)) == dom

    @pytest.mark.parametrize("text", ["not json", "{}", '{"csg": 1, "bogus": 2}'])
    def test_bad_descriptors(self, text):
        with pytest.raises(InvalidParam):
            domain_from_json(text)
