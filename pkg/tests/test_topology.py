import math

import pytest

from knotfield.geometry import LatticeKnot, canonical_figure_eight, canonical_trefoil, refine
from knotfield.topology import (
    LinkingPrecisionError,
    Loop,
    LoopOnConductorError,
    holonomy,
    linking_number,
    loop_clearance,
    parse_loop_text,
    read_loop_file,
    verify_flat_connection,
    write_loop_file,
)

FOUR_PI = 4.0 * math.pi


def paper_loop():
    return Loop(vertices=((5, 3, 2), (7, 3, 2), (7, 5, 2), (5, 5, 2)), name="paper")


def hopf_pair():
    """Square unknot in the z=0 plane, CCW about +z, and a tall rectangle
    carrying current +z through its center (a long-wire stand-in)."""
    square = Loop(vertices=((2, -2, 0), (2, 2, 0), (-2, 2, 0), (-2, -2, 0)), name="sq")
    wire = LatticeKnot(
        vertices=((0, 0, -1000), (0, 0, 1000), (1000, 0, 1000), (1000, 0, -1000)),
        name="tall-rectangle",
    )
    return wire, square


class TestLoop:
    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            Loop(vertices=((0, 0, 0), (1, 0, 0)))

    def test_coincident_consecutive_vertices(self):
        with pytest.raises(ValueError):
            Loop(vertices=((0, 0, 0), (0, 0, 0), (1, 0, 0)))

    def test_real_coordinates_allowed(self):
        Loop(vertices=((0.5, 0.25, -1.75), (1.5, 0.25, -1.75), (1.5, 1.25, -1.75)))


class TestHolonomy:
    def test_paper_loop_value(self):
        # The loop encloses only the z-stick at (x, y) = (6, 4), which carries
        # current in -z; counterclockwise circulation about +z gives -4*pi*k.
        res = holonomy(canonical_trefoil(), paper_loop(), tol=1e-6)
        assert abs(res.value + FOUR_PI) < 1e-6 * FOUR_PI
        assert res.inferred_linking == -1
        assert abs(res.residual) < 1e-6
        assert res.edges_evaluated == 4
        assert res.estimated_error < 1e-5

    def test_far_loop_is_zero(self):
        far = Loop(vertices=((0, 0, 100), (4, 0, 100), (4, 4, 100), (0, 4, 100)))
        res = holonomy(canonical_trefoil(), far, tol=1e-7)
        assert abs(res.value) < 1e-6
        assert res.inferred_linking == 0

    def test_double_traversal_doubles(self):
        single = holonomy(canonical_trefoil(), paper_loop(), tol=1e-8)
        doubled = Loop(vertices=paper_loop().vertices * 2, name="twice")
        double = holonomy(canonical_trefoil(), doubled, tol=1e-8)
        assert abs(double.value - 2.0 * single.value) < 1e-6
        assert double.inferred_linking == -2

    def test_reversal_negates(self):
        res = holonomy(canonical_trefoil(), paper_loop(), tol=1e-8)
        rev = holonomy(canonical_trefoil(), paper_loop().reversed(), tol=1e-8)
        assert abs(res.value + rev.value) < 1e-7

    def test_additivity_of_concatenation(self):
        # Two rectangles sharing the basepoint (5,3,2), concatenated into one
        # loop, integrate to the sum of the parts.
        a = Loop(vertices=((5, 3, 2), (7, 3, 2), (7, 5, 2), (5, 5, 2)), name="a")
        b = Loop(vertices=((5, 3, 2), (5, 3, 4), (5, 1, 4), (5, 1, 2)), name="b")
        both = Loop(vertices=a.vertices + b.vertices, name="a+b")
        knot = canonical_trefoil()
        ha = holonomy(knot, a, tol=1e-8).value
        hb = holonomy(knot, b, tol=1e-8).value
        hab = holonomy(knot, both, tol=1e-8).value
        assert abs(hab - (ha + hb)) < 2e-7

    def test_translate_with_same_linking_matches(self):
        knot = canonical_trefoil()
        base = paper_loop()
        moved = base.translated((0.0, 0.0, -0.75))
        assert linking_number(knot, base) == linking_number(knot, moved)
        h1 = holonomy(knot, base, tol=1e-8).value
        h2 = holonomy(knot, moved, tol=1e-8).value
        assert abs(h1 - h2) < 2e-7

    def test_scale_invariance_under_refine(self):
        knot = canonical_trefoil()
        big = refine(knot, 2)
        h1 = holonomy(knot, paper_loop(), tol=1e-8).value
        h2 = holonomy(big, paper_loop().scaled(2), tol=1e-8).value
        assert abs(h1 - h2) < 2e-7

    def test_k_prefactor_scales_value(self):
        res = holonomy(canonical_trefoil(k=2.5), paper_loop(), tol=1e-6)
        assert abs(res.value + 2.5 * FOUR_PI) < 1e-5
        assert res.inferred_linking == -1

    def test_loop_touching_conductor(self):
        bad = Loop(vertices=((2, 2, 3), (7, 3, 2), (7, 5, 2), (5, 5, 2)))
        with pytest.raises(LoopOnConductorError) as err:
            holonomy(canonical_trefoil(), bad)
        assert err.value.segment_index == 1
        assert err.value.loop_edge in (0, 3)

    def test_clearance_of_paper_loop(self):
        clear, _ = loop_clearance(canonical_trefoil(), paper_loop())
        assert abs(clear - 1.0) < 1e-12

    def test_unreachable_tolerance_raises(self):
        from knotfield.biot_savart import QuadratureError
        with pytest.raises(QuadratureError):
            holonomy(canonical_trefoil(), paper_loop(), tol=1e-14, max_levels=1)


class TestLinkingNumber:
    def test_paper_loop(self):
        assert linking_number(canonical_trefoil(), paper_loop()) == -1

    def test_hopf_pair(self):
        wire, square = hopf_pair()
        assert linking_number(wire, square) == 1
        assert linking_number(wire, square.reversed()) == -1

    def test_hopf_holonomy_sign_anchor(self):
        # Ampere by hand: +z current through a CCW loop gives +4*pi*k.
        wire, square = hopf_pair()
        res = holonomy(wire, square, tol=1e-6)
        assert abs(res.value - FOUR_PI) < 1e-4
        assert res.inferred_linking == 1

    def test_disjoint_far_loops(self):
        far = Loop(vertices=((50, 50, 50), (54, 50, 50), (54, 54, 50), (50, 54, 50)))
        assert linking_number(canonical_trefoil(), far) == 0

    def test_figure_eight_loop_around_4_6_stick(self):
        loop = Loop(vertices=((3, 5, 2), (5, 5, 2), (5, 7, 2), (3, 7, 2)), name="around-46")
        knot = canonical_figure_eight()
        assert abs(linking_number(knot, loop)) == 1

    def test_unconverged_raises(self):
        with pytest.raises(LinkingPrecisionError):
            linking_number(canonical_trefoil(), paper_loop(), tol=1e-12, max_level=0)

    def test_loop_crossing_conductor_rejected(self):
        bad = Loop(vertices=((2, 2, 3), (7, 3, 2), (7, 5, 2), (5, 5, 2)))
        with pytest.raises(LoopOnConductorError):
            linking_number(canonical_trefoil(), bad)


class TestVerifyFlatConnection:
    def test_trefoil_report(self):
        knot = canonical_trefoil()
        far = Loop(vertices=((0, 0, 100), (4, 0, 100), (4, 4, 100), (0, 4, 100)),
                   name="far")
        report = verify_flat_connection(knot, [paper_loop(), far], tol=1e-5)
        assert report.passed
        assert len(report.checks) == 2
        by_name = {c.loop_name: c for c in report.checks}
        assert by_name["paper"].linking == -1
        assert by_name["far"].linking == 0
        assert abs(by_name["paper"].expected + FOUR_PI) < 1e-12

    def test_figure_eight_passes(self):
        loop = Loop(vertices=((3, 5, 2), (5, 5, 2), (5, 7, 2), (3, 7, 2)), name="l46")
        report = verify_flat_connection(canonical_figure_eight(), [loop], tol=1e-5)
        assert report.passed
        assert abs(report.checks[0].linking) == 1


class TestLoopFiles:
    def test_round_trip(self, tmp_path):
        loop = Loop(vertices=((0.5, 0.25, -1.75), (1.5, 0.25, -1.75), (1.5, 1.25, -1.75)),
                    name="frac")
        path = tmp_path / "loop.txt"
        write_loop_file(loop, path, header_comments=("loop",))
        back = read_loop_file(path, name="frac")
        assert back == loop

    def test_parse_real_coordinates(self):
        loop = parse_loop_text("5 3 2\n7.5 3 2\n# c\n7.5 5 2\n")
        assert loop.vertices == ((5.0, 3.0, 2.0), (7.5, 3.0, 2.0), (7.5, 5.0, 2.0))
