import csv
import io
import json
import math

import pytest
from django.test import SimpleTestCase

from codec.exceptions import InvalidTraceError
from codec.frame_codec import encode_intra_frame
from harness.switching import (
    InteractivityGraph,
    SwitchRecord,
    SwitchReport,
    SyntheticPictures,
    aimd_ladder,
    fig4_graph,
    graph_by_name,
    simulate_switch,
    static_cycle_graph,
)


class GraphTests(SimpleTestCase):
    def test_two_origins(self):
        graph = fig4_graph()
        self.assertFalse(graph.cyclic)
        self.assertEqual(graph.destinations, [(0, 1)])
        self.assertEqual(graph.origins((0, 1)), [(0, 0), (1, 0)])
        self.assertEqual(graph.nodes, [(0, 0), (0, 1), (1, 0)])

    def test_static_views_are_cyclic(self):
        graph = static_cycle_graph(3)
        self.assertTrue(graph.cyclic)
        self.assertEqual(graph.origins((1, 0)), [(0, 0), (2, 0)])
        self.assertEqual(len(graph.full_trace()), 4)

    def test_aimd_ladder(self):
        graph = aimd_ladder(27)
        self.assertFalse(graph.cyclic)
        self.assertEqual(graph.origins((1, 1)), [(0, 0), (1, 0), (2, 0)])
        self.assertEqual([graph.qp(s, 0) for s in range(3)], [21, 27, 28])
        self.assertEqual(graph.qp(5, 30), 30)

    def test_edges_are_normalized(self):
        graph = InteractivityGraph("g", [([0, 0], [0, 1]), ((0, 0), (0, 1))])
        self.assertEqual(graph.edges, frozenset({((0, 0), (0, 1))}))

    def test_invalid_trace(self):
        """Switches absent from the graph are rejected"""
        with self.assertRaises(InvalidTraceError):
            fig4_graph().validate_trace([((0, 1), (0, 0))])
        self.assertEqual(
            fig4_graph().validate_trace([[[1, 0], [0, 1]]]), [((1, 0), (0, 1))]
        )

    def test_graph_by_name(self):
        self.assertEqual(graph_by_name("static", n_views=4).name, "static-4-view")
        with self.assertRaises(InvalidTraceError):
            graph_by_name("mesh")


class SyntheticPicturesTests(SimpleTestCase):
    def test_streams_are_offset_views(self):
        pictures = SyntheticPictures(32, seed=3, disparity=1)
        base, moved = pictures((0, 0)), pictures((2, 0))
        self.assertEqual(moved.samples[:, 2:].tolist(), base.samples[:, :-2].tolist())
        self.assertIs(pictures((0, 0)), base)
        self.assertNotEqual(pictures((0, 1)), base)


@pytest.fixture
def small_pictures():
    return lambda graph: SyntheticPictures(32, seed=5, disparity=graph.disparity)


def test_two_origin_switches_do_not_drift(codec_config, sigen, small_pictures):
    graph = fig4_graph()
    report = simulate_switch(
        graph, graph.full_trace(), codec_config, sigen, small_pictures(graph)
    )
    assert len(report.records) == 2
    assert not report.drift
    first, second = report.records
    assert first.mframe_bits == second.mframe_bits
    assert first.psnr_db == second.psnr_db
    assert math.isfinite(first.psnr_db) and first.psnr_db > 25


def test_cyclic_graph_reconstructs_target(codec_config, sigen, small_pictures):
    """Cyclic graphs code every destination as the target at the SI quantizer"""
    graph = static_cycle_graph(3)
    report = simulate_switch(
        graph, graph.full_trace(), codec_config, sigen, small_pictures(graph)
    )
    assert not report.drift
    assert {r.mode for r in report.records} == {"fixed"}
    assert all(r.matches_target for r in report.records)


def test_rate_ladder(codec_config, sigen, small_pictures):
    graph = aimd_ladder(27)
    pictures = small_pictures(graph)
    report = simulate_switch(graph, graph.full_trace(), codec_config, sigen, pictures)
    assert not report.drift

    origins = graph.origins((1, 1))
    rates = [encode_intra_frame(pictures(o), graph.qp(o[0], 27)).rate_bits for o in origins]
    assert rates[0] > rates[1] >= rates[2]
    for record in report.records:
        assert record.origin_bits == tuple(rates)
        assert record.average_rate_bits == pytest.approx(sum(rates) / 3 + record.mframe_bits)
        assert record.worst_rate_bits == rates[0] + record.mframe_bits


def test_trace_outside_graph(codec_config, sigen):
    with pytest.raises(InvalidTraceError):
        simulate_switch(fig4_graph(), [((0, 0), (1, 0))], codec_config, sigen)


def make_report():
    records = (
        SwitchRecord((0, 0), (0, 1), "fixed", 800, math.inf, False, True, (1000, 1400)),
        SwitchRecord((1, 0), (0, 1), "optimized", 640, 38.25, True, None, (1000, 1400)),
    )
    return SwitchReport("two-origins", records)


def test_report_csv():
    rows = list(csv.DictReader(io.StringIO(make_report().to_csv())))
    assert rows[0]["origin"] == "0:0"
    assert rows[0]["psnr_db"] == "inf"
    assert rows[0]["matches_target"] == "1"
    assert rows[0]["average_rate_bits"] == "2000.0"
    assert rows[1]["matches_target"] == ""
    assert rows[1]["drift"] == "1"
    assert rows[1]["worst_rate_bits"] == "2040"


def test_report_json():
    data = json.loads(make_report().to_json())
    assert data["graph"] == "two-origins"
    assert data["drift"] is True
    assert data["records"][0]["psnr_db"] is None
    assert data["records"][1]["psnr_db"] == 38.25
    assert data["records"][1]["origin"] == [1, 0]
