"""Interactivity graphs and the stream-switching simulator.

A node is a picture ``(stream, time)``; an edge ``origin -> destination``
is a permitted switch. Every destination is coded once as an M-frame over
one SI frame per origin, and a trace replays switches by decoding that
M-frame with the SI frame of the origin actually taken.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np
from django.conf import settings

from codec.config import CodecConfig
from codec.exceptions import InvalidTraceError
from codec.frame_codec import decode_mframe, encode_intra_frame, encode_mframe
from codec.frames import Frame
from codec.transform import intra_reconstruct
from evaluation.metrics import psnr

from .sigen import SiGenConfig, predict_si
from .sources import synthetic_frame, translate

logger = logging.getLogger(__name__)

Node = tuple[int, int]

REPORT_FIELDS = (
    "origin",
    "destination",
    "mode",
    "mframe_bits",
    "psnr_db",
    "drift",
    "matches_target",
    "average_rate_bits",
    "worst_rate_bits",
)


@dataclass(frozen=True, eq=False)
class InteractivityGraph:
    name: str
    edges: frozenset
    stream_qp: dict = field(default_factory=dict)
    disparity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset((tuple(o), tuple(d)) for o, d in self.edges))

    @cached_property
    def nodes(self) -> list[Node]:
        return sorted({node for edge in self.edges for node in edge})

    @cached_property
    def destinations(self) -> list[Node]:
        return sorted({d for _, d in self.edges})

    def origins(self, destination: Node) -> list[Node]:
        return sorted(o for o, d in self.edges if d == tuple(destination))

    def qp(self, stream: int, default: int) -> int:
        return self.stream_qp.get(stream, default)

    @cached_property
    def cyclic(self) -> bool:
        successors = {}
        for o, d in self.edges:
            successors.setdefault(o, []).append(d)
        state = {}

        def visit(node):
            state[node] = "open"
            for nxt in successors.get(node, ()):
                if state.get(nxt) == "open":
                    return True
                if nxt not in state and visit(nxt):
                    return True
            state[node] = "done"
            return False

        return any(node not in state and visit(node) for node in self.nodes)

    def validate_trace(self, trace) -> list[tuple[Node, Node]]:
        switches = [(tuple(o), tuple(d)) for o, d in trace]
        for switch in switches:
            if switch not in self.edges:
                raise InvalidTraceError(f"{self.name} has no switch {switch[0]} -> {switch[1]}")
        return switches

    def full_trace(self) -> list[tuple[Node, Node]]:
        """Every permitted switch once"""
        return sorted(self.edges)


def fig4_graph() -> InteractivityGraph:
    """Two origin streams switching into one destination picture"""
    return InteractivityGraph("two-origins", {((0, 0), (0, 1)), ((1, 0), (0, 1))})


def static_cycle_graph(n_views: int = 3) -> InteractivityGraph:
    """Views of one instant, each switchable to its neighbours and back"""
    edges = set()
    for v in range(n_views - 1):
        edges.add(((v, 0), (v + 1, 0)))
        edges.add(((v + 1, 0), (v, 0)))
    return InteractivityGraph(f"static-{n_views}-view", edges)


def aimd_ladder(base_qp: int = 27) -> InteractivityGraph:
    """Three rate versions of one view switching into the middle stream.

    QPs base - 6, base and base + 1 give origin rates of roughly twice,
    once and 0.9 times the destination stream's rate.
    """
    edges = {((s, 0), (1, 1)) for s in range(3)}
    qps = {0: base_qp - 6, 1: base_qp, 2: base_qp + 1}
    return InteractivityGraph("aimd-ladder", edges, stream_qp=qps, disparity=0)


def graph_by_name(name: str, n_views: int = 3, base_qp: int = 27) -> InteractivityGraph:
    if name == "two-origins":
        return fig4_graph()
    if name == "static":
        return static_cycle_graph(n_views)
    if name == "aimd":
        return aimd_ladder(base_qp)
    raise InvalidTraceError(f"unknown graph {name!r}")


GRAPHS = ("two-origins", "static", "aimd")


class SyntheticPictures:
    """Picture of every node: one seeded scene per instant, offset per stream"""

    def __init__(self, size: int, seed: int, disparity: int):
        self.size = size
        self.seed = seed
        self.disparity = disparity
        self._cache = {}

    def __call__(self, node: Node) -> Frame:
        if node not in self._cache:
            stream, time = node
            scene = synthetic_frame(self.size, self.size, [self.seed, time])
            self._cache[node] = translate(scene, 0, stream * self.disparity)
        return self._cache[node]


@dataclass(frozen=True)
class SwitchRecord:
    origin: Node
    destination: Node
    mode: str
    mframe_bits: int
    psnr_db: float
    drift: bool
    matches_target: bool | None
    origin_bits: tuple[int, ...]

    @property
    def average_rate_bits(self) -> float:
        """Mean origin-frame rate plus the M-frame rate"""
        return float(np.mean(self.origin_bits)) + self.mframe_bits

    @property
    def worst_rate_bits(self) -> int:
        return max(self.origin_bits) + self.mframe_bits

    def row(self) -> dict:
        return {
            "origin": "%d:%d" % self.origin,
            "destination": "%d:%d" % self.destination,
            "mode": self.mode,
            "mframe_bits": self.mframe_bits,
            "psnr_db": "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.4f}",
            "drift": int(self.drift),
            "matches_target": "" if self.matches_target is None else int(self.matches_target),
            "average_rate_bits": f"{self.average_rate_bits:.1f}",
            "worst_rate_bits": self.worst_rate_bits,
        }


@dataclass(frozen=True)
class SwitchReport:
    graph: str
    records: tuple[SwitchRecord, ...]

    @property
    def drift(self) -> bool:
        return any(r.drift for r in self.records)

    def to_csv(self, stream=None) -> str:
        out = io.StringIO() if stream is None else stream
        writer = csv.DictWriter(out, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for record in self.records:
            writer.writerow(record.row())
        return out.getvalue() if stream is None else ""

    def to_json(self) -> str:
        records = []
        for record in self.records:
            data = asdict(record)
            data["psnr_db"] = None if math.isinf(record.psnr_db) else record.psnr_db
            data["average_rate_bits"] = record.average_rate_bits
            data["worst_rate_bits"] = record.worst_rate_bits
            records.append(data)
        return json.dumps({"graph": self.graph, "drift": self.drift, "records": records}, indent=2)


def simulate_switch(
    graph: InteractivityGraph,
    trace,
    config: CodecConfig | None = None,
    sigen: SiGenConfig | None = None,
    pictures=None,
) -> SwitchReport:
    """Replay ``trace`` over ``graph`` and check every switch for drift.

    Cyclic graphs are coded in fixed mode, where each reconstruction must also
    equal the target decoded at the SI quantizer.
    """
    config = CodecConfig.from_settings() if config is None else config
    sigen = SiGenConfig.from_settings() if sigen is None else sigen
    if pictures is None:
        pictures = SyntheticPictures(settings.MFRAME["FRAME_SIZE"], sigen.seed, graph.disparity)
    if graph.cyclic and config.mode != "fixed":
        logger.info("%s is cyclic, switching to fixed-target merging", graph.name)
        config = config.replace(mode="fixed")
    sigen = sigen.replace(qp_si=config.qp_si, block_edge=config.block_edge, scan=config.scan)

    switches = graph.validate_trace(trace)
    mframes, si_sets, origin_bits = {}, {}, {}

    def origin_rate(node):
        if node not in origin_bits:
            qp = graph.qp(node[0], config.qp_si)
            coded = encode_intra_frame(pictures(node), qp, config.block_edge, config.scan)
            origin_bits[node] = coded.rate_bits
        return origin_bits[node]

    records = []
    for origin, destination in switches:
        target = pictures(destination)
        origins = graph.origins(destination)
        if destination not in mframes:
            si_sets[destination] = {
                o: predict_si(target, sigen, index) for index, o in enumerate(origins)
            }
            mframes[destination] = encode_mframe(list(si_sets[destination].values()), target, config)
        result = mframes[destination]
        si = si_sets[destination]

        decoded = decode_mframe(result.bitstream, si[origin])
        drift = any(decode_mframe(result.bitstream, si[o]) != decoded for o in origins if o != origin)
        if drift:
            logger.warning("drift switching %s -> %s on %s", origin, destination, graph.name)
        matches = None
        if result.mode == "fixed":
            header = result.bitstream.header
            matches = decoded == intra_reconstruct(target, header.Q, header.block_edge, header.scan)
        records.append(
            SwitchRecord(
                origin=origin,
                destination=destination,
                mode=result.mode,
                mframe_bits=result.rate_bits,
                psnr_db=psnr(target, decoded),
                drift=drift,
                matches_target=matches,
                origin_bits=tuple(origin_rate(o) for o in origins),
            )
        )
    return SwitchReport(graph.name, tuple(records))
