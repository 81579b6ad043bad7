import pytest

from codec.config import CodecConfig
from codec.frames import write_raw
from harness.sigen import SiGenConfig, generate_si_set
from harness.sources import synthetic_frame


@pytest.fixture
def target():
    """A 64x64 synthetic target picture"""
    return synthetic_frame(64, 64, seed=7)


@pytest.fixture
def sigen():
    """SI generation settings independent of the environment"""
    return SiGenConfig(seed=7, n_si=3, qp_si=27, noise_scale=0.125)


@pytest.fixture
def si_frames(target, sigen):
    """Three SI frames predicted for the target"""
    return generate_si_set(target, sigen)


@pytest.fixture
def codec_config():
    """Codec settings independent of the environment"""
    return CodecConfig(qp_si=27, rd_passes=2, max_spikes=8)


@pytest.fixture
def raw_files(tmp_path, target, si_frames):
    """Target and SI frames written as raw 8-bit files"""
    paths = {"target": tmp_path / "target.yuv"}
    write_raw(paths["target"], target)
    paths["si"] = []
    for n, frame in enumerate(si_frames):
        path = tmp_path / f"si_{n}.yuv"
        write_raw(path, frame)
        paths["si"].append(path)
    return paths
