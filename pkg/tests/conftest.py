import numpy as np
import pytest

from fcv.codec import encode_video_traced
from fcv.synth import make_static, make_translate


@pytest.fixture(scope="session")
def translate_video():
    return make_translate(64, 64, 12, seed=11, dx=3)


@pytest.fixture(scope="session")
def translate_coded(translate_video):
    """(stream, golden features, encoder recon frames) at q=2, gop 4."""
    return encode_video_traced(translate_video, gop_size=4, quality=2,
                               search_range=8, collect_recon=True)


@pytest.fixture(scope="session")
def static_video():
    return make_static(64, 48, 6, seed=3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0xF00D)
