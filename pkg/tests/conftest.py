import numpy as np
import pytest

from chart2net import raster, synthgen
from chart2net.synthgen import SynthSpec


def write_corpus(directory, seeds, **style):
    """Write one synthetic chart per seed; returns the stems."""
    stems = []
    for seed in seeds:
        spec = SynthSpec(seed=seed, n_units=synthgen.n_units_for_seed(seed), **style)
        stem = f"chart_{seed:04d}"
        synthgen.write_chart(directory, stem, spec)
        stems.append(stem)
    return stems


def write_blank(directory, stem, shape=(300, 400)):
    raster.write_png(directory / f"{stem}.png", np.full(shape, 255, np.uint8))
    (directory / f"{stem}.sidecar.json").write_text(
        '{"units": "px", "origin": "top-left", "boxes": []}\n', encoding="utf-8"
    )


@pytest.fixture
def small_corpus(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    write_corpus(d, range(1, 5))
    return d
