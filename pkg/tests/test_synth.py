import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rontrojan.dataset import GOLDEN, TROJAN
from rontrojan.synth import SynthConfig, _generate_chip, chip_base_frequencies, generate, parse_key_values

QUIET = dict(sigma_chip_rel=0.0, sigma_ro_rel=0.0, sigma_meas_rel=0.0)

def test_defaults():
    cfg = SynthConfig()
    assert (cfg.n_chips, cfg.n_ros, cfg.f_nominal) == (32, 8, 100e6)
    assert (cfg.sigma_chip_rel, cfg.sigma_ro_rel, cfg.sigma_meas_rel) == (0.02, 0.005, 0.001)
    assert (cfg.n_meas_avg, cfg.n_golden_per_chip, cfg.n_trojan_per_chip) == (50, 2, 23)
    assert (cfg.trojan_drop_rel_min, cfg.trojan_drop_rel_max, cfg.locality_decay) == (0.001, 0.01, 0.5)

def test_noiseless_single_chip_is_nominal():
    cfg = SynthConfig(n_chips=1, trojan_drop_rel_min=0.0, trojan_drop_rel_max=0.0, **QUIET)
    data = generate(cfg, seed=1)
    assert np.all(data.features == cfg.f_nominal)

def test_uniform_drop_without_locality():
    cfg = SynthConfig(trojan_drop_rel_min=0.01, trojan_drop_rel_max=0.01, locality_decay=0.0, **QUIET)
    data = generate(cfg, seed=2)
    assert np.all(data.features[data.labels == TROJAN] == 0.99 * cfg.f_nominal)
    assert np.all(data.features[data.labels == GOLDEN] == cfg.f_nominal)

def test_chip_offset_spread_matches_configuration():
    cfg = SynthConfig(n_chips=10_000)
    base = chip_base_frequencies(cfg, seed=3)
    sd = base.mean(axis=1).std(ddof=1)
    target = cfg.sigma_chip_rel * cfg.f_nominal
    assert abs(sd - target) <= 0.05 * target
    # the per-RO offsets add sigma_ro^2 / n_ros to the variance of the chip mean
    exact = cfg.f_nominal * math.sqrt(cfg.sigma_chip_rel**2 + cfg.sigma_ro_rel**2 / cfg.n_ros)
    assert abs(sd - exact) <= 0.03 * exact

def test_measurement_noise_is_averaged():
    cfg = SynthConfig(n_chips=200, n_golden_per_chip=20, n_trojan_per_chip=1,
                      sigma_chip_rel=0.0, sigma_ro_rel=0.0)
    data = generate(cfg, seed=4)
    golden = data.features[data.labels == GOLDEN]
    expected = cfg.sigma_meas_rel * cfg.f_nominal / math.sqrt(cfg.n_meas_avg)
    assert golden.std(ddof=1) == pytest.approx(expected, rel=0.03)

def test_shape_and_labels():
    cfg = SynthConfig(n_chips=5, n_ros=6, n_golden_per_chip=3, n_trojan_per_chip=4)
    data = generate(cfg, seed=0)
    assert data.features.shape == (35, 6)
    for idx in data.chip_index.values():
        assert len(idx) == 7
        labels = data.labels[list(idx)]
        assert (labels == GOLDEN).sum() == 3 and (labels == TROJAN).sum() == 4

def test_default_corpus_shape(default_corpus):
    assert len(default_corpus) == 800
    assert len(default_corpus.chip_index) == 32
    assert set(default_corpus.region_ids.tolist()) == {0, 1, 2, 3}

def test_deterministic():
    cfg = SynthConfig(n_chips=4)
    assert generate(cfg, 5) == generate(cfg, 5)
    assert generate(cfg, 5) != generate(cfg, 6)

def test_chips_do_not_depend_on_chip_count():
    small = generate(SynthConfig(n_chips=3), 9)
    large = generate(SynthConfig(n_chips=10), 9)
    n = len(small)
    assert np.array_equal(small.features, large.features[:n])

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), decay=st.floats(0.0, 3.0),
       lo=st.floats(1e-4, 0.05), width=st.floats(0.0, 0.05))
def test_trojan_site_is_below_golden(seed, decay, lo, width):
    cfg = SynthConfig(n_chips=2, sigma_meas_rel=0.0, locality_decay=decay,
                      trojan_drop_rel_min=lo, trojan_drop_rel_max=lo + width)
    for chip in range(cfg.n_chips):
        _, golden, trojan, sites = _generate_chip(cfg, seed, chip)
        for row, site in zip(trojan, sites):
            assert row[site] < golden[0, site]


@pytest.mark.parametrize("field,value", [
    ("n_chips", 0), ("n_ros", -1), ("sigma_chip_rel", -0.1), ("f_nominal", 0.0),
    ("n_meas_avg", 0), ("locality_decay", -1.0), ("trojan_drop_rel_min", 0.5),
])
def test_invalid_config_names_field(field, value):
    cfg = SynthConfig().replace(**{field: value})
    with pytest.raises(ValueError, match=field.split("_rel")[0]):
        generate(cfg, 0)

def test_key_value_file(tmp_path):
    path = tmp_path / "synth.cfg"
    path.write_text("# corpus\nn_chips = 6\nsigma-ro-rel=0.001\n\ntrojan_drop_rel_max = 0.02\n")
    cfg = SynthConfig.from_file(path)
    assert cfg.n_chips == 6 and isinstance(cfg.n_chips, int)
    assert cfg.sigma_ro_rel == 0.001
    assert cfg.trojan_drop_rel_max == 0.02
    assert cfg.n_ros == 8

def test_key_value_errors():
    with pytest.raises(ValueError, match="line 2"):
        parse_key_values("a=1\nnonsense\n")
    with pytest.raises(ValueError, match="unknown"):
        SynthConfig.from_mapping({"n_boards": "3"})
    with pytest.raises(ValueError, match="n_chips"):
        SynthConfig.from_mapping({"n_chips": "2.5"})
