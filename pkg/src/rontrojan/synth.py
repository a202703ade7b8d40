"""Synthetic RON frequency datasets.

Each chip gets a global process-variation offset plus a per-RO offset.
Golden samples are those base frequencies plus averaged measurement noise;
Trojan samples are further depressed around a random site, with the drop
decaying exponentially with RO index distance from the site.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from rontrojan.dataset import LabeledDataset


@dataclass(frozen=True)
class SynthConfig:
    n_chips: int = 32
    n_ros: int = 8
    f_nominal: float = 100e6
    sigma_chip_rel: float = 0.02
    sigma_ro_rel: float = 0.005
    sigma_meas_rel: float = 0.001
    n_meas_avg: int = 50
    n_golden_per_chip: int = 2
    n_trojan_per_chip: int = 23
    trojan_drop_rel_min: float = 0.001
    trojan_drop_rel_max: float = 0.01
    locality_decay: float = 0.5

    def validate(self) -> None:
        """Raise ``ValueError`` naming the first offending field."""
        for name in ("n_chips", "n_ros", "n_meas_avg", "n_golden_per_chip", "n_trojan_per_chip"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if not (math.isfinite(self.f_nominal) and self.f_nominal > 0):
            raise ValueError(f"f_nominal must be > 0, got {self.f_nominal!r}")
        for name in ("sigma_chip_rel", "sigma_ro_rel", "sigma_meas_rel", "locality_decay"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be >= 0, got {v!r}")
        lo, hi = self.trojan_drop_rel_min, self.trojan_drop_rel_max
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo <= hi):
            raise ValueError(
                f"trojan_drop_rel_min/max must satisfy 0 <= min <= max, got {lo!r}, {hi!r}"
            )

    @property
    def samples_per_chip(self) -> int:
        return self.n_golden_per_chip + self.n_trojan_per_chip

    def replace(self, **changes) -> SynthConfig:
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> SynthConfig:
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ValueError(f"unknown SynthConfig key {key!r}")
            kwargs[key] = _coerce(key, raw, types[key])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> SynthConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(parse_key_values(fh.read()))


def _coerce(key: str, raw, type_name):
    if not isinstance(raw, str):
        return raw
    try:
        if type_name in (int, "int"):
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ValueError(f"{key}: cannot parse {raw!r}") from None


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def chip_rng(seed: int, chip: int) -> np.random.Generator:
    """Independent stream for one chip, derived only from (seed, chip index)."""
    return np.random.default_rng(np.random.SeedSequence(seed & (2**64 - 1), spawn_key=(chip,)))


def chip_name(chip: int) -> str:
    return f"board{chip // 4:02d}-region{chip % 4}"


def _generate_chip(config: SynthConfig, seed: int, chip: int):
    rng = chip_rng(seed, chip)
    f0 = config.f_nominal
    n_ros = config.n_ros
    chip_offset = rng.normal(0.0, config.sigma_chip_rel * f0)
    ro_offsets = rng.normal(0.0, config.sigma_ro_rel * f0, size=n_ros)
    base = f0 + chip_offset + ro_offsets

    meas_sd = config.sigma_meas_rel * f0 / math.sqrt(config.n_meas_avg)
    golden = base + rng.normal(0.0, meas_sd, size=(config.n_golden_per_chip, n_ros))

    n_t = config.n_trojan_per_chip
    drops = rng.uniform(config.trojan_drop_rel_min, config.trojan_drop_rel_max, size=n_t)
    sites = rng.integers(0, n_ros, size=n_t)
    distance = np.abs(np.arange(n_ros)[None, :] - sites[:, None])
    weights = np.exp(-config.locality_decay * distance)
    trojan = base - drops[:, None] * weights * f0
    trojan = trojan + rng.normal(0.0, meas_sd, size=(n_t, n_ros))
    return base, golden, trojan, sites


def chip_base_frequencies(config: SynthConfig, seed: int) -> np.ndarray:
    """Noise-free per-chip, per-RO base frequencies ``(n_chips, n_ros)`` behind :func:`generate`."""
    config.validate()
    return np.array([_generate_chip(config, seed, c)[0] for c in range(config.n_chips)])


def generate(config: SynthConfig, seed: int) -> LabeledDataset:
    """Draw a labeled dataset; a pure function of ``(config, seed)``."""
    config.validate()
    feats, chips, regions, trojan, bench = [], [], [], [], []
    for c in range(config.n_chips):
        _, golden, troj, _ = _generate_chip(config, seed, c)
        name = chip_name(c)
        feats.append(golden)
        feats.append(troj)
        n_g, n_t = golden.shape[0], troj.shape[0]
        chips.extend([name] * (n_g + n_t))
        regions.extend([c % 4] * (n_g + n_t))
        trojan.extend([False] * n_g + [True] * n_t)
        bench.extend([None] * n_g + [f"T{j + 1:02d}" for j in range(n_t)])
    return LabeledDataset(np.vstack(feats), chips, regions, trojan, bench)
