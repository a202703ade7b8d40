"""Hardware Trojan detection from ring-oscillator frequency fingerprints."""

__version__ = "0.1.0"

from rontrojan.dataset import GOLDEN, TROJAN, LabeledDataset, load_csv, save_csv, split_by_chip
from rontrojan.synth import SynthConfig, generate

__all__ = [
    "GOLDEN",
    "TROJAN",
    "LabeledDataset",
    "SynthConfig",
    "generate",
    "load_csv",
    "save_csv",
    "split_by_chip",
]
