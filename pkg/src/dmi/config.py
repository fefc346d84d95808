from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple
import os


# Domyślny katalog z danymi (korpusy, splity, plany).
# Można go nadpisać zmienną środowiskową DMI_DATA_DIR.
DATA_PATH: Path = Path(os.environ.get("DMI_DATA_DIR", "data"))

# Budżety L (w tokenach), interwał segmentacji 512, maks. długość 2048.
DEFAULT_LENGTHS: Tuple[int, ...] = (512, 1024, 1536, 2048)


@dataclass
class SplitConfig:
    train_frac: float = 0.8
    dev_docs: int = 150
    test_docs: int = 150


@dataclass
class SegmentConfig:
    lengths: Tuple[int, ...] = DEFAULT_LENGTHS
    strategy: str = "partition"  # or "replicate"
    budget_side: str = "source"  # or "max"


@dataclass
class MixConfig:
    include_sentence_level: bool = True
    sentence_budget: Optional[int] = None  # None = all sentence records
    sentence_docs: Optional[int] = None  # None = every train doc
    doc_budget: Optional[int] = None  # None = every scheduled doc


@dataclass
class BleuConfig:
    max_n: int = 4
    smoothing: str = "none"  # or "add-k"
    k: float = 1.0


@dataclass
class RuntimeConfig:
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None
