from dataclasses import dataclass
from typing import Tuple

from src.logic.formula import Formula


@dataclass(frozen=True)
class Feature:
    formula: Formula
    value: float
    source: Formula


@dataclass(frozen=True)
class FeatureSet:
    features: Tuple[Feature, ...] = ()

    @property
    def total_value(self) -> float:
        return sum(feature.value for feature in self.features)

    def __len__(self) -> int:
        return len(self.features)
