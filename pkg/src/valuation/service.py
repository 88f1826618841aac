"""
Feature sets and the valuation they induce.

A feature set pairs ATL formulas with nonnegative values; the value of a structure is the sum
of the values of the features satisfied at its initial state. Duplicate formulas are kept and
their values accumulate.

Key functionalities include:
- Loading and saving feature documents.
- Valuating a structure and listing which features it satisfies.
- Computing the union closure of all feature formulas, the index set of the ILP encoding.
"""

import logging
from pathlib import Path
from typing import List, Union

from src.exceptions import FeatureError, FormulaSyntaxError
from src.ingestion.tools import parse_document, read_document
from src.logic.checker import ModelChecker
from src.logic.formula import Formula, canonical_order, coalitions, desugar, propositions, subformulas
from src.logic.parser import parse_formula
from src.model.models import CCGS
from src.valuation.models import Feature, FeatureSet
from src.valuation.schemas import FeatureSchema, FeaturesDocument

logger = logging.getLogger(__name__)


def make_feature(formula: Formula, value: float) -> Feature:
    if value < 0:
        raise FeatureError(f"feature value must be nonnegative, got {value}")
    return Feature(formula=desugar(formula), value=value, source=formula)


def load_features(document: Union[dict, FeaturesDocument]) -> FeatureSet:
    """
    Parses and desugars every feature of a feature document.

    Raises:
        FeatureError: If the document is malformed, a value is negative, or a formula does
            not parse; the message names the feature index.
    """
    if not isinstance(document, FeaturesDocument):
        document = parse_document(document, FeaturesDocument, FeatureError)
    features = []
    for index, row in enumerate(document.features):
        try:
            formula = parse_formula(row.formula)
        except FormulaSyntaxError as e:
            raise FeatureError(f"feature {index}: {e.detail}") from e
        features.append(make_feature(formula, float(row.value)))
    logger.info("Loaded %d features", len(features))
    return FeatureSet(features=tuple(features))


def read_features(file_path: Union[str, Path]) -> FeatureSet:
    return load_features(read_document(file_path))


def save_features(feature_set: FeatureSet) -> FeaturesDocument:
    return FeaturesDocument(features=[
        FeatureSchema(formula=str(feature.source), value=feature.value)
        for feature in feature_set.features
    ])


def check_features(structure: CCGS, feature_set: FeatureSet) -> None:
    """
    Raises:
        FeatureError: If a feature names a proposition or an agent the structure lacks.
    """
    for index, feature in enumerate(feature_set.features):
        unknown = propositions(feature.formula) - set(structure.propositions)
        if unknown:
            raise FeatureError(f"feature {index}: unknown propositions {sorted(unknown)}")
        for coalition in coalitions(feature.formula):
            if any(agent not in structure.agents for agent in coalition):
                raise FeatureError(
                    f"feature {index}: coalition {sorted(coalition)} is not within 1..{structure.agent_count}"
                )


def satisfied_features(structure: CCGS, feature_set: FeatureSet) -> List[bool]:
    checker = ModelChecker(structure)
    return [structure.initial in checker.check(feature.formula) for feature in feature_set.features]


def valuate(structure: CCGS, feature_set: FeatureSet) -> float:
    """The sum of the values of the features satisfied at the initial state."""
    return sum(
        feature.value
        for feature, satisfied in zip(feature_set.features, satisfied_features(structure, feature_set))
        if satisfied
    )


def union_closure(feature_set: FeatureSet) -> List[Formula]:
    closure = set()
    for feature in feature_set.features:
        closure |= subformulas(feature.formula)
    return canonical_order(closure)
