from typing import List

from pydantic import BaseModel, NonNegativeFloat


class FeatureSchema(BaseModel):
    formula: str
    value: NonNegativeFloat


class FeaturesDocument(BaseModel):
    features: List[FeatureSchema] = []
