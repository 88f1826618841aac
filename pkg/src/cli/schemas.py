"""
Validated inputs of a command-line invocation.

`RunConfig` gathers the options shared by the subcommands; `parse_bids` turns the
comma-separated `--bids` option into a profile.
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel

from src.exceptions import BidProfileError


class OutputFormat(str, Enum):
    HUMAN = "human"
    JSON = "json"


class Backend(str, Enum):
    ILP = "ilp"
    BRUTE = "brute"


class RunConfig(BaseModel):
    subcommand: str
    model: Optional[Path] = None
    features: Optional[Path] = None
    law: Optional[Path] = None
    bids: Optional[List[float]] = None
    agent: Optional[int] = None
    count: Optional[int] = None
    backend: Backend = Backend.ILP
    grid: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    output_format: OutputFormat = OutputFormat.HUMAN
    verbose: bool = False


def parse_bids(text: Optional[str]) -> List[float]:
    """
    Raises:
        BidProfileError: If the option is missing or an entry is not a number.
    """
    if not text:
        raise BidProfileError("missing --bids")
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as e:
        raise BidProfileError(f"bids must be comma-separated numbers, got '{text}'") from e
