"""Document reading and writing tools."""

import logging
import sys
from pathlib import Path
from typing import Any, Optional, Type, TypeVar, Union

import orjson
from pydantic import BaseModel, ValidationError

from src.exceptions import InputError

logger = logging.getLogger(__name__)

SchemaT = TypeVar("SchemaT", bound=BaseModel)

DUMP_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def read_document(file_path: Union[str, Path]) -> Any:
    """
    Reads a JSON document from disk.

    Args:
        file_path (Union[str, Path]): The path to the document.

    Returns:
        Any: The decoded document.

    Raises:
        InputError: If the file cannot be read or is not valid JSON.
    """
    try:
        raw = Path(file_path).read_bytes()
    except OSError as e:
        raise InputError(f"Error during reading file {file_path}: {e}") from e
    try:
        return orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise InputError(f"File {file_path} is not valid JSON: {e}") from e


def parse_document(document: Any, schema: Type[SchemaT], error: Type[InputError] = InputError) -> SchemaT:
    """
    Validates a decoded document against a pydantic schema.

    Raises:
        InputError: The given `error` subclass, if validation fails.
    """
    try:
        return schema.model_validate(document)
    except ValidationError as e:
        raise error(f"Invalid {schema.__name__} document: {e}") from e


def load_document(file_path: Union[str, Path], schema: Type[SchemaT], error: Type[InputError] = InputError) -> SchemaT:
    return parse_document(read_document(file_path), schema, error)


def dumps(document: Any) -> bytes:
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json", by_alias=True)
    return orjson.dumps(document, option=DUMP_OPTIONS)


def write_document(document: Any, output_file: Optional[Union[str, Path]] = None) -> None:
    """
    Writes a document as indented, key-sorted JSON to a file or to standard output.

    Args:
        document (Any): A pydantic model or plain JSON-compatible data.
        output_file (Optional[Union[str, Path]]): Target path; standard output when omitted.
    """
    payload = dumps(document) + b"\n"
    if output_file is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    try:
        Path(output_file).write_bytes(payload)
    except OSError as e:
        raise InputError(f"Error during writing file {output_file}: {e}") from e
    logger.info("Wrote %d bytes to %s", len(payload), output_file)
