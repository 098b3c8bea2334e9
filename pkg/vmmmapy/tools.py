"""Atomic, deterministic result files"""
from __future__ import annotations

# Built-in
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable

# Third-Party
import numpy as np
import pandas as pd

# This project
from vmmmapy.simulate.field import FieldSample

__all__: tuple[str, ...] = ("ResultWriter", "to_jsonable")

FLOAT_FORMAT = "%.17g"


def to_jsonable(value: Any) -> Any:
    """Replace numpy scalars and arrays, tuples and non-finite floats by plain JSON values"""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ResultWriter:
    """
    Writes JSON and CSV results under one directory, each file through a temporary file and a rename.

    ### Arguments
    - directory (Path): Output directory, created on demand

    ### Returns
    - None
    """

    def __init__(self, directory: Path | str) -> None:
        self.directory = Path(directory)
        self.written: list[Path] = []

    def _atomic(self, name: str, write: Callable[[Path], None]) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.directory / name
        handle, temporary = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.", suffix=".tmp")
        os.close(handle)
        try:
            write(Path(temporary))
            Path(temporary).replace(target)
        except BaseException:
            Path(temporary).unlink(missing_ok=True)
            raise
        self.written.append(target)
        return target

    def json(self, name: str, data: Any) -> Path:
        text = json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n"
        return self._atomic(name, lambda path: path.write_text(text, encoding="utf-8"))

    def csv(self, name: str, frame: pd.DataFrame) -> Path:
        return self._atomic(
            name, lambda path: frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        )

    def field(self, stem: str, sample: FieldSample, model_digest: str | None = None) -> Path:
        """
        Write a sample as stem.csv (t1..td, value) with a stem.json sidecar.

        ### Arguments
        - stem (str): File name without suffix
        - sample (FieldSample): The sample
        - model_digest (str | None): sha256 of the model, recorded in the sidecar

        ### Returns
        - Path: The CSV file
        """
        path = self.csv(f"{stem}.csv", sample.to_frame())
        metadata = sample.metadata()
        if model_digest is not None:
            metadata["model"] = model_digest
        self.json(f"{stem}.json", metadata)
        return path
