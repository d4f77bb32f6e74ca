from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Optional

import numpy as np


def resolve_repo_root() -> Path:
    """Return the repository root (one level above this module)."""
    return Path(__file__).resolve().parents[1]


def expand_repo_placeholders(path_value: str) -> str:
    """Expand ``{repo}`` placeholder tokens in the supplied string."""
    if not path_value:
        return path_value
    repo_root = resolve_repo_root()
    return path_value.replace("{repo}", str(repo_root)).replace("${repo}", str(repo_root))


def default_output_dir() -> Path:
    """Return the default report directory, honouring ``HM_OUTPUT_DIR``."""
    base = os.environ.get("HM_OUTPUT_DIR", "")
    if base.strip():
        return Path(expand_repo_placeholders(base)).expanduser().resolve()
    return (Path.home() / ".cache" / "hermitian_lab" / "output").resolve()


def resolve_output_dir(out: Optional[str]) -> Path:
    target = Path(expand_repo_placeholders(out)).expanduser().resolve() if out else default_output_dir()
    target.mkdir(parents=True, exist_ok=True)
    return target


def progress_disabled() -> bool:
    """Return ``True`` when tqdm progress bars should be suppressed."""
    value = os.environ.get("HM_NO_PROGRESS", "")
    return value.lower() not in {"", "0", "false", "off"}


def env_log_level() -> Optional[int]:
    value = os.environ.get("HM_LOG_LEVEL", "").strip().upper()
    if not value:
        return None
    level = logging.getLevelName(value)
    return level if isinstance(level, int) else None


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def dump_json(payload: Any, path: Path) -> None:
    """Write ``payload`` deterministically (sorted keys) so reruns are byte-identical."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fp:
        json.dump(to_jsonable(payload), fp, indent=2, sort_keys=True)
        fp.write("\n")
