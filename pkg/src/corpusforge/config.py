"""Defaults and the key=value config file format.

Precedence everywhere: command-line flags beat the config file, which beats
these defaults. The file format is one `key = value` pair per line; blank
lines and lines starting with # are ignored; values are coerced to the type
of the matching default.
"""

from __future__ import annotations

from pathlib import Path

DEFAULTS: dict = {
    "sample_rate": 16000,
    "max_chunk_s": 30.0,
    "min_chunk_s": 5.0,
    "silence_db": -40.0,
    "gap_s": 1.0,
    "devanagari_min_fraction": 0.5,
    "snr_db": 20.0,
    "noise_rate": 8000,
    "seed": 0,
    "train_fraction": 0.8,
    "eval_cap": 0.3,
    "timeout_s": 120.0,
    "workers": 1,
    "host": "127.0.0.1",
    "port": 8765,
}


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    if isinstance(default, bool):
        return raw.lower() in ("true", "1", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text: str) -> dict:
    """Parse key=value lines; unknown keys are an error (they catch typos)."""
    out: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = stripped.partition("=")
        if not eq:
            raise ValueError(f"config line {line_no}: expected key=value, "
                             f"got {stripped!r}")
        key = key.strip()
        value = value.strip().strip('"').strip("'")
        if key not in DEFAULTS:
            raise ValueError(f"config line {line_no}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except ValueError:
            raise ValueError(
                f"config line {line_no}: bad value {value!r} for {key!r}")
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text(encoding="utf-8"))
