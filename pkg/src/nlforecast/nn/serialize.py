"""Versioned model snapshot container.

A snapshot is an uncompressed ``.npz`` archive (numpy's zip of ``.npy``
files, loaded with ``allow_pickle=False``):

``__meta__``
    0-d unicode array holding a JSON document::

        {"format": "nlforecast.snapshot", "version": 1,
         "models": {<name>: {"config": {...ModelConfig fields...},
                             "params": [...], "buffers": [...]}},
         "meta": {...caller metadata, JSON-compatible...},
         "arrays": [...names of extra arrays...]}

``model/<name>/param/<param>``, ``model/<name>/buffer/<buffer>``
    float64 parameter and running-statistic arrays.

``extra/<key>``
    caller arrays (normalization statistics and the like).

``.npy`` stores the raw little-endian bytes, so a load reproduces every
value bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .model import LstmModel, ModelConfig

FORMAT = "nlforecast.snapshot"
VERSION = 1


class SnapshotError(ValueError):
    pass


def save_snapshot(path, models: dict[str, LstmModel], meta: dict | None = None,
                  arrays: dict[str, np.ndarray] | None = None) -> None:
    header = {"format": FORMAT, "version": VERSION, "models": {}, "meta": meta or {},
              "arrays": sorted(arrays or {})}
    payload: dict[str, np.ndarray] = {}
    for name, model in models.items():
        if "/" in name:
            raise SnapshotError(f"model name may not contain '/': {name!r}")
        cfg = dataclasses.asdict(model.config)
        cfg["hidden"] = list(cfg["hidden"])
        header["models"][name] = {"config": cfg, "params": sorted(model.params),
                                  "buffers": sorted(model.buffers)}
        for k, v in model.params.items():
            payload[f"model/{name}/param/{k}"] = np.asarray(v, dtype=np.float64)
        for k, v in model.buffers.items():
            payload[f"model/{name}/buffer/{k}"] = np.asarray(v, dtype=np.float64)
    for k, v in (arrays or {}).items():
        payload[f"extra/{k}"] = np.asarray(v)
    payload["__meta__"] = np.array(json.dumps(header, sort_keys=True))
    with open(Path(path), "wb") as fh:
        np.savez(fh, **payload)


def load_snapshot(path):
    """Return ``(models, meta, arrays)`` from a file written by :func:`save_snapshot`."""
    path = Path(path)
    if not path.is_file():
        raise SnapshotError(f"model snapshot not found: {path}")
    try:
        archive = np.load(path, allow_pickle=False)
    except Exception as exc:  # zipfile/format errors vary by numpy version
        raise SnapshotError(f"{path}: not a readable snapshot ({exc})") from exc
    with archive:
        if "__meta__" not in archive.files:
            raise SnapshotError(f"{path}: missing __meta__ entry")
        header = json.loads(str(archive["__meta__"]))
        if header.get("format") != FORMAT:
            raise SnapshotError(f"{path}: unknown format {header.get('format')!r}")
        if header.get("version") != VERSION:
            raise SnapshotError(f"{path}: unsupported snapshot version {header.get('version')}")
        models = {}
        for name, spec in header["models"].items():
            cfg = dict(spec["config"])
            cfg["hidden"] = tuple(cfg["hidden"])
            config = ModelConfig(**cfg)
            params = {k: archive[f"model/{name}/param/{k}"] for k in spec["params"]}
            buffers = {k: archive[f"model/{name}/buffer/{k}"] for k in spec["buffers"]}
            models[name] = LstmModel(config, params, buffers)
        arrays = {k: archive[f"extra/{k}"] for k in header["arrays"]}
    return models, header["meta"], arrays
