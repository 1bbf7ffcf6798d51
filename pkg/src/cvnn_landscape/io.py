"""JSON layouts shared by the library and the command line.

Complex numbers are ``[re, im]`` pairs; plain numbers are read as real.

dataset::

    {"d": 2, "n": 3, "X": [[x_1 entries], ...], "y": [y_1, ...]}

``X`` lists one sample per entry, each of length ``d``.

weights::

    {"k": 2, "d": 2, "W": [[row_1], ...], "v": [v_1, ...]}

CReLU weights use ``W`` and ``v`` for the first layer and the output row and add
``"b1"``, ``"b2"``, ``"s_plus"`` and ``"s_minus"``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .crelu_net import CReluNet, PiecewiseActivation
from .errors import FormatError
from .quadratic_net import Dataset, QuadNet

PathLike = Union[str, Path]


def encode_complex(a) -> list:
    """Nested ``[re, im]`` lists for an array of any shape."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex(x) for x in a]


def decode_complex(obj, ndim: int) -> np.ndarray:
    try:
        if ndim == 0:
            if isinstance(obj, (int, float)) and not isinstance(obj, bool):
                return np.complex128(obj)
            if isinstance(obj, list) and len(obj) == 2 and all(isinstance(t, (int, float)) for t in obj):
                return np.complex128(complex(obj[0], obj[1]))
            raise FormatError(f"expected a number or [re, im], got {obj!r}")
        if not isinstance(obj, list):
            raise FormatError(f"expected a list, got {type(obj).__name__}")
        return np.array([decode_complex(x, ndim - 1) for x in obj], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc


def _field(obj: dict, key: str):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"missing field {key!r}")
    return obj[key]


def _read(path: PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _write(obj: dict, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def dataset_to_dict(data: Dataset) -> dict:
    return {"d": data.d, "n": data.n, "X": encode_complex(data.X.T), "y": encode_complex(data.y)}


def dataset_from_dict(obj: dict) -> Dataset:
    X = decode_complex(_field(obj, "X"), 2)
    y = decode_complex(_field(obj, "y"), 1)
    if X.ndim != 2:
        raise FormatError("X must be a non-empty list of samples")
    d, n = obj.get("d", X.shape[1]), obj.get("n", X.shape[0])
    if (X.shape[1], X.shape[0]) != (d, n):
        raise FormatError(f"X has shape {X.shape[::-1]}, header says d={d}, n={n}")
    try:
        return Dataset(X.T, y)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def quadnet_to_dict(net: QuadNet) -> dict:
    return {"k": net.k, "d": net.d, "W": encode_complex(net.W), "v": encode_complex(net.v)}


def crelu_to_dict(net: CReluNet) -> dict:
    return {
        "k": net.k,
        "d": net.d,
        "W": encode_complex(net.W1),
        "v": encode_complex(net.W2[0]),
        "b1": encode_complex(net.b1),
        "b2": encode_complex(net.b2),
        "s_plus": net.act.s_plus,
        "s_minus": net.act.s_minus,
    }


def weights_from_dict(obj: dict) -> Union[QuadNet, CReluNet]:
    """A :class:`CReluNet` when ``b1`` is present, otherwise a :class:`QuadNet`."""
    W = decode_complex(_field(obj, "W"), 2)
    v = decode_complex(_field(obj, "v"), 1)
    try:
        if "b1" in obj:
            act = PiecewiseActivation(float(obj.get("s_plus", 1.0)), float(obj.get("s_minus", 0.0)))
            b1 = decode_complex(obj["b1"], 1)
            b2 = complex(decode_complex(_field(obj, "b2"), 0))
            return CReluNet(W, b1, v[None, :], b2, act)
        return QuadNet(W, v)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def load_dataset(path: PathLike) -> Dataset:
    return dataset_from_dict(_read(path))


def save_dataset(data: Dataset, path: PathLike) -> None:
    _write(dataset_to_dict(data), path)


def load_weights(path: PathLike) -> Union[QuadNet, CReluNet]:
    return weights_from_dict(_read(path))


def save_weights(net: Union[QuadNet, CReluNet], path: PathLike) -> None:
    _write(crelu_to_dict(net) if isinstance(net, CReluNet) else quadnet_to_dict(net), path)
