"""Shared classifier plumbing: the model interface and JSON persistence.

Every trained model knows the attribute layout it was fitted on and the
class value order; prediction happens on the dense matrix of a
:class:`~agroisa.dataset.Dataset` with the same attributes.  Models
serialize to plain JSON so they can be stored next to the datasets they
came from.
"""

from __future__ import annotations

import json

import numpy as np

from ..dataset import AttributeSpec, Dataset
from ..errors import TrainingError

_REGISTRY: dict[str, type] = {}


def register_model(cls):
    """Class decorator: make a Model subclass loadable by its ``kind``."""
    _REGISTRY[cls.kind] = cls
    return cls


class Model:
    """A trained classifier.

    Subclasses implement :meth:`distributions` (per-class scores, one row
    per instance) and the ``_state``/``_from_state`` pair for JSON
    round-tripping.  Predictions take the highest-scoring class; ties go
    to the class that comes first in ``class_values``.
    """

    kind = "model"

    def __init__(self, attributes, class_values):
        self.attributes = tuple(attributes)
        self.class_values = tuple(class_values)

    def distributions(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_codes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.attributes):
            raise TrainingError(
                f"model expects {len(self.attributes)} attributes, got {X.shape[1]}"
            )
        return np.argmax(self.distributions(X), axis=1)

    def predict(self, ds: Dataset) -> list[str]:
        self.check_compatible(ds)
        codes = self.predict_codes(ds.X)
        return [self.class_values[c] for c in codes]

    def check_compatible(self, ds: Dataset) -> None:
        names = tuple(a.name for a in self.attributes)
        if ds.attribute_names != names:
            raise TrainingError(
                "dataset attributes do not match the model "
                f"(model: {names}, data: {ds.attribute_names})"
            )
        if tuple(ds.class_values) != self.class_values:
            raise TrainingError(
                "dataset class values do not match the model "
                f"(model: {self.class_values}, data: {tuple(ds.class_values)})"
            )

    # -- persistence --------------------------------------------------

    def _state(self) -> dict:
        raise NotImplementedError

    @classmethod
    def _from_state(cls, state: dict, attributes, class_values):
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "class_values": list(self.class_values),
            "attributes": [
                {"name": a.name, "kind": a.kind, "values": list(a.values)}
                for a in self.attributes
            ],
            "state": self._state(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Model":
        kind = payload.get("kind")
        model_cls = _REGISTRY.get(kind)
        if model_cls is None:
            raise TrainingError(f"unknown model kind {kind!r}")
        attributes = tuple(
            AttributeSpec(a["name"], a["kind"], tuple(a["values"]))
            for a in payload["attributes"]
        )
        return model_cls._from_state(payload["state"], attributes, tuple(payload["class_values"]))


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return Model.from_dict(json.load(fh))


def class_one_hot(y: np.ndarray, n_classes: int, weights=None) -> np.ndarray:
    """(n, C) indicator matrix, optionally row-scaled by instance weights."""
    out = np.zeros((y.shape[0], n_classes), dtype=np.float64)
    out[np.arange(y.shape[0]), y] = 1.0
    if weights is not None:
        out *= np.asarray(weights, dtype=np.float64)[:, None]
    return out


def require_training_data(ds: Dataset) -> None:
    if len(ds) == 0:
        raise TrainingError("cannot train on an empty dataset")
