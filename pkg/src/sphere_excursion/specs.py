"""Model and domain specification files, and the JSON result envelope.

Model spec, schema version 1::

    {"version": 1, "kind": "canonical", "dimension": 2}
    {"version": 1, "kind": "schoenberg", "dimension": 2, "coefficients": [0, 0.5, 0.5]}
    {"version": 1, "kind": "monomial", "dimension": 3, "coefficients": [0, 0.2, 0.8]}
    {"version": 1, "kind": "powered-exponential", "dimension": 1, "c": 1.0, "alpha": 1.0}
    {"version": 1, "kind": "sine", "dimension": 2, "c": 2.0, "alpha": 1.5}
    {"version": 1, "kind": "arccos-linear", "dimension": 2}
    {"version": 1, "kind": "sfbm", "dimension": 2, "beta": 0.25}

Domain spec: a JSON object (inline or in a file) or a shorthand
``sphere[:N]``, ``semisphere[:k]``::

    {"kind": "sphere", "dimension": 2}
    {"kind": "semisphere", "dimension": 1}
    {"kind": "box", "dimension": 2, "bounds": [[0.5, 1.5], [0, 6.283185307179586]]}
    {"kind": "cap", "dimension": 2, "center": [1, 0, 0], "radius": 0.5}
    {"kind": "custom", "dimension": 2, "area": 1.0, "lk": [1, 2, 1]}
"""

import hashlib
import json
import math
import os
from datetime import datetime, timezone

from . import __version__
from . import covariance as cm
from . import geometry as geo
from .errors import InvalidModelError

SCHEMA_VERSION = 1

MODEL_KINDS = ("schoenberg", "monomial", "powered-exponential", "sine", "canonical", "arccos-linear", "sfbm")


def _load_json_arg(text):
    if isinstance(text, dict):
        return text
    if text.lstrip().startswith("{"):
        return json.loads(text)
    with open(text) as fh:
        return json.load(fh)


def _require(doc, key, kind):
    if key not in doc:
        raise InvalidModelError(f"{kind} spec is missing {key!r}")
    return doc[key]


def parse_model(doc):
    """Build ``(model, dimension)`` from a model spec (dict, JSON text or path)."""
    try:
        doc = _load_json_arg(doc)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidModelError(f"cannot read model spec: {exc}") from exc
    if doc.get("version") != SCHEMA_VERSION:
        raise InvalidModelError(f"model spec must declare version {SCHEMA_VERSION}")
    kind = _require(doc, "kind", "model")
    N = _require(doc, "dimension", "model")
    if not isinstance(N, int) or N < 1:
        raise InvalidModelError("dimension must be a positive integer")
    try:
        if kind == "schoenberg":
            model = cm.SchoenbergSeries(N, tuple(_require(doc, "coefficients", kind)))
        elif kind == "monomial":
            model = cm.MonomialSeries(tuple(_require(doc, "coefficients", kind)))
        elif kind == "powered-exponential":
            model = cm.PoweredExponential(float(_require(doc, "c", kind)), float(_require(doc, "alpha", kind)))
        elif kind == "sine":
            model = cm.SineModel(float(_require(doc, "c", kind)), float(_require(doc, "alpha", kind)))
        elif kind == "canonical":
            model = cm.Canonical()
        elif kind == "arccos-linear":
            model = cm.ArccosLinear()
        elif kind == "sfbm":
            pole = doc.get("pole")
            model = cm.StandardizedSFBM(float(_require(doc, "beta", kind)), tuple(pole) if pole else None)
        else:
            raise InvalidModelError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(str(exc)) from exc
    if isinstance(model, (cm.SchoenbergSeries, cm.MonomialSeries)):
        cm.validate_model(model, N)
    return model, N


def model_to_spec(model, N):
    """Inverse of ``parse_model``."""
    doc = {"version": SCHEMA_VERSION, "dimension": N}
    if isinstance(model, cm.SchoenbergSeries):
        doc.update(kind="schoenberg", coefficients=list(model.coefficients))
    elif isinstance(model, cm.MonomialSeries):
        doc.update(kind="monomial", coefficients=list(model.coefficients))
    elif isinstance(model, cm.PoweredExponential):
        doc.update(kind="powered-exponential", c=model.c, alpha=model.alpha)
    elif isinstance(model, cm.SineModel):
        doc.update(kind="sine", c=model.c, alpha=model.alpha)
    elif isinstance(model, cm.Canonical):
        doc.update(kind="canonical")
    elif isinstance(model, cm.ArccosLinear):
        doc.update(kind="arccos-linear")
    elif isinstance(model, cm.StandardizedSFBM):
        doc.update(kind="sfbm", beta=model.beta)
        if model.pole is not None:
            doc["pole"] = list(model.pole)
    return doc


def parse_domain(text, default_dimension=None):
    """Build a domain from a spec (dict, inline JSON, path or shorthand)."""
    if isinstance(text, str) and not text.lstrip().startswith("{") and not os.path.exists(text):
        name, _, dim = text.partition(":")
        doc = {"kind": name}
        if dim:
            doc["dimension"] = int(dim)
    else:
        try:
            doc = _load_json_arg(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidModelError(f"cannot read domain spec: {exc}") from exc
    kind = _require(doc, "kind", "domain")
    N = doc.get("dimension", default_dimension)
    if N is None:
        raise InvalidModelError("domain spec needs a dimension")
    try:
        if kind == "sphere":
            return geo.FullSphere(int(N))
        if kind == "semisphere":
            return geo.Semisphere(int(N))
        if kind == "box":
            return geo.CoordinateBox(int(N), tuple(tuple(b) for b in _require(doc, "bounds", kind)))
        if kind == "cap":
            return geo.Cap(int(N), tuple(_require(doc, "center", kind)), float(_require(doc, "radius", kind)))
        if kind == "custom":
            lk = doc.get("lk")
            return geo.Custom(int(N), float(_require(doc, "area", kind)), tuple(lk) if lk is not None else None)
    except (TypeError, ValueError) as exc:
        raise InvalidModelError(str(exc)) from exc
    raise InvalidModelError(f"unknown domain kind {kind!r}")


def domain_to_spec(domain):
    if isinstance(domain, geo.FullSphere):
        return {"kind": "sphere", "dimension": domain.dimension}
    if isinstance(domain, geo.Semisphere):
        return {"kind": "semisphere", "dimension": domain.dimension}
    if isinstance(domain, geo.CoordinateBox):
        return {"kind": "box", "dimension": domain.dimension, "bounds": [list(b) for b in domain.bounds]}
    if isinstance(domain, geo.Cap):
        return {"kind": "cap", "dimension": domain.dimension, "center": list(domain.center), "radius": domain.radius}
    doc = {"kind": "custom", "dimension": domain.dimension, "area": domain.area}
    if domain.lk is not None:
        doc["lk"] = list(domain.lk)
    return doc


def jsonable(value):
    """Replace non-finite floats (not valid JSON) by ``None``, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return jsonable(value.item())
    return value


def canonical_bytes(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def payload_digest(envelope):
    """SHA-256 of the envelope without its wall-clock provenance."""
    payload = {k: v for k, v in envelope.items() if k != "provenance"}
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


def make_envelope(command, config, results, seed=None):
    envelope = jsonable(
        {
            "version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": command,
            "seed": seed,
            "config": config,
            "results": results,
        }
    )
    envelope["provenance"] = {
        "created": datetime.now(timezone.utc).isoformat(),
        "payload_sha256": payload_digest(envelope),
    }
    return envelope
