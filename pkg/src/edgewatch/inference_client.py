"""HTTP client for the generic inference-server protocol.

Shared by the external 2D->3D lifter and the external action classifier:

    POST {base_url}/v1/infer
    request  {"model": str, "shape": [int, ...], "data": [float, ...] (row-major),
              "meta": {...}}
    response {"outputs": [float, ...] (row-major), "shape": [int, ...]}
"""

from __future__ import annotations

import math

import httpx
import numpy as np


class InferenceError(RuntimeError):
    """Inference backend unreachable, timed out, or returned garbage."""


def infer(
    base_url: str,
    model: str,
    array: np.ndarray,
    meta: dict | None = None,
    timeout_s: float = 10.0,
    transport: httpx.BaseTransport | None = None,
) -> np.ndarray:
    """Send one tensor, return the response tensor reshaped per its shape field.

    `transport` lets tests route requests to an in-process ASGI app.
    """
    arr = np.asarray(array, dtype=np.float64)
    payload = {
        "model": model,
        "shape": list(arr.shape),
        "data": arr.reshape(-1).tolist(),
        "meta": meta or {},
    }
    try:
        with httpx.Client(transport=transport, timeout=timeout_s) as client:
            resp = client.post(f"{base_url.rstrip('/')}/v1/infer", json=payload)
            resp.raise_for_status()
            body = resp.json()
    except httpx.HTTPError as exc:
        raise InferenceError(f"inference request to {base_url} failed: {exc}") from exc

    try:
        shape = tuple(int(s) for s in body["shape"])
        out = np.asarray(body["outputs"], dtype=np.float64).reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise InferenceError(f"malformed inference response from {base_url}: {exc}") from exc
    if out.size and not math.isfinite(float(np.abs(out).max())):
        raise InferenceError(f"non-finite values in inference response from {base_url}")
    return out
