"""Chat-completions dispatch and total verdict parsing.

Chunk i goes to endpoint i mod N (N = len(endpoints)); with two servers
that alternates, letting chunk i+1's capture and inference overlap chunk
i's.  Any transport failure degrades to a SAFE fallback verdict so the
monitoring loop never dies with the inference backend.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import httpx

from .config import VlmConfig
from .prompts import PromptPayload


class ParseMode(enum.Enum):
    STRUCTURED = "structured"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class VlmVerdict:
    level: str                  # SAFE | WARNING | DANGER
    summary: str
    raw_response: str
    chunk_index: int
    parse_mode: ParseMode
    transport_error: bool = False


_LEVELS = ("SAFE", "WARNING", "DANGER")

# Keyword table for the fallback path, scanned most-severe-first.
_DANGER_WORDS = (
    "danger", "fight", "violen", "weapon", "attack", "assault",
    "crash", "collision", "fire", "explos", "emergency", "bleeding",
)
_WARNING_WORDS = (
    "warning", "caution", "suspicious", "fall", "fell", "stumbl",
    "loiter", "unattended", "distress", "anomal", "unusual",
)

_SUMMARY_LIMIT = 500


def _iter_json_objects(text: str):
    """Yield every brace-balanced substring that parses as a JSON object."""
    depth = 0
    start = -1
    in_str = False
    escape = False
    for i, ch in enumerate(text):
        if in_str:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(text[start:i + 1])
                    except json.JSONDecodeError:
                        continue
                    if isinstance(obj, dict):
                        yield obj


def parse_verdict(text: str) -> tuple[str, str, ParseMode]:
    """Total: always returns a (level, summary, mode) triple.

    Structured path takes the first JSON object carrying a valid level;
    otherwise a case-insensitive keyword scan decides, with the raw text
    head as the summary.
    """
    text = text or ""
    for obj in _iter_json_objects(text):
        level = str(obj.get("level", "")).strip().upper()
        if level in _LEVELS:
            summary = obj.get("summary", "")
            if not isinstance(summary, str):
                summary = json.dumps(summary)
            return level, summary, ParseMode.STRUCTURED

    lowered = text.lower()
    if any(w in lowered for w in _DANGER_WORDS):
        level = "DANGER"
    elif any(w in lowered for w in _WARNING_WORDS):
        level = "WARNING"
    else:
        level = "SAFE"
    return level, text[:_SUMMARY_LIMIT], ParseMode.FALLBACK


def pick_endpoint(chunk_index: int, cfg: VlmConfig) -> str:
    return cfg.endpoints[chunk_index % len(cfg.endpoints)]


def infer_chunk(
    payload: PromptPayload,
    cfg: VlmConfig,
    transport: httpx.BaseTransport | None = None,
) -> VlmVerdict:
    endpoint = pick_endpoint(payload.chunk_index, cfg)
    body = {
        "model": cfg.model,
        "messages": list(payload.messages),
        "max_tokens": cfg.max_tokens,
        "temperature": cfg.temperature,
        "top_p": cfg.top_p,
    }
    try:
        with httpx.Client(
            base_url=endpoint, timeout=cfg.request_timeout_s, transport=transport
        ) as client:
            resp = client.post("/v1/chat/completions", json=body)
            resp.raise_for_status()
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
            if not isinstance(text, str):
                raise KeyError("content is not text")
    except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
        return VlmVerdict(
            level="SAFE",
            summary="inference unavailable",
            raw_response=f"{type(exc).__name__}: {exc}",
            chunk_index=payload.chunk_index,
            parse_mode=ParseMode.FALLBACK,
            transport_error=True,
        )

    level, summary, mode = parse_verdict(text)
    return VlmVerdict(
        level=level,
        summary=summary,
        raw_response=text,
        chunk_index=payload.chunk_index,
        parse_mode=mode,
    )
