"""Run/record identifiers and timestamp helpers."""

from __future__ import annotations

import re
import secrets
import time
from datetime import datetime, timezone

# Crockford base32, as used by ULID
_B32 = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def new_id() -> str:
    """26-char lexicographically sortable id: 48-bit ms timestamp + 80 random bits."""
    ts = int(time.time() * 1000) & (2**48 - 1)
    rand = secrets.randbits(80)
    n = (ts << 80) | rand
    chars = []
    for _ in range(26):
        chars.append(_B32[n & 31])
        n >>= 5
    return "".join(reversed(chars))


def now_iso() -> str:
    """Current UTC time, ISO-8601 with millisecond precision and Z suffix."""
    dt = datetime.now(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_iso(ts: str) -> datetime:
    return datetime.strptime(ts, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


def slugify(name: str) -> str:
    """Kebab-case slug used as the default pipeline-record id."""
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "pipeline"
