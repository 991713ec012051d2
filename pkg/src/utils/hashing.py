"""
Stable identifiers for configurations and runs.
"""

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys; pydantic models are dumped first."""
    if hasattr(obj, "model_dump"):
        obj = obj.model_dump(mode="json")
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def generate_id(*components: Any) -> str:
    """
    Generate a short hash-based ID from components.

    Args:
        *components: Values to hash

    Returns:
        16 hex characters
    """
    combined = "|".join(canonical_json(c) if not isinstance(c, str) else c for c in components)
    return hashlib.sha256(combined.encode('utf-8')).hexdigest()[:16]


def config_hash(obj: Any) -> str:
    """Hash of the resolved configuration."""
    return generate_id(canonical_json(obj))
